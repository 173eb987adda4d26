#include "dopo/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dopo/errors.hpp"

namespace dopo {

namespace {

constexpr cplx I{0.0, 1.0};

void check_shape(const SimConfig& config, const PhaseState& state) {
  const auto n = static_cast<std::size_t>(config.topology.site_count());
  if (state.alpha.size() != n) {
    throw ConfigError("state has " + std::to_string(state.alpha.size()) + " sites, topology needs " +
                      std::to_string(n));
  }
  if (config.representation == Representation::PositiveP && state.alpha_dag.size() != n) {
    throw ConfigError("positive-P state needs an alpha_dag amplitude per site");
  }
}

double coupling_noise_factor(Representation r) {
  return r == Representation::TruncHusimi ? 1.0 : 0.5;
}

// Linear coupling drift on one amplitude vector (alpha or alpha_dag).
void add_coupling_drift(const SimConfig& config, const std::vector<cplx>& a, std::vector<cplx>& out) {
  const double j = config.j;
  if (j == 0.0) return;
  const int n = static_cast<int>(a.size());
  switch (config.topology.kind) {
    case TopologyKind::Single:
      break;
    case TopologyKind::Pair:
      out[0] += j * (a[1] - a[0]);
      out[1] += j * (a[0] - a[1]);
      break;
    case TopologyKind::Ring:
    case TopologyKind::TravelingRing:
      for (int r = 0; r < n; ++r) {
        const cplx left = a[(r + n - 1) % n];
        const cplx right = a[(r + 1) % n];
        out[r] += -j * a[r] + 0.5 * j * (left + right);
      }
      break;
    case TopologyKind::MeanFieldPair: {
      const int np = config.topology.size;
      cplx mean1{}, mean2{};
      for (int i = 0; i < np; ++i) {
        mean1 += a[i];
        mean2 += a[np + i];
      }
      mean1 /= static_cast<double>(np);
      mean2 /= static_cast<double>(np);
      for (int i = 0; i < np; ++i) {
        out[i] += meanfield_sde_coupling(a[i], mean2, j);
        out[np + i] += meanfield_sde_coupling(a[np + i], mean1, j);
      }
      break;
    }
  }
}

void add_traveling_noise(double j, int n, const double* xi, std::vector<cplx>& out) {
  const double half = 0.5 * std::sqrt(j);
  const double quarter = 0.25 * std::sqrt(j);
  auto c1 = [xi](int r) { return cplx{xi[4 * r], xi[4 * r + 1]}; };
  auto c2 = [xi](int r) { return cplx{xi[4 * r + 2], xi[4 * r + 3]}; };
  for (int r = 0; r < n; ++r) {
    const int left = (r + n - 1) % n;
    const int right = (r + 1) % n;
    out[r] += half * c1(r) - quarter * c1(left) - quarter * c1(right) - quarter * c2(right) +
              quarter * c2(left);
  }
}

}  // namespace

PhaseState PhaseState::vacuum(const SimConfig& config) {
  PhaseState s;
  const auto n = static_cast<std::size_t>(config.topology.site_count());
  s.alpha.assign(n, cplx{});
  if (config.representation == Representation::PositiveP) s.alpha_dag.assign(n, cplx{});
  return s;
}

std::size_t NoiseDraw::site_block(const SimConfig& config) {
  const auto n = static_cast<std::size_t>(config.topology.site_count());
  return (config.representation == Representation::TruncHusimi ? 4 : 2) * n;
}

std::size_t NoiseDraw::dimension(const SimConfig& config) {
  std::size_t dim = site_block(config);
  if (config.representation == Representation::PositiveP) return dim;
  switch (config.topology.kind) {
    case TopologyKind::Pair:
      dim += 2;
      break;
    case TopologyKind::Ring:
      dim += 2 * static_cast<std::size_t>(config.topology.size);
      break;
    case TopologyKind::TravelingRing:
      dim += 4 * static_cast<std::size_t>(config.topology.size);
      break;
    default:
      break;
  }
  return dim;
}

void drift_into(const SimConfig& config, const PhaseState& state, double p_now, PhaseState& out) {
  check_shape(config, state);
  const double b = config.b;
  const std::size_t n = state.alpha.size();
  out.alpha.resize(n);
  if (config.representation == Representation::PositiveP) {
    out.alpha_dag.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      const cplx a = state.alpha[r];
      const cplx d = state.alpha_dag[r];
      out.alpha[r] = -a + p_now * d - b * d * a * a;
      out.alpha_dag[r] = -d + p_now * a - b * a * d * d;
    }
    add_coupling_drift(config, state.alpha, out.alpha);
    add_coupling_drift(config, state.alpha_dag, out.alpha_dag);
  } else {
    out.alpha_dag.clear();
    for (std::size_t r = 0; r < n; ++r) {
      const cplx a = state.alpha[r];
      out.alpha[r] = -a + p_now * std::conj(a) - b * std::norm(a) * a;
    }
    add_coupling_drift(config, state.alpha, out.alpha);
  }
  out.time = state.time;
  out.step = state.step;
}

PhaseState drift(const SimConfig& config, const PhaseState& state, double p_now) {
  PhaseState out;
  drift_into(config, state, p_now, out);
  return out;
}

void noise_into(const SimConfig& config, const PhaseState& state, double p_now,
                std::span<const double> xi, PhaseState& out) {
  check_shape(config, state);
  if (xi.size() != NoiseDraw::dimension(config)) {
    throw ConfigError("noise draw has " + std::to_string(xi.size()) + " entries, expected " +
                      std::to_string(NoiseDraw::dimension(config)));
  }
  const double b = config.b;
  const int n = static_cast<int>(state.alpha.size());
  out.alpha.resize(n);
  out.time = state.time;
  out.step = state.step;

  switch (config.representation) {
    case Representation::PositiveP:
      out.alpha_dag.resize(n);
      for (int r = 0; r < n; ++r) {
        const cplx a = state.alpha[r];
        const cplx d = state.alpha_dag[r];
        out.alpha[r] = principal_sqrt(p_now - b * a * a) * xi[2 * r];
        out.alpha_dag[r] = principal_sqrt(p_now - b * d * d) * xi[2 * r + 1];
      }
      return;  // dissipative coupling adds no positive-P noise
    case Representation::TruncWigner:
      out.alpha_dag.clear();
      for (int r = 0; r < n; ++r) {
        const double amp = std::sqrt(0.5 + b * std::norm(state.alpha[r]));
        out.alpha[r] = amp * cplx{xi[2 * r], xi[2 * r + 1]};
      }
      break;
    case Representation::TruncHusimi: {
      out.alpha_dag.clear();
      const double pump_amp = std::sqrt(p_now);
      const double sqrt_b = std::sqrt(b);
      for (int r = 0; r < n; ++r) {
        const cplx a = state.alpha[r];
        // The radicand can dip below zero for p > 2 near the origin.
        const double amp = std::sqrt(std::max(0.0, 1.0 - 0.5 * p_now + 1.5 * b * std::norm(a)));
        const double* x = &xi[4 * r];
        out.alpha[r] = amp * cplx{x[0], x[1]} + I * (pump_amp * x[2]) + sqrt_b * a * x[3];
      }
      break;
    }
  }

  if (config.j == 0.0) return;
  const double* coupling = xi.data() + NoiseDraw::site_block(config);
  const double a_factor = coupling_noise_factor(config.representation);
  switch (config.topology.kind) {
    case TopologyKind::Pair: {
      const cplx g = std::sqrt(a_factor * config.j) * cplx{coupling[0], coupling[1]};
      out.alpha[0] += g;
      out.alpha[1] -= g;
      break;
    }
    case TopologyKind::Ring: {
      const double amp = std::sqrt(0.5 * a_factor * config.j);
      for (int r = 0; r < n; ++r) {
        const cplx g = amp * cplx{coupling[2 * r], coupling[2 * r + 1]};
        out.alpha[r] += g;
        out.alpha[(r + n - 1) % n] -= g;
      }
      break;
    }
    case TopologyKind::TravelingRing:
      add_traveling_noise(config.j, n, coupling, out.alpha);
      break;
    default:
      break;
  }
}

PhaseState noise_amplitude(const SimConfig& config, const PhaseState& state, double p_now,
                           const NoiseDraw& draw) {
  PhaseState out;
  noise_into(config, state, p_now, draw.normals, out);
  return out;
}

CouplingIncrement traveling_coupling(const SimConfig& config, const PhaseState& state,
                                     const NoiseDraw& draw) {
  if (config.representation != Representation::TruncWigner) {
    throw ConfigError("traveling-pulse coupling is defined for the Wigner representation only");
  }
  if (!config.topology.is_ring()) throw ConfigError("traveling-pulse coupling needs a ring topology");
  check_shape(config, state);
  const int n = state.sites();
  const std::size_t need = NoiseDraw::site_block(config) + 4 * static_cast<std::size_t>(n);
  if (draw.normals.size() != need) throw ConfigError("noise draw does not match the traveling ring");

  CouplingIncrement inc;
  inc.drift.assign(n, cplx{});
  inc.noise.assign(n, cplx{});
  SimConfig ring = config;
  ring.topology.kind = TopologyKind::TravelingRing;
  add_coupling_drift(ring, state.alpha, inc.drift);
  add_traveling_noise(config.j, n, draw.normals.data() + NoiseDraw::site_block(config), inc.noise);
  return inc;
}

LinearizedSystem linearize_about_vacuum(const SimConfig& config, double p_now) {
  if (config.representation == Representation::PositiveP) {
    throw ConfigError("vacuum linearization is provided for the truncated representations");
  }
  const int n = config.topology.site_count();
  const int dim = 2 * n;
  LinearizedSystem sys{Eigen::MatrixXd::Zero(dim, dim), Eigen::MatrixXd::Zero(dim, dim)};

  // The nonlinearity is cubic, so probing at amplitude h leaves an O(b h^2)
  // error, far below double precision here.
  const double h = 1e-7;
  PhaseState probe = PhaseState::vacuum(config);
  PhaseState out;
  for (int k = 0; k < dim; ++k) {
    std::fill(probe.alpha.begin(), probe.alpha.end(), cplx{});
    probe.alpha[k / 2] = (k % 2 == 0) ? cplx{h, 0.0} : cplx{0.0, h};
    drift_into(config, probe, p_now, out);
    for (int r = 0; r < n; ++r) {
      sys.drift(2 * r, k) = out.alpha[r].real() / h;
      sys.drift(2 * r + 1, k) = out.alpha[r].imag() / h;
    }
  }

  const std::size_t m = NoiseDraw::dimension(config);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(m));
  std::vector<double> unit(m, 0.0);
  const PhaseState zero = PhaseState::vacuum(config);
  for (std::size_t k = 0; k < m; ++k) {
    unit[k] = 1.0;
    noise_into(config, zero, p_now, unit, out);
    unit[k] = 0.0;
    for (int r = 0; r < n; ++r) {
      g(2 * r, static_cast<Eigen::Index>(k)) = out.alpha[r].real();
      g(2 * r + 1, static_cast<Eigen::Index>(k)) = out.alpha[r].imag();
    }
  }
  sys.diffusion = g * g.transpose();
  return sys;
}

}  // namespace dopo
