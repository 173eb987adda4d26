#include "dopo/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "dopo/errors.hpp"

namespace dopo {

double Schedule::pump_at(double t) const {
  if (t >= t_ramp) return p_target;
  if (t <= 0.0) return 0.0;
  return p_target * std::sqrt(t / t_ramp);
}

Centering centering_for(const SimConfig& config) {
  return config.p_target > 1.0 ? Centering::SampleMean : Centering::Zero;
}

int moment_sites(const SimConfig& config) {
  return config.topology.kind == TopologyKind::MeanFieldPair ? 2 : config.topology.site_count();
}

Stepper::Stepper(const SimConfig& config)
    : config_(config),
      schedule_(Schedule::from(config)),
      sqrt_dt_(std::sqrt(config.dt)),
      bound_sq_(config.divergence_bound() * config.divergence_bound()),
      normals_(NoiseDraw::dimension(config)) {
  config_.validate();
  const auto n = static_cast<std::size_t>(config_.topology.site_count());
  coupling_a_.assign(n, cplx{});
  coupling_d_.assign(n, cplx{});
}

void Stepper::step(PhaseState& state, const NormalStream& stream) {
  const double p_now = schedule_.pump_at(static_cast<double>(state.step) * config_.dt);
  stream.fill(state.step, normals_);
  step_with(state, p_now, normals_);
}

namespace {

// Linear coupling drift of one amplitude vector; mirrors the model.
void coupling_drift(const SimConfig& config, const cplx* a, cplx* out, int n) {
  const double j = config.j;
  switch (config.topology.kind) {
    case TopologyKind::Single:
      out[0] = 0.0;
      break;
    case TopologyKind::Pair:
      out[0] = j * (a[1] - a[0]);
      out[1] = -out[0];
      break;
    case TopologyKind::Ring:
    case TopologyKind::TravelingRing:
      for (int r = 0; r < n; ++r) {
        const cplx left = a[r == 0 ? n - 1 : r - 1];
        const cplx right = a[r == n - 1 ? 0 : r + 1];
        out[r] = -j * a[r] + 0.5 * j * (left + right);
      }
      break;
    case TopologyKind::MeanFieldPair: {
      const int np = n / 2;
      cplx mean1{}, mean2{};
      for (int i = 0; i < np; ++i) {
        mean1 += a[i];
        mean2 += a[np + i];
      }
      mean1 /= static_cast<double>(np);
      mean2 /= static_cast<double>(np);
      for (int i = 0; i < np; ++i) {
        out[i] = meanfield_sde_coupling(a[i], mean2, j);
        out[np + i] = meanfield_sde_coupling(a[np + i], mean1, j);
      }
      break;
    }
  }
}


}  // namespace

void Stepper::step_with(PhaseState& state, double p_now, std::span<const double> xi) {
  // Fused Euler-Maruyama update; algebraically identical to
  // drift_into/noise_into (checked by the unit tests) without the temporaries.
  const int n = state.sites();
  const double dt = config_.dt;
  const double sdt = sqrt_dt_;
  const double b = config_.b;
  cplx* a = state.alpha.data();
  bool diverged = false;

  coupling_drift(config_, a, coupling_a_.data(), n);
  switch (config_.representation) {
    case Representation::PositiveP: {
      cplx* d = state.alpha_dag.data();
      coupling_drift(config_, d, coupling_d_.data(), n);
      for (int r = 0; r < n; ++r) {
        const cplx ar = a[r], dr = d[r];
        const cplx aa = ar * ar, dd = dr * dr;
        const cplx na = ar + (-ar + p_now * dr - b * dr * aa + coupling_a_[r]) * dt +
                        principal_sqrt(p_now - b * aa) * (xi[2 * r] * sdt);
        const cplx nd = dr + (-dr + p_now * ar - b * ar * dd + coupling_d_[r]) * dt +
                        principal_sqrt(p_now - b * dd) * (xi[2 * r + 1] * sdt);
        a[r] = na;
        d[r] = nd;
        diverged |= !(std::norm(na) <= bound_sq_) || !(std::norm(nd) <= bound_sq_);
      }
      break;
    }
    case Representation::TruncWigner:
      for (int r = 0; r < n; ++r) {
        const cplx ar = a[r];
        const double mod2 = std::norm(ar);
        const double amp = std::sqrt(0.5 + b * mod2) * sdt;
        a[r] = ar + (-ar + p_now * std::conj(ar) - b * mod2 * ar + coupling_a_[r]) * dt +
               amp * cplx{xi[2 * r], xi[2 * r + 1]};
      }
      break;
    case Representation::TruncHusimi: {
      const double pump_amp = std::sqrt(p_now) * sdt;
      const double noise_b = std::sqrt(b) * sdt;
      for (int r = 0; r < n; ++r) {
        const cplx ar = a[r];
        const double mod2 = std::norm(ar);
        const double amp = std::sqrt(std::max(0.0, 1.0 - 0.5 * p_now + 1.5 * b * mod2)) * sdt;
        const double* x = &xi[4 * r];
        a[r] = ar + (-ar + p_now * std::conj(ar) - b * mod2 * ar + coupling_a_[r]) * dt +
               amp * cplx{x[0], x[1]} + cplx{0.0, pump_amp * x[2]} + noise_b * x[3] * ar;
      }
      break;
    }
  }

  if (config_.representation != Representation::PositiveP && config_.j != 0.0) {
    const double* c = xi.data() + NoiseDraw::site_block(config_);
    const double a_factor = config_.representation == Representation::TruncHusimi ? 1.0 : 0.5;
    switch (config_.topology.kind) {
      case TopologyKind::Pair: {
        const cplx g = std::sqrt(a_factor * config_.j) * sdt * cplx{c[0], c[1]};
        a[0] += g;
        a[1] -= g;
        break;
      }
      case TopologyKind::Ring: {
        const double amp = std::sqrt(0.5 * a_factor * config_.j) * sdt;
        for (int r = 0; r < n; ++r) {
          const cplx g = amp * cplx{c[2 * r], c[2 * r + 1]};
          a[r] += g;
          a[r == 0 ? n - 1 : r - 1] -= g;
        }
        break;
      }
      case TopologyKind::TravelingRing: {
        const double half = 0.5 * std::sqrt(config_.j) * sdt;
        const double quarter = 0.5 * half;
        for (int r = 0; r < n; ++r) {
          const int left = r == 0 ? n - 1 : r - 1;
          const int right = r == n - 1 ? 0 : r + 1;
          const cplx c1r{c[4 * r], c[4 * r + 1]};
          const cplx c1l{c[4 * left], c[4 * left + 1]};
          const cplx c1p{c[4 * right], c[4 * right + 1]};
          const cplx c2l{c[4 * left + 2], c[4 * left + 3]};
          const cplx c2p{c[4 * right + 2], c[4 * right + 3]};
          a[r] += half * c1r - quarter * (c1l + c1p + c2p) + quarter * c2l;
        }
        break;
      }
      default:
        break;
    }
  }
  if (config_.representation != Representation::PositiveP) {
    for (int r = 0; r < n; ++r) diverged |= !(std::norm(a[r]) <= bound_sq_);
  }

  ++state.step;
  state.time = static_cast<double>(state.step) * dt;
  if (diverged) {
    std::ostringstream os;
    os << "trajectory diverged at step " << state.step << " (t = " << state.time << ")";
    throw DivergenceError(os.str(), state.step);
  }
}

void step_reference(const SimConfig& config, PhaseState& state, double p_now, std::span<const double> normals) {
  const PhaseState f = drift(config, state, p_now);
  PhaseState g;
  noise_into(config, state, p_now, normals, g);
  const double sdt = std::sqrt(config.dt);
  for (int r = 0; r < state.sites(); ++r) {
    state.alpha[r] += f.alpha[r] * config.dt + g.alpha[r] * sdt;
    if (state.has_dag()) state.alpha_dag[r] += f.alpha_dag[r] * config.dt + g.alpha_dag[r] * sdt;
  }
  ++state.step;
  state.time = static_cast<double>(state.step) * config.dt;
}

PhaseState step(const SimConfig& config, const PhaseState& state, const NormalStream& stream) {
  Stepper stepper(config);
  PhaseState next = state;
  stepper.step(next, stream);
  return next;
}

namespace {

// Raw sums of samples shifted by a per-trajectory reference; converted to a
// MomentSet when a batch closes.
class ShiftedSums {
 public:
  ShiftedSums(int sites, Centering centering)
      : n_(sites), centering_(centering), ref_a_(sites), ref_d_(sites) {
    reset();
  }

  bool has_reference() const { return have_ref_; }

  void set_reference(const cplx* a, const cplx* d) {
    for (int r = 0; r < n_; ++r) {
      ref_a_[r] = a[r];
      ref_d_[r] = d[r];
    }
    have_ref_ = true;
  }

  void add(const cplx* a, const cplx* d) {
    cplx u[64], v[64];
    cplx* pu = n_ <= 64 ? u : heap_u_.data();
    cplx* pv = n_ <= 64 ? v : heap_v_.data();
    for (int r = 0; r < n_; ++r) {
      pu[r] = a[r] - ref_a_[r];
      pv[r] = d[r] - ref_d_[r];
      su_[r] += pu[r];
      sv_[r] += pv[r];
    }
    for (int r = 0; r < n_; ++r) {
      cplx* row_uu = &suu_[static_cast<std::size_t>(r) * n_];
      cplx* row_vu = &svu_[static_cast<std::size_t>(r) * n_];
      for (int s = 0; s < n_; ++s) {
        row_uu[s] += pu[r] * pu[s];
        row_vu[s] += pv[r] * pu[s];
      }
    }
    ++count_;
  }

  MomentSet flush() {
    Eigen::VectorXcd ra(n_), rd(n_), su(n_), sv(n_);
    Eigen::MatrixXcd suu(n_, n_), svu(n_, n_);
    for (int r = 0; r < n_; ++r) {
      ra(r) = ref_a_[r];
      rd(r) = ref_d_[r];
      su(r) = su_[r];
      sv(r) = sv_[r];
      for (int s = 0; s < n_; ++s) {
        suu(r, s) = suu_[static_cast<std::size_t>(r) * n_ + s];
        svu(r, s) = svu_[static_cast<std::size_t>(r) * n_ + s];
      }
    }
    MomentSet m = MomentSet::from_shifted_sums(centering_, count_, ra, rd, su, sv, suu, svu);
    reset();
    return m;
  }

 private:
  void reset() {
    count_ = 0;
    su_.assign(n_, cplx{});
    sv_.assign(n_, cplx{});
    suu_.assign(static_cast<std::size_t>(n_) * n_, cplx{});
    svu_.assign(static_cast<std::size_t>(n_) * n_, cplx{});
    if (n_ > 64) {
      heap_u_.resize(n_);
      heap_v_.resize(n_);
    }
  }

  int n_;
  Centering centering_;
  bool have_ref_ = false;
  std::uint64_t count_ = 0;
  std::vector<cplx> ref_a_, ref_d_;
  std::vector<cplx> su_, sv_, suu_, svu_;
  std::vector<cplx> heap_u_, heap_v_;
};

// Collects one sample (or Np samples for the mean-field ensemble) from a state.
class Sampler {
 public:
  Sampler(const SimConfig& config)
      : config_(config),
        fold_(config.p_target > 1.0),
        sites_(moment_sites(config)),
        a_(sites_),
        d_(sites_) {}

  int sites() const { return sites_; }

  template <class Sink>
  void visit(const PhaseState& s, Sink&& sink) {
    if (config_.topology.kind == TopologyKind::MeanFieldPair) {
      const int np = config_.topology.size;
      for (int i = 0; i < np; ++i) {
        load(s, {i, np + i});
        sink(a_.data(), d_.data());
      }
      return;
    }
    for (int r = 0; r < sites_; ++r) {
      a_[r] = s.alpha[r];
      d_[r] = s.dag(r);
    }
    fold();
    sink(a_.data(), d_.data());
  }

 private:
  void load(const PhaseState& s, std::initializer_list<int> idx) {
    int k = 0;
    for (int r : idx) {
      a_[k] = s.alpha[r];
      d_[k] = s.dag(r);
      ++k;
    }
    fold();
  }

  // Above threshold the ramp picks one of the two phase states at random;
  // map the negative branch onto the positive one.
  void fold() {
    if (!fold_) return;
    double total = 0.0;
    for (int r = 0; r < sites_; ++r) total += (a_[r] + d_[r]).real();
    if (total < 0.0) {
      for (int r = 0; r < sites_; ++r) {
        a_[r] = -a_[r];
        d_[r] = -d_[r];
      }
    }
  }

  const SimConfig& config_;
  bool fold_;
  int sites_;
  std::vector<cplx> a_, d_;
};

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<MomentSet> run_trajectory_batched(const SimConfig& config, int n_batches,
                                              std::uint64_t trajectory) {
  config.validate();
  if (n_batches < 1) throw ConfigError("n_batches must be >= 1");
  const std::uint64_t total = config.total_steps();
  const std::uint64_t ramp = config.ramp_steps();
  if (total <= ramp) throw ConfigError("t_total must exceed t_ramp");
  const std::uint64_t every = static_cast<std::uint64_t>(config.sample_every);
  const std::uint64_t n_samples = (total - ramp) / every + 1;
  if (n_samples < static_cast<std::uint64_t>(n_batches)) {
    throw ConfigError("averaging window holds fewer samples than batches");
  }

  const Centering centering = centering_for(config);
  Stepper stepper(config);
  NormalStream stream(trajectory_key(config.seed, trajectory));
  PhaseState state = PhaseState::vacuum(config);
  Sampler sampler(config);
  ShiftedSums sums(sampler.sites(), centering);
  std::vector<MomentSet> batches;
  batches.reserve(n_batches);

  // Below threshold the reference is the origin; above, the first sample.
  if (centering == Centering::Zero) {
    std::vector<cplx> zero(sampler.sites(), cplx{});
    sums.set_reference(zero.data(), zero.data());
  }
  auto sink = [&sums](const cplx* a, const cplx* d) {
    if (!sums.has_reference()) sums.set_reference(a, d);
    sums.add(a, d);
  };

  std::uint64_t sample_index = 0;
  int batch = 0;
  auto take_sample = [&] {
    sampler.visit(state, sink);
    ++sample_index;
    const auto boundary = (static_cast<std::uint64_t>(batch) + 1) * n_samples / n_batches;
    if (sample_index == boundary) {
      batches.push_back(sums.flush());
      ++batch;
    }
  };

  while (state.step < total) {
    stepper.step(state, stream);
    if (state.step >= ramp && (state.step - ramp) % every == 0) take_sample();
  }
  // With a zero-length ramp the initial state is not sampled, leaving the
  // last batch one short.
  while (static_cast<int>(batches.size()) < n_batches) batches.push_back(sums.flush());
  return batches;
}

MomentSet run_trajectory(const SimConfig& config, std::uint64_t trajectory) {
  MomentSet merged;
  for (const MomentSet& b : run_trajectory_batched(config, 1, trajectory)) merged.merge(b);
  return merged;
}

EnsembleResult run_ensemble(const SimConfig& config, int n_traj, const RunOptions& options) {
  config.validate();
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  std::vector<std::vector<MomentSet>> per_traj(n_traj);
  std::vector<char> aborted(n_traj, 0);
  std::vector<std::string> abort_msg(n_traj);
  std::exception_ptr hard_error;
  std::mutex error_mutex;

  parallel_for(n_traj, options.threads, [&](int i) {
    try {
      per_traj[i] = run_trajectory_batched(config, options.batches, static_cast<std::uint64_t>(i));
    } catch (const DivergenceError& e) {
      aborted[i] = 1;
      abort_msg[i] = e.what();
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!hard_error) hard_error = std::current_exception();
    }
  });
  if (hard_error) std::rethrow_exception(hard_error);

  EnsembleResult result;
  result.trajectories = n_traj;
  result.batches.assign(options.batches, MomentSet(moment_sites(config), centering_for(config)));
  result.moments = MomentSet(moment_sites(config), centering_for(config));
  for (int i = 0; i < n_traj; ++i) {
    if (aborted[i]) {
      ++result.aborted;
      continue;
    }
    for (int b = 0; b < options.batches; ++b) {
      result.batches[b].merge(per_traj[i][b]);
      result.moments.merge(per_traj[i][b]);
    }
  }
  const double fraction = static_cast<double>(result.aborted) / n_traj;
  if (result.aborted > 0 && fraction > options.max_abort_fraction) {
    const auto first = std::find(aborted.begin(), aborted.end(), 1) - aborted.begin();
    std::ostringstream os;
    os << result.aborted << " of " << n_traj << " trajectories aborted; first: " << abort_msg[first];
    throw NumericalError(os.str());
  }
  return result;
}

std::vector<SweepPoint> sweep(std::span<const SimConfig> grid, int n_traj, const RunOptions& options) {
  std::vector<SweepPoint> out(grid.size());
  // Parallelism is across points; each point runs its trajectories serially so
  // results do not depend on how the threads are split.
  RunOptions inner = options;
  inner.threads = 1;
  parallel_for(static_cast<int>(grid.size()), options.threads, [&](int i) {
    out[i].config = grid[i];
    try {
      out[i].result = run_ensemble(grid[i], n_traj, inner);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace dopo
