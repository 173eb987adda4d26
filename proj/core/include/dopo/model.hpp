#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dopo/config.hpp"

namespace dopo {

using cplx = std::complex<double>;

/// Principal square root. Real radicands take a real fast path, which keeps
/// positive-P trajectories that start real exactly real, and a negative real
/// radicand maps to +i regardless of the sign of its zero imaginary part.
inline cplx principal_sqrt(cplx z) {
  if (z.imag() == 0.0) {
    if (z.real() >= 0.0) return {std::sqrt(z.real()), 0.0};
    return {0.0, std::sqrt(-z.real())};
  }
  return std::sqrt(z);
}

/// Phase-space amplitudes of every site. `alpha_dag` is an independent
/// amplitude for positive-P and is left empty for the truncated
/// representations, where it is conj(alpha).
struct PhaseState {
  std::vector<cplx> alpha;
  std::vector<cplx> alpha_dag;
  double time = 0.0;
  std::uint64_t step = 0;

  static PhaseState vacuum(const SimConfig& config);

  int sites() const { return static_cast<int>(alpha.size()); }
  bool has_dag() const { return !alpha_dag.empty(); }
  cplx dag(int r) const { return has_dag() ? alpha_dag[r] : std::conj(alpha[r]); }
};

/// Standard normal draws for one step. Layout (site block, then coupling):
///   positive-P       2 per site: xi_R, xi_R_dag
///   Wigner           2 per site: Re, Im of xi_C
///   Husimi           4 per site: Re, Im of xi_C, xi_R1, xi_R2
///   Pair coupling    2: Re, Im of the shared xi_C (truncated reps only)
///   Ring coupling    2 per link r (between r and r+1)
///   Traveling ring   4 per site: Re, Im of xi_C1_r, then of xi_C2_r
/// Positive-P never draws coupling noise. Scale by sqrt(dt) for increments.
struct NoiseDraw {
  std::vector<double> normals;

  static std::size_t dimension(const SimConfig& config);
  static std::size_t site_block(const SimConfig& config);
};

/// Deterministic part of d(alpha)/dt, written into `out` (resized as needed).
void drift_into(const SimConfig& config, const PhaseState& state, double p_now, PhaseState& out);
PhaseState drift(const SimConfig& config, const PhaseState& state, double p_now);

/// Stochastic increment per unit sqrt(dt): state-dependent amplitudes times
/// the draws, including coupling noise for every topology.
void noise_into(const SimConfig& config, const PhaseState& state, double p_now,
                std::span<const double> normals, PhaseState& out);
PhaseState noise_amplitude(const SimConfig& config, const PhaseState& state, double p_now,
                           const NoiseDraw& draw);

/// Coupling contribution of the delay-line ring alone, split into its drift
/// and its noise per unit sqrt(dt). Only defined for the Wigner representation.
struct CouplingIncrement {
  std::vector<cplx> drift;
  std::vector<cplx> noise;
};
CouplingIncrement traveling_coupling(const SimConfig& config, const PhaseState& state,
                                     const NoiseDraw& draw);

/// Drift felt by one particle coupled to the mean amplitude of the other DOPO.
inline cplx meanfield_sde_coupling(cplx amplitude, cplx mean_other, double j) {
  return -j * amplitude + j * mean_other;
}

/// Linearization about the vacuum of a truncated-representation network, in
/// real coordinates ordered (Re a_0, Im a_0, Re a_1, ...): d v = A v dt + G dW,
/// with D = G G^T.
struct LinearizedSystem {
  Eigen::MatrixXd drift;
  Eigen::MatrixXd diffusion;
};
LinearizedSystem linearize_about_vacuum(const SimConfig& config, double p_now);

}  // namespace dopo
