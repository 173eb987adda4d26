#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dopo/config.hpp"
#include "dopo/model.hpp"
#include "dopo/moments.hpp"
#include "dopo/rng.hpp"

namespace dopo {

/// Pump ramp p(t) = p_target sqrt(t / t_ramp) up to t_ramp, then flat.
/// Moments are averaged over [t_ramp, t_total].
struct Schedule {
  double p_target = 0.0;
  double t_ramp = 1.0;
  double t_total = 1.0;

  static Schedule from(const SimConfig& config) {
    return {config.p_target, config.t_ramp, config.t_total};
  }
  double pump_at(double t) const;
  bool in_window(double t) const { return t >= t_ramp; }
};

/// Moment centering used for a given pump: zero below threshold, sample
/// mean (after sign folding) above.
Centering centering_for(const SimConfig& config);

/// Reusable Euler-Maruyama stepper; owns scratch buffers so a trajectory
/// performs no allocation per step.
class Stepper {
 public:
  explicit Stepper(const SimConfig& config);

  /// Advance `state` by dt using the draws of `stream` for state.step.
  /// Throws DivergenceError if any amplitude leaves the guard radius.
  void step(PhaseState& state, const NormalStream& stream);

  /// Same update with caller-supplied standard normals and pump.
  void step_with(PhaseState& state, double p_now, std::span<const double> normals);

  const SimConfig& config() const { return config_; }

 private:
  SimConfig config_;
  Schedule schedule_;
  double sqrt_dt_;
  double bound_sq_;
  std::vector<double> normals_;
  std::vector<cplx> coupling_a_;
  std::vector<cplx> coupling_d_;
};

/// Unfused Euler-Maruyama step built directly from drift() and
/// noise_amplitude(); the reference the Stepper is tested against.
void step_reference(const SimConfig& config, PhaseState& state, double p_now, std::span<const double> normals);

/// One-shot form of Stepper::step.
PhaseState step(const SimConfig& config, const PhaseState& state, const NormalStream& stream);

/// Integrate one trajectory from vacuum and time-average its moments over the
/// averaging window, split into `n_batches` consecutive blocks (for batch-means
/// standard errors). Merging the blocks gives run_trajectory.
std::vector<MomentSet> run_trajectory_batched(const SimConfig& config, int n_batches,
                                              std::uint64_t trajectory = 0);
MomentSet run_trajectory(const SimConfig& config, std::uint64_t trajectory = 0);

/// Second moments are reported for `sites()` sites: the full ring/pair, or
/// for MeanFieldPair the two DOPOs, each particle pair (i, Np + i) being one
/// sample.
int moment_sites(const SimConfig& config);

struct RunOptions {
  int threads = 1;
  int batches = 16;
  /// Fraction of aborted trajectories above which the run fails.
  double max_abort_fraction = 1e-3;
};

struct EnsembleResult {
  MomentSet moments;
  std::vector<MomentSet> batches;  // batch b merged across trajectories
  int trajectories = 0;
  int aborted = 0;
};

/// Independent trajectories keyed (seed, index); the merged result does not
/// depend on the thread count. Throws NumericalError if too many abort.
EnsembleResult run_ensemble(const SimConfig& config, int n_traj, const RunOptions& options = {});

struct SweepPoint {
  SimConfig config;
  EnsembleResult result;
  std::string error;  // empty on success
  bool ok() const { return error.empty(); }
};

/// Run every grid point with its own config seed. Failures are recorded per
/// point and do not stop the sweep.
std::vector<SweepPoint> sweep(std::span<const SimConfig> grid, int n_traj, const RunOptions& options = {});

}  // namespace dopo
