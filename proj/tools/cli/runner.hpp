#pragma once

#include <optional>
#include <string>

#include "experiment.hpp"
#include "table.hpp"

namespace dopo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitNumerical = 4;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<Format> format;
};

void apply_overrides(ExperimentSpec& spec, const Overrides& o);

struct RunOutcome {
  explicit RunOutcome(Table t) : table(std::move(t)) {}

  Table table;
  std::optional<Table> history;  // meanfield mode: per-iteration amplitudes
  int failed_points = 0;
  int out_of_tolerance = 0;
  int exit_code = kExitOk;
};

/// Execute the experiment in its configured mode.
RunOutcome run_experiment(const ExperimentSpec& spec);

/// Closed forms only: the oracle table for the configured topology, or the
/// lattice/meanfield tables for those modes.
RunOutcome run_oracle(const ExperimentSpec& spec);

/// Quantities compared by default for a topology.
std::vector<std::string> default_compared(TopologyKind kind);

}  // namespace dopo::cli
