#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dopo/config.hpp"
#include "dopo/meanfield.hpp"
#include "table.hpp"

namespace dopo::cli {

enum class Mode { Simulate, Oracle, Compare, MeanField, Lattice };

std::string_view to_string(Mode m);

/// One grid point; axes not present in the file keep their defaults.
struct GridPoint {
  double p = 0.0;
  double j = 0.0;
  int n = 16;   // ring size
  int r = 1;    // site separation
  int np = 1;   // particles per DOPO
  int k = 0;    // Fourier index
};

struct Grid {
  std::vector<double> p, j;
  std::vector<int> n, r, np, k;

  /// Cartesian product in the order p, j, N, Np, r, k (k fastest).
  std::vector<GridPoint> expand() const;
  std::size_t size() const;
};

struct Tolerance {
  double relative = 0.05;
  /// Points with |p - 1| <= threshold_band use threshold_relative.
  double threshold_band = 0.0;
  double threshold_relative = 0.10;
  std::vector<std::string> quantities;  // empty: per-topology default

  double at(double p) const;
};

struct ExperimentSpec {
  std::string name;
  Mode mode = Mode::Oracle;
  SimConfig sim;  // p_target/j/topology size are taken from the grid
  int trajectories = 1;
  int batches = 16;
  int threads = 1;
  Grid grid;
  Tolerance tolerance;
  LoopOptions loop;
  double a0 = 1.0;
  std::string output_path;  // empty or "-" for stdout
  Format format = Format::Csv;
  std::string source;  // file name, for diagnostics
};

/// Parse a YAML experiment. Errors are reported as ConfigError with the
/// source, line and dotted field path.
ExperimentSpec parse_experiment_text(const std::string& text, const std::string& source = "<string>");
ExperimentSpec load_experiment(const std::string& path);

/// Cross-field checks (axes valid for the mode, grid nonempty, the derived
/// SimConfigs validate). Throws ConfigError.
void validate(const ExperimentSpec& spec);

/// SimConfig for one grid point, seeded from the master seed and the
/// point's physical parameters.
SimConfig point_config(const ExperimentSpec& spec, const GridPoint& point);

}  // namespace dopo::cli
