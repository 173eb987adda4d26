#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>

#include "dopo/errors.hpp"
#include "experiment.hpp"
#include "runner.hpp"

using namespace dopo;
using namespace dopo::cli;

namespace {

bool to_stdout(const std::string& path) { return path.empty() || path == "-"; }

void write_table(const Table& table, const std::string& path, Format format) {
  if (to_stdout(path)) {
    table.write(std::cout, format);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output '" + path + "'");
  table.write(os, format);
  if (!os) throw ConfigError("failed writing '" + path + "'");
}

void print_warnings(const ExperimentSpec& spec) {
  if (spec.mode != Mode::Simulate && spec.mode != Mode::Compare) return;
  std::set<std::string> seen;
  for (const GridPoint& pt : spec.grid.expand()) {
    for (const auto& w : point_config(spec, pt).warnings()) {
      if (seen.insert(w).second) std::cerr << "warning: " << w << "\n";
    }
  }
}

int emit(const ExperimentSpec& spec, const RunOutcome& out) {
  write_table(out.table, spec.output_path, spec.format);
  if (out.history) {
    if (to_stdout(spec.output_path)) {
      std::cerr << "note: iteration history is written only with --out\n";
    } else {
      const std::string ext = spec.format == Format::Csv ? ".history.csv" : ".history.jsonl";
      write_table(*out.history, spec.output_path + ext, spec.format);
    }
  }
  if (out.failed_points > 0) std::cerr << out.failed_points << " point(s) failed; see the error column\n";
  if (out.out_of_tolerance > 0) std::cerr << out.out_of_tolerance << " row(s) outside tolerance\n";
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-space simulation and closed-form checks for coupled DOPO networks"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::string format;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Experiment file (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", overrides.seed, "Override sim.seed");
    sub->add_option("--out", overrides.out, "Output path ('-' for stdout)");
    sub->add_option("--threads", overrides.threads, "Worker threads");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
  };
  CLI::App* run = app.add_subcommand("run", "Run the experiment in its configured mode");
  CLI::App* check = app.add_subcommand("validate", "Parse and validate a config without running it");
  CLI::App* oracle = app.add_subcommand("oracle", "Evaluate the closed forms on the config's grid");
  for (CLI::App* sub : {run, check, oracle}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!format.empty()) overrides.format = parse_format(format);
    ExperimentSpec spec = load_experiment(config_path);
    apply_overrides(spec, overrides);
    if (check->parsed()) {
      validate(spec);
      print_warnings(spec);
      std::cout << spec.name << ": mode " << to_string(spec.mode) << ", " << spec.grid.size() << " grid point(s)\n";
      return kExitOk;
    }
    if (oracle->parsed()) return emit(spec, run_oracle(spec));
    print_warnings(spec);
    return emit(spec, run_experiment(spec));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
