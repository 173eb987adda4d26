#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>

#include "dopo/engine.hpp"
#include "dopo/errors.hpp"
#include "dopo/gaussian.hpp"
#include "dopo/meanfield.hpp"
#include "dopo/oracles.hpp"

namespace dopo::cli {

void apply_overrides(ExperimentSpec& spec, const Overrides& o) {
  if (o.seed) spec.sim.seed = *o.seed;
  if (o.out) spec.output_path = *o.out;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be >= 1");
    spec.threads = *o.threads;
  }
  if (o.format) spec.format = *o.format;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Values = std::vector<double>;

bool is_ring(TopologyKind k) { return k == TopologyKind::Ring || k == TopologyKind::TravelingRing; }

std::vector<std::string> quantity_names(TopologyKind kind) {
  if (kind == TopologyKind::Single) return {"var_x", "var_p"};
  std::vector<std::string> names = {"a1", "a2", "c1", "c2", "var_x", "var_p", "duan", "simon", "discord"};
  if (is_ring(kind)) names.push_back("extended_duan");
  return names;
}

std::string regime_name(double p) {
  switch (classify(p)) {
    case Regime::Below:
      return "below";
    case Regime::Threshold:
      return "threshold";
    case Regime::Above:
      return "above";
  }
  return "?";
}

void append_error(std::string& acc, const std::string& what) {
  if (acc.find(what) != std::string::npos) return;
  if (!acc.empty()) acc += "; ";
  acc += what;
}

// a1..discord for one covariance. Simon and discord need a physical
// covariance; a sampled one slightly outside is projected first.
Values pair_metrics(const PairCovariance& cov, bool* projected = nullptr) {
  Values v = {cov.a1, cov.a2, cov.c1, cov.c2, 0.5 * cov.a1, 0.5 * cov.a2, duan_criterion(cov), kNaN, kNaN};
  try {
    v[7] = simon_criterion(cov);
    v[8] = gaussian_discord(cov);
  } catch (const NumericalError&) {
    try {
      const PairCovariance phys = project_physical(cov).cov;
      v[7] = simon_criterion(phys);
      v[8] = gaussian_discord(phys);
      if (projected) *projected = true;
    } catch (const NumericalError&) {
      v[7] = v[8] = kNaN;
    }
  }
  return v;
}

Values measure(const MomentSet& m, const SimConfig& c, int r, bool* projected = nullptr) {
  const Representation rep = c.representation;
  switch (c.topology.kind) {
    case TopologyKind::Single: {
      const QuadratureMoments q = quadrature_moments(m, 0, 0, ordering_offset(rep));
      return {q.var_x_r, q.var_p_r};
    }
    case TopologyKind::Pair:
    case TopologyKind::MeanFieldPair:
      return pair_metrics(pair_covariance(m, 0, 1, rep), projected);
    case TopologyKind::Ring:
    case TopologyKind::TravelingRing: {
      Values v = pair_metrics(ring_pair_covariance(m, r, rep), projected);
      v.push_back(c.topology.size % 2 == 0 ? extended_duan(m, rep) : kNaN);
      return v;
    }
  }
  return {};
}

// Closed-form counterparts of measure(); entries without a closed form at
// this point are NaN and reported through `error`.
Values theory(const SimConfig& c, int r, std::string& error) {
  const double p = c.p_target, j = c.j;
  const std::size_t n = quantity_names(c.topology.kind).size();
  try {
    switch (c.topology.kind) {
      case TopologyKind::Single: {
        const QuadratureVariances q = single_dopo_variances(p);
        return {q.var_x, q.var_p};
      }
      case TopologyKind::Pair: {
        const PairCriteria crit = pair_criteria_analytic(p, j);
        Values v = crit.cov ? pair_metrics(*crit.cov) : Values(n, kNaN);
        v[6] = crit.duan;
        v[7] = crit.simon;
        v[8] = crit.discord;
        return v;
      }
      case TopologyKind::MeanFieldPair: {
        const FiniteNpFluctuations f = finite_np_fluctuations(p, j, c.topology.size);
        return pair_metrics({2.0 * f.var_x1, 2.0 * f.var_p1, 2.0 * f.cov_x12, 2.0 * f.cov_p12});
      }
      case TopologyKind::Ring:
      case TopologyKind::TravelingRing: {
        Values v = pair_metrics(lattice_pair_covariance(p, j, c.topology.size, r));
        v.push_back(c.topology.size % 2 == 0 ? extended_duan_analytic(p, j) : kNaN);
        return v;
      }
    }
  } catch (const std::exception& e) {
    append_error(error, std::string("closed form: ") + e.what());
  }
  return Values(n, kNaN);
}

struct SiteColumns {
  bool ring = false;
  bool np = false;
};

SiteColumns site_columns(TopologyKind kind) {
  return {is_ring(kind), kind == TopologyKind::MeanFieldPair};
}

std::vector<std::string> point_columns(SiteColumns sc) {
  std::vector<std::string> cols = {"point", "p", "j"};
  if (sc.ring) {
    cols.push_back("N");
    cols.push_back("r");
  }
  if (sc.np) cols.push_back("Np");
  return cols;
}

void set_point(Table& t, SiteColumns sc, std::size_t index, const GridPoint& pt) {
  t.set("point", static_cast<std::int64_t>(index));
  t.set("p", pt.p);
  t.set("j", pt.j);
  if (sc.ring) {
    t.set("N", static_cast<std::int64_t>(pt.n));
    t.set("r", static_cast<std::int64_t>(pt.r));
  }
  if (sc.np) t.set("Np", static_cast<std::int64_t>(pt.np));
}

double rel_dev(double measured, double expected) {
  const double abs_dev = std::abs(measured - expected);
  if (expected == 0.0) return abs_dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return abs_dev / std::abs(expected);
}

RunOutcome run_simulation(const ExperimentSpec& spec, bool compare) {
  const TopologyKind kind = spec.sim.topology.kind;
  const SiteColumns sc = site_columns(kind);
  const auto names = quantity_names(kind);
  std::vector<std::string> compared = spec.tolerance.quantities.empty() ? default_compared(kind) : spec.tolerance.quantities;
  for (const auto& q : compared) {
    if (std::find(names.begin(), names.end(), q) == names.end()) {
      throw ConfigError(spec.source + ": tolerance.quantities: '" + q + "' is not reported for this topology");
    }
  }

  std::vector<std::string> cols = point_columns(sc);
  for (const char* c : {"representation", "topology", "seed", "trajectories", "aborted", "samples"}) cols.push_back(c);
  for (const auto& q : names) {
    cols.push_back(q);
    cols.push_back(q + "_se");
  }
  if (compare) {
    for (const auto& q : names) {
      cols.push_back(q + "_theory");
      cols.push_back(q + "_abs_dev");
      cols.push_back(q + "_rel_dev");
    }
    cols.push_back("tolerance");
    cols.push_back("max_rel_dev");
    cols.push_back("within_tolerance");
  }
  cols.push_back("projected");
  cols.push_back("error");
  RunOutcome out{Table(cols)};

  // Points that differ only in the site separation share one simulation.
  const auto points = spec.grid.expand();
  std::vector<SimConfig> configs;
  std::vector<std::size_t> config_of(points.size());
  std::map<std::tuple<double, double, int, int>, std::size_t> seen;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GridPoint& pt = points[i];
    const auto key = std::make_tuple(pt.p, pt.j, sc.ring ? pt.n : 0, sc.np ? pt.np : 0);
    auto [it, inserted] = seen.emplace(key, configs.size());
    if (inserted) configs.push_back(point_config(spec, pt));
    config_of[i] = it->second;
  }

  RunOptions options;
  options.threads = spec.threads;
  options.batches = spec.batches;
  std::vector<SweepPoint> results;
  if (static_cast<int>(configs.size()) >= spec.threads) {
    results = sweep(configs, spec.trajectories, options);
  } else {
    // Few points: spend the threads on trajectories instead.
    results.resize(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
      results[i].config = configs[i];
      try {
        results[i].result = run_ensemble(configs[i], spec.trajectories, options);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  }
  for (const SweepPoint& sp : results) {
    if (!sp.ok()) ++out.failed_points;
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    const GridPoint& pt = points[i];
    const SweepPoint& sp = results[config_of[i]];
    const SimConfig& c = sp.config;
    Table& t = out.table;
    t.add_row();
    set_point(t, sc, i, pt);
    t.set("representation", std::string(to_string(c.representation)));
    t.set("topology", std::string(to_string(c.topology.kind)));
    t.set("seed", std::to_string(c.seed));
    t.set("trajectories", static_cast<std::int64_t>(spec.trajectories));
    std::string error = sp.error;
    if (!sp.ok()) {
      t.set("error", error);
      continue;
    }
    t.set("aborted", static_cast<std::int64_t>(sp.result.aborted));
    t.set("samples", static_cast<std::int64_t>(sp.result.moments.count()));

    bool projected = false;
    Values measured(names.size(), kNaN);
    try {
      measured = measure(sp.result.moments, c, pt.r, &projected);
    } catch (const std::exception& e) {
      append_error(error, e.what());
    }
    std::vector<Values> per_batch;
    for (const MomentSet& b : sp.result.batches) {
      if (b.count() == 0) continue;
      try {
        per_batch.push_back(measure(b, c, pt.r));
      } catch (const std::exception&) {
        per_batch.push_back(Values(names.size(), kNaN));
      }
    }
    for (std::size_t q = 0; q < names.size(); ++q) {
      t.set(names[q], measured[q]);
      double se = kNaN;
      const auto nb = per_batch.size();
      if (nb >= 2) {
        double mean = 0.0;
        for (const auto& v : per_batch) mean += v[q];
        mean /= static_cast<double>(nb);
        double ss = 0.0;
        for (const auto& v : per_batch) ss += (v[q] - mean) * (v[q] - mean);
        se = std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
      }
      t.set(names[q] + "_se", se);
    }

    if (compare) {
      const Values expected = theory(c, pt.r, error);
      const double tol = spec.tolerance.at(pt.p);
      double worst = 0.0;
      bool comparable = true;
      for (std::size_t q = 0; q < names.size(); ++q) {
        t.set(names[q] + "_theory", expected[q]);
        t.set(names[q] + "_abs_dev", std::abs(measured[q] - expected[q]));
        const double rd = rel_dev(measured[q], expected[q]);
        t.set(names[q] + "_rel_dev", rd);
        if (std::find(compared.begin(), compared.end(), names[q]) != compared.end()) {
          if (std::isnan(rd)) {
            comparable = false;
          } else {
            worst = std::max(worst, rd);
          }
        }
      }
      t.set("tolerance", tol);
      if (comparable) {
        t.set("max_rel_dev", worst);
        const bool ok = worst <= tol;
        t.set("within_tolerance", static_cast<std::int64_t>(ok));
        if (!ok) ++out.out_of_tolerance;
      } else {
        append_error(error, "not compared: missing measured or closed-form value");
      }
    }
    t.set("projected", static_cast<std::int64_t>(projected));
    if (!error.empty()) t.set("error", error);
  }
  return out;
}

RunOutcome run_topology_oracle(const ExperimentSpec& spec) {
  const TopologyKind kind = spec.sim.topology.kind;
  const SiteColumns sc = site_columns(kind);
  const auto names = quantity_names(kind);
  const bool pair_like = kind != TopologyKind::Single;
  std::vector<std::string> cols = point_columns(sc);
  cols.push_back("regime");
  for (const auto& q : names) cols.push_back(q);
  if (pair_like) {
    for (const char* c : {"nu_plus", "nu_minus"}) cols.push_back(c);
  }
  if (kind == TopologyKind::Pair) {
    for (const char* c : {"duan_closed", "simon_closed"}) cols.push_back(c);
  }
  cols.push_back("error");
  RunOutcome out{Table(cols)};

  const auto points = spec.grid.expand();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GridPoint& pt = points[i];
    SimConfig c = point_config(spec, pt);
    Table& t = out.table;
    t.add_row();
    set_point(t, sc, i, pt);
    t.set("regime", regime_name(pt.p));
    std::string error;
    const Values v = theory(c, pt.r, error);
    for (std::size_t q = 0; q < names.size(); ++q) t.set(names[q], v[q]);
    if (pair_like && !std::isnan(v[0])) {
      try {
        const SymplecticPair nu = symplectic_eigenvalues(PairCovariance{v[0], v[1], v[2], v[3]});
        t.set("nu_plus", nu.nu_plus);
        t.set("nu_minus", nu.nu_minus);
      } catch (const std::exception& e) {
        append_error(error, e.what());
      }
    }
    if (kind == TopologyKind::Pair) {
      try {
        const PairCriteria crit = pair_criteria_analytic(pt.p, pt.j);
        t.set("duan_closed", crit.duan_closed);
        t.set("simon_closed", crit.simon_closed);
      } catch (const std::exception& e) {
        append_error(error, e.what());
      }
    }
    if (!error.empty()) t.set("error", error);
  }
  return out;
}

RunOutcome run_lattice(const ExperimentSpec& spec) {
  RunOutcome out(Table({"point", "p", "j", "N", "r", "k", "theta", "gamma_x", "gamma_p", "fm2", "fn2",
                        "extended_duan", "duan_finite", "duan_infinite", "m_minus", "m_plus", "psi", "error"}));
  const auto points = spec.grid.expand();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GridPoint& pt = points[i];
    Table& t = out.table;
    t.add_row();
    t.set("point", static_cast<std::int64_t>(i));
    t.set("p", pt.p);
    t.set("j", pt.j);
    t.set("N", static_cast<std::int64_t>(pt.n));
    t.set("r", static_cast<std::int64_t>(pt.r));
    t.set("k", static_cast<std::int64_t>(pt.k));
    const double theta = 2.0 * std::numbers::pi * pt.k / pt.n;
    t.set("theta", theta);
    std::string error;
    auto guarded = [&error](auto&& fn) {
      try {
        fn();
      } catch (const std::exception& e) {
        append_error(error, e.what());
      }
    };
    guarded([&] {
      const LossSpectrum ls = loss_spectrum(pt.p, pt.j, theta);
      t.set("gamma_x", ls.gamma_x);
      t.set("gamma_p", ls.gamma_p);
    });
    guarded([&] {
      const FourierMoments fm = fourier_moments_analytic(pt.p, pt.j, theta);
      t.set("fm2", fm.fm2);
      t.set("fn2", fm.fn2);
    });
    guarded([&] { t.set("extended_duan", extended_duan_analytic(pt.p, pt.j)); });
    guarded([&] { t.set("duan_finite", lattice_duan(pt.p, pt.j, pt.n, pt.r)); });
    guarded([&] {
      if (pt.r == 1) {
        t.set("duan_infinite", nn_duan_infinite(pt.p, pt.j));
      } else {
        t.set("duan_infinite", longrange_correlation(pt.p, pt.j, pt.r).duan_corrected);
      }
    });
    guarded([&] {
      const LatticeCorrelation lc = longrange_correlation(pt.p, pt.j, pt.r);
      t.set("m_minus", lc.m_minus);
      t.set("m_plus", lc.m_plus);
      t.set("psi", lc.psi);
    });
    if (!error.empty()) t.set("error", error);
  }
  return out;
}

RunOutcome run_meanfield(const ExperimentSpec& spec) {
  RunOutcome out(Table({"point", "p", "j", "b", "a0", "mean_amp", "iterations", "converged", "target_amp",
                        "var_x", "var_p", "error"}));
  Table history({"point", "p", "j", "iteration", "mean_amp"});
  const double b = spec.sim.b;
  const auto points = spec.grid.expand();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GridPoint& pt = points[i];
    Table& t = out.table;
    t.add_row();
    t.set("point", static_cast<std::int64_t>(i));
    t.set("p", pt.p);
    t.set("j", pt.j);
    t.set("b", b);
    t.set("a0", spec.a0);
    t.set("target_amp", pt.p > 1.0 ? std::sqrt((pt.p - 1.0) / b) : 0.0);
    try {
      const MeanFieldState st = self_consistent_loop(pt.p, pt.j, b, spec.a0, spec.loop);
      t.set("mean_amp", st.e_amp);
      t.set("iterations", static_cast<std::int64_t>(st.iteration));
      t.set("converged", static_cast<std::int64_t>(st.converged));
      const QuadratureVariances v = meanfield_variances(st);
      t.set("var_x", v.var_x);
      t.set("var_p", v.var_p);
      for (std::size_t it = 0; it < st.history.size(); ++it) {
        history.add_row();
        history.set("point", static_cast<std::int64_t>(i));
        history.set("p", pt.p);
        history.set("j", pt.j);
        history.set("iteration", static_cast<std::int64_t>(it));
        history.set("mean_amp", st.history[it]);
      }
    } catch (const std::exception& e) {
      t.set("error", std::string(e.what()));
      ++out.failed_points;
    }
  }
  out.history = std::move(history);
  return out;
}

void finish(RunOutcome& out) {
  if (out.failed_points > 0) {
    out.exit_code = kExitNumerical;
  } else if (out.out_of_tolerance > 0) {
    out.exit_code = kExitTolerance;
  } else {
    out.exit_code = kExitOk;
  }
}

}  // namespace

std::vector<std::string> default_compared(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Single:
    case TopologyKind::MeanFieldPair:
      return {"var_x", "var_p"};
    case TopologyKind::Pair:
      return {"var_x", "var_p", "duan", "simon"};
    case TopologyKind::Ring:
    case TopologyKind::TravelingRing:
      return {"extended_duan", "duan"};
  }
  return {};
}

RunOutcome run_oracle(const ExperimentSpec& spec) {
  validate(spec);
  RunOutcome out = spec.mode == Mode::Lattice     ? run_lattice(spec)
                   : spec.mode == Mode::MeanField ? run_meanfield(spec)
                                                  : run_topology_oracle(spec);
  finish(out);
  return out;
}

RunOutcome run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  RunOutcome out = [&] {
    switch (spec.mode) {
      case Mode::Simulate:
        return run_simulation(spec, false);
      case Mode::Compare:
        return run_simulation(spec, true);
      case Mode::Oracle:
        return run_topology_oracle(spec);
      case Mode::Lattice:
        return run_lattice(spec);
      case Mode::MeanField:
        return run_meanfield(spec);
    }
    return run_topology_oracle(spec);
  }();
  finish(out);
  return out;
}

}  // namespace dopo::cli
