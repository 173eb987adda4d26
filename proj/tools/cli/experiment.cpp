#include "experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dopo/errors.hpp"
#include "dopo/rng.hpp"

namespace dopo::cli {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Simulate:
      return "simulate";
    case Mode::Oracle:
      return "oracle";
    case Mode::Compare:
      return "compare";
    case Mode::MeanField:
      return "meanfield";
    case Mode::Lattice:
      return "lattice";
  }
  return "?";
}

std::size_t Grid::size() const {
  auto len = [](const auto& v) { return std::max<std::size_t>(v.size(), 1); };
  if (p.empty() || j.empty()) return 0;
  return p.size() * j.size() * len(n) * len(np) * len(r) * len(k);
}

std::vector<GridPoint> Grid::expand() const {
  std::vector<GridPoint> out;
  if (size() == 0) return out;
  const GridPoint def{};
  auto or_default = [](const std::vector<int>& v, int d) { return v.empty() ? std::vector<int>{d} : v; };
  const auto ns = or_default(n, def.n), nps = or_default(np, def.np);
  const auto rs = or_default(r, def.r), ks = or_default(k, def.k);
  out.reserve(size());
  for (double pv : p)
    for (double jv : j)
      for (int nv : ns)
        for (int npv : nps)
          for (int rv : rs)
            for (int kv : ks) out.push_back({pv, jv, nv, rv, npv, kv});
  return out;
}

double Tolerance::at(double p) const {
  return std::abs(p - 1.0) <= threshold_band ? threshold_relative : relative;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (node.IsDefined() && node.Mark().line >= 0) os << ":" << node.Mark().line + 1;
    os << ": " << field << ": " << msg;
    throw ConfigError(os.str());
  }

  void only_keys(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!map.IsMap()) fail(map, path, "expected a mapping");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, join(path, key), "unknown field");
    }
  }

  // Accepts plain numbers and simple fractions such as "7/3".
  double number(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a number");
    const std::string s = node.Scalar();
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      const double num = parse_double(node, field, s.substr(0, slash));
      const double den = parse_double(node, field, s.substr(slash + 1));
      if (den == 0.0) fail(node, field, "zero denominator");
      return num / den;
    }
    return parse_double(node, field, s);
  }

  std::int64_t integer(const YAML::Node& node, const std::string& field) const {
    const double v = number(node, field);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) fail(node, field, "expected an integer");
    return static_cast<std::int64_t>(v);
  }

  std::uint64_t unsigned_integer(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected an unsigned integer");
    const std::string& s = node.Scalar();
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(node, field, "expected an unsigned integer");
    return v;
  }

  std::string string(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a string");
    return node.Scalar();
  }

  bool boolean(const YAML::Node& node, const std::string& field) const {
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node, field, "expected true or false");
    }
  }

  // A scalar, a list, or {from, to, step}.
  std::vector<double> axis(const YAML::Node& node, const std::string& field) const {
    std::vector<double> out;
    if (node.IsScalar()) {
      out.push_back(number(node, field));
    } else if (node.IsSequence()) {
      for (std::size_t i = 0; i < node.size(); ++i) {
        out.push_back(number(node[i], field + "[" + std::to_string(i) + "]"));
      }
    } else if (node.IsMap()) {
      only_keys(node, field, {"from", "to", "step"});
      for (const char* key : {"from", "to", "step"}) {
        if (!node[key]) fail(node, field, std::string("range needs '") + key + "'");
      }
      const double from = number(node["from"], field + ".from");
      const double to = number(node["to"], field + ".to");
      const double step = number(node["step"], field + ".step");
      if (!(step > 0.0) || to < from) fail(node, field, "range needs step > 0 and to >= from");
      const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
      if (count > 1000000) fail(node, field, "range has too many points");
      for (long i = 0; i < count; ++i) {
        // Snap away accumulated binary noise (0.30000000000000004).
        const double v = from + static_cast<double>(i) * step;
        out.push_back(std::round(v * 1e12) / 1e12);
      }
    } else {
      fail(node, field, "expected a number, a list or a {from, to, step} range");
    }
    if (out.empty()) fail(node, field, "axis is empty");
    return out;
  }

  std::vector<int> int_axis(const YAML::Node& node, const std::string& field) const {
    std::vector<int> out;
    for (double v : axis(node, field)) {
      if (v != std::floor(v) || std::abs(v) > 1e9) fail(node, field, "expected integer values");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  double parse_double(const YAML::Node& node, const std::string& field, const std::string& s) const {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && last[-1] == ' ') --last;
    if (first < last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) fail(node, field, "expected a number, got '" + s + "'");
    return v;
  }

  std::string source_;
};

Mode parse_mode(const Reader& rd, const YAML::Node& node) {
  const std::string s = rd.string(node, "mode");
  if (s == "simulate") return Mode::Simulate;
  if (s == "oracle") return Mode::Oracle;
  if (s == "compare") return Mode::Compare;
  if (s == "meanfield") return Mode::MeanField;
  if (s == "lattice") return Mode::Lattice;
  rd.fail(node, "mode", "unknown mode '" + s + "' (simulate, oracle, compare, meanfield, lattice)");
}

void read_sim(const Reader& rd, const YAML::Node& node, ExperimentSpec& spec) {
  rd.only_keys(node, "sim",
               {"representation", "topology", "b", "dt", "t_ramp", "t_total", "seed", "sample_every",
                "trajectories", "batches", "threads"});
  SimConfig& c = spec.sim;
  try {
    if (node["representation"]) c.representation = parse_representation(rd.string(node["representation"], "sim.representation"));
  } catch (const ConfigError& e) {
    rd.fail(node["representation"], "sim.representation", e.what());
  }
  c.dt = default_dt(c.representation);
  if (node["topology"]) {
    try {
      c.topology.kind = parse_topology_kind(rd.string(node["topology"], "sim.topology"));
    } catch (const ConfigError& e) {
      rd.fail(node["topology"], "sim.topology", e.what());
    }
  }
  if (node["b"]) c.b = rd.number(node["b"], "sim.b");
  if (node["dt"]) c.dt = rd.number(node["dt"], "sim.dt");
  if (node["t_ramp"]) c.t_ramp = rd.number(node["t_ramp"], "sim.t_ramp");
  if (node["t_total"]) c.t_total = rd.number(node["t_total"], "sim.t_total");
  if (node["seed"]) c.seed = rd.unsigned_integer(node["seed"], "sim.seed");
  if (node["sample_every"]) c.sample_every = static_cast<int>(rd.integer(node["sample_every"], "sim.sample_every"));
  if (node["trajectories"]) spec.trajectories = static_cast<int>(rd.integer(node["trajectories"], "sim.trajectories"));
  if (node["batches"]) spec.batches = static_cast<int>(rd.integer(node["batches"], "sim.batches"));
  if (node["threads"]) spec.threads = static_cast<int>(rd.integer(node["threads"], "sim.threads"));
  if (spec.trajectories < 1) rd.fail(node["trajectories"], "sim.trajectories", "must be >= 1");
  if (spec.batches < 2) rd.fail(node["batches"], "sim.batches", "must be >= 2 for standard errors");
  if (spec.threads < 1) rd.fail(node["threads"], "sim.threads", "must be >= 1");
}

}  // namespace

ExperimentSpec parse_experiment_text(const std::string& text, const std::string& source) {
  Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source << ":" << e.mark.line + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  if (!root.IsMap()) rd.fail(root, "<root>", "expected a mapping");
  rd.only_keys(root, "", {"name", "mode", "sim", "grid", "tolerance", "meanfield", "output"});

  ExperimentSpec spec;
  spec.source = source;
  spec.sim.topology = Topology::pair();
  spec.sim.dt = default_dt(spec.sim.representation);
  spec.name = root["name"] ? rd.string(root["name"], "name")
                           : std::filesystem::path(source).stem().string();
  if (!root["mode"]) rd.fail(root, "mode", "missing");
  spec.mode = parse_mode(rd, root["mode"]);
  if (root["sim"]) read_sim(rd, root["sim"], spec);

  if (!root["grid"]) rd.fail(root, "grid", "missing");
  const YAML::Node g = root["grid"];
  rd.only_keys(g, "grid", {"p", "j", "N", "r", "Np", "k"});
  if (g["p"]) spec.grid.p = rd.axis(g["p"], "grid.p");
  if (g["j"]) spec.grid.j = rd.axis(g["j"], "grid.j");
  if (g["N"]) spec.grid.n = rd.int_axis(g["N"], "grid.N");
  if (g["r"]) spec.grid.r = rd.int_axis(g["r"], "grid.r");
  if (g["Np"]) spec.grid.np = rd.int_axis(g["Np"], "grid.Np");
  if (g["k"]) spec.grid.k = rd.int_axis(g["k"], "grid.k");
  if (!g["p"]) rd.fail(g, "grid.p", "missing");
  if (!g["j"]) rd.fail(g, "grid.j", "missing");

  if (const YAML::Node t = root["tolerance"]) {
    rd.only_keys(t, "tolerance", {"relative", "threshold_band", "threshold_relative", "quantities"});
    if (t["relative"]) spec.tolerance.relative = rd.number(t["relative"], "tolerance.relative");
    if (t["threshold_band"]) spec.tolerance.threshold_band = rd.number(t["threshold_band"], "tolerance.threshold_band");
    if (t["threshold_relative"]) {
      spec.tolerance.threshold_relative = rd.number(t["threshold_relative"], "tolerance.threshold_relative");
    }
    if (const YAML::Node q = t["quantities"]) {
      if (!q.IsSequence()) rd.fail(q, "tolerance.quantities", "expected a list");
      for (std::size_t i = 0; i < q.size(); ++i) {
        spec.tolerance.quantities.push_back(rd.string(q[i], "tolerance.quantities"));
      }
    }
  }

  if (const YAML::Node m = root["meanfield"]) {
    rd.only_keys(m, "meanfield", {"a0", "max_iter", "tolerance", "mixing"});
    if (m["a0"]) spec.a0 = rd.number(m["a0"], "meanfield.a0");
    if (m["max_iter"]) spec.loop.max_iter = static_cast<int>(rd.integer(m["max_iter"], "meanfield.max_iter"));
    if (m["tolerance"]) spec.loop.tolerance = rd.number(m["tolerance"], "meanfield.tolerance");
    if (m["mixing"]) spec.loop.mixing = rd.number(m["mixing"], "meanfield.mixing");
  }

  if (const YAML::Node o = root["output"]) {
    rd.only_keys(o, "output", {"path", "format"});
    if (o["path"]) spec.output_path = rd.string(o["path"], "output.path");
    if (o["format"]) {
      try {
        spec.format = parse_format(rd.string(o["format"], "output.format"));
      } catch (const ConfigError& e) {
        rd.fail(o["format"], "output.format", e.what());
      }
    }
  }
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_text(ss.str(), path);
}

namespace {

void require(bool ok, const ExperimentSpec& spec, const std::string& msg) {
  if (!ok) throw ConfigError(spec.source + ": " + msg);
}

bool uses_simulation(Mode m) { return m == Mode::Simulate || m == Mode::Compare; }

}  // namespace

void validate(const ExperimentSpec& spec) {
  const Grid& g = spec.grid;
  require(g.size() > 0, spec, "grid is empty");
  const TopologyKind kind = spec.sim.topology.kind;
  const bool ring = kind == TopologyKind::Ring || kind == TopologyKind::TravelingRing;
  const bool lattice = spec.mode == Mode::Lattice;

  if (!g.n.empty()) require(lattice || ring, spec, "grid.N applies to ring topologies and lattice mode only");
  if (!g.r.empty()) require(lattice || ring, spec, "grid.r applies to ring topologies and lattice mode only");
  if (!g.k.empty()) require(lattice, spec, "grid.k applies to lattice mode only");
  if (!g.np.empty()) {
    require(kind == TopologyKind::MeanFieldPair && spec.mode != Mode::MeanField && !lattice, spec,
            "grid.Np applies to the mean_field_pair topology only");
  }
  if (spec.mode == Mode::MeanField) {
    require(g.n.empty() && g.r.empty() && g.k.empty() && g.np.empty(), spec, "meanfield mode uses the p and j axes only");
    require(spec.loop.max_iter >= 1, spec, "meanfield.max_iter must be >= 1");
    require(spec.loop.mixing > 0.0 && spec.loop.mixing <= 1.0, spec, "meanfield.mixing must be in (0, 1]");
  }
  for (double p : g.p) require(std::isfinite(p) && p >= 0.0, spec, "grid.p values must be >= 0");
  for (double j : g.j) require(std::isfinite(j) && j >= 0.0, spec, "grid.j values must be >= 0");
  for (int n : g.n) require(n >= 2, spec, "grid.N values must be >= 2");
  for (int np : g.np) require(np >= 1, spec, "grid.Np values must be >= 1");
  for (int r : g.r) require(r >= 1, spec, "grid.r values must be >= 1");
  if (lattice) {
    for (int n : g.n.empty() ? std::vector<int>{GridPoint{}.n} : g.n) {
      for (int r : g.r) require(r < n, spec, "grid.r must be smaller than N");
      for (int k : g.k) require(k >= 0 && k < n, spec, "grid.k must lie in [0, N)");
    }
  }
  if (ring) {
    require(!g.n.empty(), spec, "ring topologies need grid.N");
    for (int n : g.n) {
      for (int r : g.r) require(r < n, spec, "grid.r must be smaller than N");
    }
  }
  if (kind == TopologyKind::MeanFieldPair) require(!g.np.empty(), spec, "mean_field_pair needs grid.Np");
  require(spec.tolerance.relative > 0.0 && spec.tolerance.threshold_relative > 0.0, spec,
          "tolerances must be > 0");

  if (uses_simulation(spec.mode)) {
    for (const GridPoint& pt : g.expand()) {
      try {
        point_config(spec, pt).validate();
      } catch (const ConfigError& e) {
        throw ConfigError(spec.source + ": grid point p=" + std::to_string(pt.p) + ": " + e.what());
      }
    }
  }
}

SimConfig point_config(const ExperimentSpec& spec, const GridPoint& point) {
  SimConfig c = spec.sim;
  c.p_target = point.p;
  c.j = point.j;
  switch (c.topology.kind) {
    case TopologyKind::Single:
      c.topology = Topology::single();
      break;
    case TopologyKind::Pair:
      c.topology = Topology::pair();
      break;
    case TopologyKind::Ring:
      c.topology = Topology::ring(point.n);
      break;
    case TopologyKind::TravelingRing:
      c.topology = Topology::traveling_ring(point.n);
      break;
    case TopologyKind::MeanFieldPair:
      c.topology = Topology::mean_field_pair(point.np);
      break;
  }
  c.seed = derive_point_seed(spec.sim.seed, fingerprint(c));
  return c;
}

}  // namespace dopo::cli
