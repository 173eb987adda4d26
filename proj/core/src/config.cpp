#include "dopo/config.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "dopo/errors.hpp"
#include "dopo/rng.hpp"

namespace dopo {

int Topology::site_count() const {
  switch (kind) {
    case TopologyKind::Single:
      return 1;
    case TopologyKind::Pair:
      return 2;
    case TopologyKind::Ring:
    case TopologyKind::TravelingRing:
      return size;
    case TopologyKind::MeanFieldPair:
      return 2 * size;
  }
  return 0;
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void SimConfig::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(std::isfinite(t_ramp) && t_ramp > 0.0, "t_ramp must be > 0");
  require(std::isfinite(t_total) && t_ramp <= t_total, "t_ramp must not exceed t_total");
  require(std::isfinite(b) && b > 0.0, "b must be > 0");
  require(std::isfinite(j) && j >= 0.0, "j must be >= 0");
  require(std::isfinite(p_target) && p_target >= 0.0, "p_target must be >= 0");
  require(sample_every >= 1, "sample_every must be >= 1");
  switch (topology.kind) {
    case TopologyKind::Ring:
    case TopologyKind::TravelingRing:
      require(topology.size >= 2, "ring topologies require N >= 2");
      break;
    case TopologyKind::MeanFieldPair:
      require(topology.size >= 1, "mean-field pair requires Np >= 1");
      require(representation == Representation::PositiveP,
              "mean-field pair is defined for the positive-P representation only");
      break;
    default:
      break;
  }
  if (topology.kind == TopologyKind::TravelingRing) {
    require(representation == Representation::TruncWigner,
            "traveling ring is defined for the truncated-Wigner representation only");
  }
}

std::vector<std::string> SimConfig::warnings() const {
  std::vector<std::string> out;
  if (topology.kind == TopologyKind::TravelingRing) {
    const double rb = j * dt;
    if (rb > 0.05) {
      std::ostringstream os;
      os << "delay-line reflectance R_B = j*dt = " << rb << " exceeds 0.05";
      out.push_back(os.str());
    }
  }
  if (representation != Representation::PositiveP && b > 0.01) {
    out.push_back("truncated representations assume b << 1");
  }
  if (t_total < 10.0 * t_ramp) {
    out.push_back("averaging window is short compared to the ramp");
  }
  return out;
}

double SimConfig::divergence_bound() const {
  // Floor p at 1 so that vacuum noise at p = 0 is not flagged.
  return 10.0 * std::sqrt(std::max(p_target, 1.0) / b);
}

std::uint64_t SimConfig::total_steps() const {
  return static_cast<std::uint64_t>(std::llround(t_total / dt));
}

std::uint64_t SimConfig::ramp_steps() const {
  return static_cast<std::uint64_t>(std::llround(t_ramp / dt));
}

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::PositiveP:
      return "positive_p";
    case Representation::TruncWigner:
      return "wigner";
    case Representation::TruncHusimi:
      return "husimi";
  }
  return "?";
}

std::string_view to_string(TopologyKind t) {
  switch (t) {
    case TopologyKind::Single:
      return "single";
    case TopologyKind::Pair:
      return "pair";
    case TopologyKind::Ring:
      return "ring";
    case TopologyKind::TravelingRing:
      return "traveling_ring";
    case TopologyKind::MeanFieldPair:
      return "mean_field_pair";
  }
  return "?";
}

Representation parse_representation(std::string_view s) {
  if (s == "positive_p" || s == "positiveP" || s == "positive-p") return Representation::PositiveP;
  if (s == "wigner" || s == "truncated_wigner") return Representation::TruncWigner;
  if (s == "husimi" || s == "truncated_husimi") return Representation::TruncHusimi;
  throw ConfigError("unknown representation '" + std::string(s) + "'");
}

TopologyKind parse_topology_kind(std::string_view s) {
  if (s == "single") return TopologyKind::Single;
  if (s == "pair") return TopologyKind::Pair;
  if (s == "ring") return TopologyKind::Ring;
  if (s == "traveling_ring") return TopologyKind::TravelingRing;
  if (s == "mean_field_pair") return TopologyKind::MeanFieldPair;
  throw ConfigError("unknown topology '" + std::string(s) + "'");
}

double ordering_offset(Representation r) {
  switch (r) {
    case Representation::PositiveP:
      return 0.5;
    case Representation::TruncWigner:
      return 0.0;
    case Representation::TruncHusimi:
      return -0.5;
  }
  return 0.0;
}

double default_dt(Representation r) {
  switch (r) {
    case Representation::PositiveP:
      return 1e-3;
    case Representation::TruncWigner:
      return 5e-5;
    case Representation::TruncHusimi:
      return 2.5e-5;
  }
  return 1e-3;
}

std::uint64_t fingerprint(const SimConfig& c) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  auto absorb = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
  absorb(static_cast<std::uint64_t>(c.representation));
  absorb(static_cast<std::uint64_t>(c.topology.kind));
  absorb(static_cast<std::uint64_t>(c.topology.size));
  for (double v : {c.p_target, c.j, c.b, c.dt, c.t_ramp, c.t_total}) {
    absorb(std::bit_cast<std::uint64_t>(v));
  }
  absorb(static_cast<std::uint64_t>(c.sample_every));
  return h;
}

}  // namespace dopo
