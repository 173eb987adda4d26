#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dopo {

enum class Representation { PositiveP, TruncWigner, TruncHusimi };

enum class TopologyKind { Single, Pair, Ring, TravelingRing, MeanFieldPair };

/// Coupling topology. `size` is the ring site count N for Ring and
/// TravelingRing, the particle count Np per DOPO for MeanFieldPair, and
/// ignored otherwise.
struct Topology {
  TopologyKind kind = TopologyKind::Single;
  int size = 0;

  static Topology single() { return {TopologyKind::Single, 1}; }
  static Topology pair() { return {TopologyKind::Pair, 2}; }
  static Topology ring(int n) { return {TopologyKind::Ring, n}; }
  static Topology traveling_ring(int n) { return {TopologyKind::TravelingRing, n}; }
  static Topology mean_field_pair(int np) { return {TopologyKind::MeanFieldPair, np}; }

  /// Number of phase-space sites carried by a PhaseState.
  int site_count() const;
  bool is_ring() const {
    return kind == TopologyKind::Ring || kind == TopologyKind::TravelingRing;
  }

  friend bool operator==(const Topology&, const Topology&) = default;
};

/// Everything needed to integrate one parameter point. Times are in units of
/// 1/gamma_s; rates are normalized by gamma_s.
struct SimConfig {
  Representation representation = Representation::PositiveP;
  Topology topology = Topology::single();
  double p_target = 0.0;  // S / gamma_s
  double j = 0.0;         // J / gamma_s
  double b = 1e-4;        // B / gamma_s
  double dt = 1e-3;
  double t_ramp = 1e3;
  double t_total = 1e5;
  std::uint64_t seed = 0;
  /// Moments are accumulated every `sample_every` steps inside the averaging
  /// window.
  int sample_every = 1;

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;

  /// Non-fatal diagnostics (e.g. delay-line reflectance R_B = j*dt).
  std::vector<std::string> warnings() const;

  /// |alpha| bound above which a trajectory is aborted.
  double divergence_bound() const;

  std::uint64_t total_steps() const;
  std::uint64_t ramp_steps() const;
};

std::string_view to_string(Representation r);
std::string_view to_string(TopologyKind t);
Representation parse_representation(std::string_view s);
TopologyKind parse_topology_kind(std::string_view s);

/// Symmetric-ordering offset added to <|d alpha|^2>-type moments:
/// +1/2 positive-P (normal order), 0 Wigner, -1/2 Husimi (anti-normal).
double ordering_offset(Representation r);

/// Default time step per representation (1e-3, 5e-5, 2.5e-5).
double default_dt(Representation r);

/// Stable 64-bit fingerprint of the physical parameters of a config (not
/// including the seed). Used to key per-point seed derivation.
std::uint64_t fingerprint(const SimConfig& config);

}  // namespace dopo
