#pragma once

#include <complex>
#include <random>
#include <vector>

#include "dopo/config.hpp"
#include "dopo/gaussian.hpp"
#include "dopo/model.hpp"

namespace testing {

// Fixed-seed generators for the property tests.
inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(0x5eedULL);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
inline double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng()); }

inline dopo::cplx random_cplx(double scale = 1.0) { return {scale * normal(), scale * normal()}; }

inline dopo::PhaseState random_state(const dopo::SimConfig& c, double scale = 1.0) {
  dopo::PhaseState s = dopo::PhaseState::vacuum(c);
  for (auto& a : s.alpha) a = random_cplx(scale);
  for (auto& d : s.alpha_dag) d = random_cplx(scale);
  return s;
}

inline std::vector<double> random_normals(const dopo::SimConfig& c) {
  std::vector<double> v(dopo::NoiseDraw::dimension(c));
  for (auto& x : v) x = normal();
  return v;
}

// Every valid representation/topology combination at small size.
inline std::vector<dopo::SimConfig> all_topologies(double p = 0.7, double j = 1.3) {
  using namespace dopo;
  std::vector<SimConfig> out;
  for (auto rep : {Representation::PositiveP, Representation::TruncWigner, Representation::TruncHusimi}) {
    for (Topology t : {Topology::single(), Topology::pair(), Topology::ring(5), Topology::ring(6)}) {
      SimConfig c;
      c.representation = rep;
      c.topology = t;
      c.p_target = p;
      c.j = j;
      c.b = 1e-2;
      out.push_back(c);
    }
  }
  SimConfig tr;
  tr.representation = Representation::TruncWigner;
  tr.topology = Topology::traveling_ring(4);
  tr.p_target = p;
  tr.j = j;
  out.push_back(tr);
  SimConfig mf;
  mf.topology = Topology::mean_field_pair(3);
  mf.p_target = p;
  mf.j = j;
  out.push_back(mf);
  return out;
}

// Physical pair covariance: random symmetric-mode squeezing on top of
// thermal noise, so nu_minus >= 1 by construction.
inline dopo::PairCovariance random_physical_cov() {
  const double t1 = uniform(1.0, 3.0), t2 = uniform(1.0, 3.0);
  const double s1 = std::exp(uniform(-1.5, 1.5)), s2 = std::exp(uniform(-1.5, 1.5));
  // sum mode (X+, P+) and difference mode (X-, P-) variances
  const double xp = t1 * s1, pp = t1 / s1, xm = t2 * s2, pm = t2 / s2;
  return {(xp + xm) / 2, (pp + pm) / 2, (xp - xm) / 2, (pp - pm) / 2};
}

}  // namespace testing
