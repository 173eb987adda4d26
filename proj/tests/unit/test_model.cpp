#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dopo/engine.hpp"
#include "dopo/errors.hpp"
#include "dopo/lyapunov.hpp"
#include "dopo/model.hpp"
#include "support.hpp"

using namespace dopo;
using doctest::Approx;

namespace {

SimConfig make(Representation rep, Topology topo, double p = 0.0, double j = 0.0, double b = 1e-4) {
  SimConfig c;
  c.representation = rep;
  c.topology = topo;
  c.p_target = p;
  c.j = j;
  c.b = b;
  return c;
}

}  // namespace

TEST_CASE("vacuum is a drift fixed point") {
  for (double p : {0.0, 0.5, 1.0, 3.0}) {
    const SimConfig c = make(Representation::PositiveP, Topology::single(), p);
    const PhaseState d = drift(c, PhaseState::vacuum(c), p);
    CHECK(std::abs(d.alpha[0]) == 0.0);
    CHECK(std::abs(d.alpha_dag[0]) == 0.0);
  }
}

TEST_CASE("above-threshold amplitude is a drift fixed point") {
  const double p = 3.0, b = 1e-4;
  const SimConfig c = make(Representation::PositiveP, Topology::single(), p, 0.0, b);
  PhaseState s = PhaseState::vacuum(c);
  s.alpha[0] = s.alpha_dag[0] = std::sqrt((p - 1.0) / b);
  const PhaseState d = drift(c, s, p);
  CHECK(std::abs(d.alpha[0]) < 1e-9 * std::abs(s.alpha[0]));
  CHECK(std::abs(d.alpha_dag[0]) < 1e-9 * std::abs(s.alpha[0]));
}

TEST_CASE("aligned pair has no coupling loss") {
  const SimConfig coupled = make(Representation::PositiveP, Topology::pair(), 0.0, 7.0 / 3.0, 1e-12);
  const SimConfig free = make(Representation::PositiveP, Topology::pair(), 0.0, 0.0, 1e-12);
  PhaseState s = PhaseState::vacuum(coupled);
  s.alpha = {1.0, 1.0};
  s.alpha_dag = {1.0, 1.0};
  const PhaseState a = drift(coupled, s, 0.0), b = drift(free, s, 0.0);
  for (int r = 0; r < 2; ++r) CHECK(std::abs(a.alpha[r] - b.alpha[r]) < 1e-15);
}

TEST_CASE("pair coupling drift") {
  const SimConfig c = make(Representation::TruncWigner, Topology::pair(), 0.0, 2.0, 1e-12);
  PhaseState s = PhaseState::vacuum(c);
  s.alpha = {1.0, 0.0};
  const PhaseState d = drift(c, s, 0.0);
  CHECK(d.alpha[0].real() == Approx(-1.0 - 2.0));
  CHECK(d.alpha[1].real() == Approx(2.0));
}

TEST_CASE("noise examples") {
  SUBCASE("positive-P is silent without pump at the vacuum") {
    const SimConfig c = make(Representation::PositiveP, Topology::pair(), 0.0, 7.0 / 3.0);
    NoiseDraw w{testing::random_normals(c)};
    const PhaseState g = noise_amplitude(c, PhaseState::vacuum(c), 0.0, w);
    for (int r = 0; r < 2; ++r) {
      CHECK(std::abs(g.alpha[r]) == 0.0);
      CHECK(std::abs(g.alpha_dag[r]) == 0.0);
    }
  }
  SUBCASE("Wigner vacuum noise is half a quantum") {
    const SimConfig c = make(Representation::TruncWigner, Topology::single(), 0.8);
    const PhaseState g = noise_amplitude(c, PhaseState::vacuum(c), 0.8, NoiseDraw{{1.0, 0.0}});
    CHECK(g.alpha[0].real() == Approx(std::sqrt(0.5)));
    CHECK(g.alpha[0].imag() == 0.0);
  }
  SUBCASE("Husimi coefficients at p = 1") {
    const SimConfig c = make(Representation::TruncHusimi, Topology::single(), 1.0);
    const PhaseState vac = PhaseState::vacuum(c);
    CHECK(noise_amplitude(c, vac, 1.0, NoiseDraw{{1, 0, 0, 0}}).alpha[0].real() == Approx(std::sqrt(0.5)));
    const cplx pump = noise_amplitude(c, vac, 1.0, NoiseDraw{{0, 0, 1, 0}}).alpha[0];
    CHECK(pump.real() == 0.0);
    CHECK(pump.imag() == Approx(1.0));
    // the sqrt(B) alpha xi_R2 term vanishes at the vacuum
    CHECK(std::abs(noise_amplitude(c, vac, 1.0, NoiseDraw{{0, 0, 0, 1}}).alpha[0]) == 0.0);
  }
  SUBCASE("positive-P principal branch") {
    const SimConfig c = make(Representation::PositiveP, Topology::single(), 0.0, 0.0, 1.0);
    PhaseState s = PhaseState::vacuum(c);
    s.alpha[0] = 2.0;
    s.alpha_dag[0] = 0.0;
    const PhaseState g = noise_amplitude(c, s, 0.0, NoiseDraw{{1.0, 0.0}});
    // sqrt(0 - 4) = 2i
    CHECK(g.alpha[0].real() == Approx(0.0));
    CHECK(g.alpha[0].imag() == Approx(2.0));
  }
}

TEST_CASE("pair coupling noise is shared with opposite signs") {
  const SimConfig c = make(Representation::TruncWigner, Topology::pair(), 0.0, 2.0);
  NoiseDraw w{std::vector<double>(NoiseDraw::dimension(c), 0.0)};
  const std::size_t off = NoiseDraw::site_block(c);
  w.normals[off] = 1.0;
  const PhaseState g = noise_amplitude(c, PhaseState::vacuum(c), 0.0, w);
  CHECK(g.alpha[0].real() == Approx(std::sqrt(0.5 * 2.0)));
  CHECK(g.alpha[1].real() == Approx(-std::sqrt(0.5 * 2.0)));
}

TEST_CASE("Wigner and Husimi coupling noise differ by the factor A") {
  for (Topology t : {Topology::pair(), Topology::ring(6)}) {
    const SimConfig w = make(Representation::TruncWigner, t, 0.0, 1.7);
    const SimConfig h = make(Representation::TruncHusimi, t, 0.0, 1.7);
    const auto coupling = testing::random_normals(w);
    NoiseDraw dw{std::vector<double>(NoiseDraw::dimension(w), 0.0)};
    NoiseDraw dh{std::vector<double>(NoiseDraw::dimension(h), 0.0)};
    for (std::size_t i = NoiseDraw::site_block(w); i < coupling.size(); ++i) {
      dw.normals[i] = coupling[i];
      dh.normals[i - NoiseDraw::site_block(w) + NoiseDraw::site_block(h)] = coupling[i];
    }
    const PhaseState gw = noise_amplitude(w, PhaseState::vacuum(w), 0.0, dw);
    const PhaseState gh = noise_amplitude(h, PhaseState::vacuum(h), 0.0, dh);
    for (int r = 0; r < gw.sites(); ++r) {
      CHECK(std::abs(gh.alpha[r] - std::sqrt(2.0) * gw.alpha[r]) < 1e-14);
    }
    // drifts are identical
    PhaseState s = testing::random_state(w);
    const PhaseState fw = drift(w, s, 0.4), fh = drift(h, s, 0.4);
    for (int r = 0; r < s.sites(); ++r) CHECK(std::abs(fw.alpha[r] - fh.alpha[r]) == 0.0);
  }
}

TEST_CASE("noise draw dimensions") {
  CHECK(NoiseDraw::dimension(make(Representation::PositiveP, Topology::ring(8))) == 16);
  CHECK(NoiseDraw::dimension(make(Representation::TruncWigner, Topology::pair())) == 6);
  CHECK(NoiseDraw::dimension(make(Representation::TruncHusimi, Topology::pair())) == 10);
  CHECK(NoiseDraw::dimension(make(Representation::TruncWigner, Topology::ring(8))) == 32);
  CHECK(NoiseDraw::dimension(make(Representation::TruncWigner, Topology::traveling_ring(8))) == 48);
  CHECK(NoiseDraw::dimension(make(Representation::PositiveP, Topology::mean_field_pair(5))) == 20);
}

TEST_CASE("shape mismatches are configuration errors") {
  const SimConfig c = make(Representation::PositiveP, Topology::pair());
  PhaseState s = PhaseState::vacuum(c);
  s.alpha.resize(3);
  CHECK_THROWS_AS(drift(c, s, 0.0), ConfigError);
  NoiseDraw short_draw{{1.0}};
  CHECK_THROWS_AS(noise_amplitude(c, PhaseState::vacuum(c), 0.0, short_draw), ConfigError);
  PhaseState no_dag = PhaseState::vacuum(c);
  no_dag.alpha_dag.clear();
  CHECK_THROWS_AS(drift(c, no_dag, 0.0), ConfigError);
}

TEST_CASE("traveling coupling examples") {
  SimConfig c = make(Representation::TruncWigner, Topology::traveling_ring(2), 0.0, 1.0);
  PhaseState s = PhaseState::vacuum(c);
  s.alpha = {1.0, -1.0};
  NoiseDraw zero{std::vector<double>(NoiseDraw::dimension(c), 0.0)};
  CouplingIncrement inc = traveling_coupling(c, s, zero);
  CHECK(inc.drift[0].real() == Approx(-2.0));
  CHECK(inc.drift[1].real() == Approx(2.0));
  CHECK(std::abs(inc.noise[0]) == 0.0);

  c.topology = Topology::traveling_ring(5);
  PhaseState u = PhaseState::vacuum(c);
  for (auto& a : u.alpha) a = {0.3, -1.1};
  inc = traveling_coupling(c, u, NoiseDraw{std::vector<double>(NoiseDraw::dimension(c), 0.0)});
  for (const cplx& d : inc.drift) CHECK(std::abs(d) < 1e-15);

  SimConfig pp = make(Representation::PositiveP, Topology::ring(4), 0.0, 1.0);
  CHECK_THROWS_AS(traveling_coupling(pp, PhaseState::vacuum(pp), NoiseDraw{testing::random_normals(pp)}),
                  ConfigError);
}

TEST_CASE("traveling ring has the same stationary covariance as the ring") {
  for (int n : {2, 3, 4, 6}) {
    SimConfig ring = make(Representation::TruncWigner, Topology::ring(n), 0.5, 7.0 / 3.0);
    SimConfig trav = ring;
    trav.topology = Topology::traveling_ring(n);
    const LinearizedSystem a = linearize_about_vacuum(ring, 0.5);
    const LinearizedSystem b = linearize_about_vacuum(trav, 0.5);
    CHECK((a.diffusion - b.diffusion).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd sa = lyapunov_stationary(a.drift, a.diffusion);
    const Eigen::MatrixXd sb = lyapunov_stationary(b.drift, b.diffusion);
    CHECK((sa - sb).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("property: uniform states feel no coupling drift") {
  for (int trial = 0; trial < 50; ++trial) {
    for (SimConfig c : testing::all_topologies(0.0, testing::uniform(0.0, 5.0))) {
      c.b = 1e-12;
      SimConfig free = c;
      free.j = 0.0;
      PhaseState s = PhaseState::vacuum(c);
      const cplx u = testing::random_cplx();
      for (auto& a : s.alpha) a = u;
      for (auto& d : s.alpha_dag) d = std::conj(u);
      const PhaseState a = drift(c, s, 0.0), b = drift(free, s, 0.0);
      for (int r = 0; r < s.sites(); ++r) CHECK(std::abs(a.alpha[r] - b.alpha[r]) < 1e-12);
    }
  }
}

TEST_CASE("property: ring coupling matrix is symmetric negative semidefinite") {
  for (int n : {2, 3, 6, 9}) {
    const double j = testing::uniform(0.1, 4.0);
    const SimConfig c = make(Representation::TruncWigner, Topology::ring(n), 0.0, j, 1e-300);
    Eigen::MatrixXd k(n, n);
    for (int s = 0; s < n; ++s) {
      PhaseState e = PhaseState::vacuum(c);
      e.alpha[s] = 1.0;
      const PhaseState d = drift(c, e, 0.0);
      for (int r = 0; r < n; ++r) k(r, s) = d.alpha[r].real() + (r == s ? 1.0 : 0.0);
    }
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues();
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
      CHECK(ev(i) < 1e-12);
      if (std::abs(ev(i)) < 1e-12) ++zeros;
    }
    CHECK(zeros == 1);
  }
}

TEST_CASE("property: positive-P stays real for real data") {
  for (Topology t : {Topology::single(), Topology::pair(), Topology::ring(5)}) {
    SimConfig c = make(Representation::PositiveP, t, 0.8, 1.2);
    Stepper stepper(c);
    PhaseState s = PhaseState::vacuum(c);
    for (int i = 0; i < 2000; ++i) {
      stepper.step_with(s, 0.8, testing::random_normals(c));
    }
    for (int r = 0; r < s.sites(); ++r) {
      CHECK(s.alpha[r].imag() == 0.0);
      CHECK(s.alpha_dag[r].imag() == 0.0);
    }
  }
}

TEST_CASE("property: fused stepper equals the reference update") {
  for (int trial = 0; trial < 20; ++trial) {
    for (SimConfig c : testing::all_topologies(testing::uniform(0.0, 3.0), testing::uniform(0.0, 4.0))) {
      c.dt = 1e-3;
      const double p_now = testing::uniform(0.0, c.p_target + 0.1);
      PhaseState s = testing::random_state(c, 2.0);
      const auto xi = testing::random_normals(c);
      PhaseState fused = s, ref = s;
      Stepper(c).step_with(fused, p_now, xi);
      step_reference(c, ref, p_now, xi);
      CHECK(fused.step == ref.step);
      for (int r = 0; r < s.sites(); ++r) {
        CHECK(std::abs(fused.alpha[r] - ref.alpha[r]) < 1e-12);
        if (s.has_dag()) CHECK(std::abs(fused.alpha_dag[r] - ref.alpha_dag[r]) < 1e-12);
      }
    }
  }
}

TEST_CASE("mean-field coupling") {
  CHECK(meanfield_sde_coupling(0.7, 0.7, 2.0) == cplx{0.0, 0.0});
  CHECK(meanfield_sde_coupling(0.7, 0.0, 2.0) == cplx{-1.4, 0.0});
  // mean_other = own amplitude reproduces the exact pair coupling
  const SimConfig pair = make(Representation::PositiveP, Topology::pair(), 0.0, 1.5, 1e-300);
  PhaseState s = PhaseState::vacuum(pair);
  s.alpha = {0.4, 0.4};
  s.alpha_dag = {0.4, 0.4};
  CHECK(std::abs(drift(pair, s, 0.0).alpha[0] - (-0.4 + meanfield_sde_coupling(0.4, 0.4, 1.5))) < 1e-15);
}

TEST_CASE("mean-field pair drift uses the other DOPO's particle mean") {
  const SimConfig c = make(Representation::PositiveP, Topology::mean_field_pair(2), 0.0, 1.0, 1e-300);
  PhaseState s = PhaseState::vacuum(c);
  s.alpha = {1.0, 3.0, 0.0, 2.0};
  s.alpha_dag = s.alpha;
  const PhaseState d = drift(c, s, 0.0);
  // particle 0 of DOPO 1: -a - j a + j mean(DOPO 2) = -1 - 1 + 1
  CHECK(d.alpha[0].real() == Approx(-1.0));
  // particle 0 of DOPO 2: -0 - 0 + mean(DOPO 1) = 2
  CHECK(d.alpha[2].real() == Approx(2.0));
  CHECK(d.alpha_dag[3].real() == Approx(-2.0 - 2.0 + 2.0));
}
