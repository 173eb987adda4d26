#include "dopo/moments.hpp"

#include <cmath>
#include <numbers>

#include "dopo/errors.hpp"

namespace dopo {

MomentSet::MomentSet(int sites, Centering centering)
    : centering_(centering),
      mean_alpha_(Eigen::VectorXcd::Zero(sites)),
      mean_dag_(Eigen::VectorXcd::Zero(sites)),
      c_aa_(Eigen::MatrixXcd::Zero(sites, sites)),
      c_da_(Eigen::MatrixXcd::Zero(sites, sites)) {}

MomentSet MomentSet::from_shifted_sums(Centering centering, std::uint64_t count,
                                       const Eigen::VectorXcd& ref_alpha, const Eigen::VectorXcd& ref_dag,
                                       const Eigen::VectorXcd& su, const Eigen::VectorXcd& sv,
                                       const Eigen::MatrixXcd& suu, const Eigen::MatrixXcd& svu) {
  MomentSet m(static_cast<int>(su.size()), centering);
  if (count == 0) return m;
  const double n = static_cast<double>(count);
  m.count_ = count;
  m.mean_alpha_ = ref_alpha + su / n;
  m.mean_dag_ = ref_dag + sv / n;
  m.c_aa_ = suu - su * su.transpose() / n;
  m.c_da_ = svu - sv * su.transpose() / n;
  return m;
}

void MomentSet::add(std::span<const cplx> alpha, std::span<const cplx> alpha_dag) {
  const int n = sites();
  if (static_cast<int>(alpha.size()) != n || static_cast<int>(alpha_dag.size()) != n) {
    throw ConfigError("sample size does not match MomentSet");
  }
  ++count_;
  const double w = static_cast<double>(count_ - 1) / static_cast<double>(count_);
  Eigen::VectorXcd da(n), dd(n);
  for (int r = 0; r < n; ++r) {
    da(r) = alpha[r] - mean_alpha_(r);
    dd(r) = alpha_dag[r] - mean_dag_(r);
  }
  c_aa_ += w * da * da.transpose();
  c_da_ += w * dd * da.transpose();
  mean_alpha_ += da / static_cast<double>(count_);
  mean_dag_ += dd / static_cast<double>(count_);
}

void MomentSet::merge(const MomentSet& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.sites() != sites()) throw ConfigError("cannot merge MomentSets of different size");
  if (other.centering_ != centering_) throw ConfigError("cannot merge MomentSets with different centering");
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Eigen::VectorXcd delta_a = other.mean_alpha_ - mean_alpha_;
  const Eigen::VectorXcd delta_d = other.mean_dag_ - mean_dag_;
  const double w = na * nb / n;
  c_aa_ += other.c_aa_ + w * delta_a * delta_a.transpose();
  c_da_ += other.c_da_ + w * delta_d * delta_a.transpose();
  mean_alpha_ += delta_a * (nb / n);
  mean_dag_ += delta_d * (nb / n);
  count_ += other.count_;
}

MomentSet::cplx MomentSet::m2(int r, int s) const {
  if (count_ == 0) return {};
  cplx v = c_aa_(r, s) / static_cast<double>(count_);
  if (centering_ == Centering::Zero) v += mean_alpha_(r) * mean_alpha_(s);
  return v;
}

MomentSet::cplx MomentSet::n2(int r, int s) const {
  if (count_ == 0) return {};
  cplx v = c_da_(r, s) / static_cast<double>(count_);
  if (centering_ == Centering::Zero) v += mean_dag_(r) * mean_alpha_(s);
  return v;
}

Eigen::MatrixXcd MomentSet::m2_matrix() const {
  if (count_ == 0) return Eigen::MatrixXcd::Zero(sites(), sites());
  Eigen::MatrixXcd m = c_aa_ / static_cast<double>(count_);
  if (centering_ == Centering::Zero) m += mean_alpha_ * mean_alpha_.transpose();
  return m;
}

Eigen::MatrixXcd MomentSet::n2_matrix() const {
  if (count_ == 0) return Eigen::MatrixXcd::Zero(sites(), sites());
  Eigen::MatrixXcd m = c_da_ / static_cast<double>(count_);
  if (centering_ == Centering::Zero) m += mean_dag_ * mean_alpha_.transpose();
  return m;
}

namespace {

Eigen::VectorXcd phase_vector(int n, int k, double sign) {
  Eigen::VectorXcd v(n);
  const double theta = 2.0 * std::numbers::pi * k / n;
  for (int r = 0; r < n; ++r) v(r) = std::polar(1.0, sign * theta * r);
  return v;
}

}  // namespace

MomentSet::cplx MomentSet::fm2(int k) const {
  const int n = sites();
  const Eigen::VectorXcd e = phase_vector(n, k, -1.0);
  return (e.transpose() * m2_matrix() * e.conjugate())(0, 0) / static_cast<double>(n);
}

MomentSet::cplx MomentSet::fn2(int k) const {
  const int n = sites();
  const Eigen::VectorXcd e = phase_vector(n, k, 1.0);
  return (e.transpose() * n2_matrix() * e.conjugate())(0, 0) / static_cast<double>(n);
}

QuadratureMoments quadrature_moments(const MomentSet& m, int r, int s, double offset) {
  if (r < 0 || s < 0 || r >= m.sites() || s >= m.sites()) {
    throw ConfigError("site index out of range for MomentSet");
  }
  QuadratureMoments q{};
  const double ns_r = m.n2(r, r).real() + offset;
  const double ns_s = m.n2(s, s).real() + offset;
  const double m2_r = m.m2(r, r).real();
  const double m2_s = m.m2(s, s).real();
  q.var_x_r = ns_r + m2_r;
  q.var_p_r = ns_r - m2_r;
  q.var_x_s = ns_s + m2_s;
  q.var_p_s = ns_s - m2_s;
  const double cross_m = 0.5 * (m.m2(r, s).real() + m.m2(s, r).real());
  const double cross_n = 0.5 * (m.n2(r, s).real() + m.n2(s, r).real());
  q.cov_x = cross_m + cross_n;
  q.cov_p = cross_n - cross_m;
  return q;
}

}  // namespace dopo
