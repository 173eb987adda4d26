#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dopo {

/// How second moments are reported: about zero (below threshold, where the
/// mean is known to vanish) or about the sample mean (above threshold).
enum class Centering { Zero, SampleMean };

/// Mergeable accumulator of first and second moments of site amplitudes.
/// Internally keeps sample means and centred comoment sums, so merging is
/// exact (Chan et al. pairwise update) and independent of order up to
/// rounding.
class MomentSet {
 public:
  using cplx = std::complex<double>;

  MomentSet() = default;
  MomentSet(int sites, Centering centering);

  /// Build from raw sums of shifted samples u = alpha - ref, v = alpha_dag - conj-ref:
  /// su = sum u, sv = sum v, suu = sum u u^T, svu = sum v u^T.
  static MomentSet from_shifted_sums(Centering centering, std::uint64_t count,
                                     const Eigen::VectorXcd& ref_alpha, const Eigen::VectorXcd& ref_dag,
                                     const Eigen::VectorXcd& su, const Eigen::VectorXcd& sv,
                                     const Eigen::MatrixXcd& suu, const Eigen::MatrixXcd& svu);

  void add(std::span<const cplx> alpha, std::span<const cplx> alpha_dag);
  void merge(const MomentSet& other);

  int sites() const { return static_cast<int>(mean_alpha_.size()); }
  std::uint64_t count() const { return count_; }
  Centering centering() const { return centering_; }
  bool empty() const { return count_ == 0; }

  cplx mean(int r) const { return mean_alpha_(r); }
  cplx mean_dag(int r) const { return mean_dag_(r); }

  /// <d alpha_r d alpha_s> and <d alpha_dag_r d alpha_s> under this set's centering.
  cplx m2(int r, int s) const;
  cplx n2(int r, int s) const;
  Eigen::MatrixXcd m2_matrix() const;
  Eigen::MatrixXcd n2_matrix() const;

  /// Fourier-mode moments <d a_k d a_{-k}> and <d a_k^dag d a_k> with
  /// d a_k = N^{-1/2} sum_r d alpha_r exp(-i theta_k r), theta_k = 2 pi k / N.
  /// These are exact linear images of the site matrices.
  cplx fm2(int k) const;
  cplx fn2(int k) const;

  const Eigen::MatrixXcd& comoment_aa() const { return c_aa_; }
  const Eigen::MatrixXcd& comoment_da() const { return c_da_; }

 private:
  Centering centering_ = Centering::Zero;
  std::uint64_t count_ = 0;
  Eigen::VectorXcd mean_alpha_;
  Eigen::VectorXcd mean_dag_;
  Eigen::MatrixXcd c_aa_;  // sum (a - mu)(a - mu)^T
  Eigen::MatrixXcd c_da_;  // sum (d - nu)(a - mu)^T
};

/// Symmetric-ordered quadrature moments between sites r and s, where
/// X = (a + a^dag)/sqrt(2), P = (a - a^dag)/(i sqrt(2)).
struct QuadratureMoments {
  double var_x_r, var_p_r, var_x_s, var_p_s;
  double cov_x, cov_p;  // <dX_r dX_s>, <dP_r dP_s>
};

QuadratureMoments quadrature_moments(const MomentSet& moments, int r, int s, double ordering_offset);

}  // namespace dopo
