#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "optrec/hardy_core.hpp"

/// Optimal identification of H2 transfer functions from point values inside
/// the disc, with the closed forms available for equispaced inner circles.
///
/// V = P_n with the monomial basis V_j(z) = z^{j-1}; observations are
/// l_k(F) = F(zeta_k) with representers L_k = E_{zeta_k}.
namespace optrec::h2 {

using hardy::cplx;

namespace detail {
struct WideGram;
struct WideRecovery;
}  // namespace detail

/// Reciprocal-condition floor of the kernel Gramian H. The Gramian stage runs
/// with 100 significant digits, so this leaves at least twelve of them.
inline constexpr double kRcondFloor = 1e-88;

/// Cross-Gramian G (m x n, G_kj = zeta_k^{j-1}) and kernel Gramian H
/// (m x m, H_kj = 1 / (1 - conj(zeta_j) zeta_k)), rounded to double. The
/// factorizations used by the other operations are held in extended precision.
class GramPair {
 public:
  const Eigen::MatrixXcd& G() const noexcept { return G_; }
  const Eigen::MatrixXcd& H() const noexcept { return H_; }
  const hardy::PointConfiguration& config() const noexcept { return config_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return config_.size(); }

  /// Estimate of lambda_min(H) / lambda_max(H); 0 when H is not numerically
  /// positive definite.
  double rcond() const noexcept;

  /// G^* H^{-1} G, formed from the Cholesky factor of H.
  Eigen::MatrixXcd normal_matrix() const;

  /// The pair for P_{n'} with n' <= n, reusing the factorization of H.
  GramPair leading(std::size_t n_prime) const;

  const detail::WideGram& wide() const { return *wide_; }

 private:
  friend GramPair build_gram_pair(const hardy::PointConfiguration& config, std::size_t n);

  Eigen::MatrixXcd G_;
  Eigen::MatrixXcd H_;
  hardy::PointConfiguration config_;
  std::size_t n_ = 0;
  std::shared_ptr<const detail::WideGram> wide_;
};

/// Throws PreconditionError unless 1 <= n <= m and every |zeta_k| < 1.
GramPair build_gram_pair(const hardy::PointConfiguration& config, std::size_t n);

/// mu = 1 / sqrt(lambda_min(G^* H^{-1} G)) >= 1, evaluated as the square root
/// of lambda_max of the inverse normal matrix so that large values keep full
/// relative accuracy. Throws IllConditionedError when rcond(H) < kRcondFloor.
double compatibility_indicator(const GramPair& gram);

/// mu for every n' = 1..gram.n(), sharing one factorization of H.
std::vector<double> compatibility_sweep(const GramPair& gram);

/// A^opt(y) = sum_j c_j V_j + sum_k d_k L_k.
class RecoveryElement {
 public:
  const Eigen::VectorXcd& c() const noexcept { return c_; }
  const Eigen::VectorXcd& d() const noexcept { return d_; }
  const GramPair& gram() const noexcept { return gram_; }

  /// Value at |z| < 1, accumulated in extended precision.
  cplx operator()(cplx z) const;

  /// Construct from explicit coefficients (c of length n, d of length m).
  static RecoveryElement from_coefficients(GramPair gram, Eigen::VectorXcd c, Eigen::VectorXcd d);

  const detail::WideRecovery& wide() const { return *wide_; }

 private:
  friend RecoveryElement optimal_identify(const GramPair& gram, const Eigen::VectorXcd& y);
  friend RecoveryElement optimal_identify(const GramPair& gram, const hardy::TaylorSeries& truth);

  Eigen::VectorXcd c_;
  Eigen::VectorXcd d_;
  GramPair gram_;
  std::shared_ptr<const detail::WideRecovery> wide_;
};

/// c = (G^* H^{-1} G)^{-1} G^* H^{-1} y, d = H^{-1} (y - G c).
RecoveryElement optimal_identify(const GramPair& gram, const Eigen::VectorXcd& y);

/// Same map applied to noise-free samples of a known truth, taken in extended
/// precision. Use this when the data would otherwise be rounded to double
/// before an ill-conditioned solve.
RecoveryElement optimal_identify(const GramPair& gram, const hardy::TaylorSeries& truth);

/// Data vector (F(zeta_1), ..., F(zeta_m)).
Eigen::VectorXcd observe(const hardy::PointConfiguration& config, const hardy::TaylorSeries& f);

/// ||F - A||_H2 from the coefficient identities, without quadrature:
/// ||A||^2 = ||c||^2 + <Hd, d> + 2 Re <Gc, d> and
/// <F, A> = <f_{0:n-1}, c> + sum_k conj(d_k) F(zeta_k).
double h2_error(const hardy::TaylorSeries& truth, const RecoveryElement& rec);

/// 1 / sqrt(1 - r^{2m}) for 0 <= r < 1.
double equispaced_mu_closed_form(double r, std::size_t m);

struct CirculantEig {
  Eigen::MatrixXcd U;       ///< normalized DFT matrix, column k = u^{(k)}
  Eigen::VectorXd values;   ///< m r^{2(k-1)} / (1 - r^{2m})
};

/// Eigendecomposition H = U diag(values) U^* of the equispaced Gramian.
CirculantEig equispaced_circulant_eig(double r, std::size_t m);

/// Polynomial interpolant at the m equispaced points of radius r:
/// coefficient l is sum_t f_{l + t m} r^{t m}.
hardy::TaylorSeries interpolate_equispaced(const hardy::TaylorSeries& f, double r, std::size_t m);

}  // namespace optrec::h2
