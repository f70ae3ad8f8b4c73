#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "optrec/errors.hpp"

/// Complex basis pursuit: minimize sum_k |a_k| subject to M a = b.
///
/// After the real embedding each a_k is a 2-vector and the objective is a
/// group norm with groups of size 2, i.e. a second-order cone program. The
/// dual is
///
///   maximize Re <b, lambda>  subject to  |(M^* lambda)_k| <= 1 for all k,
///
/// and weak duality gives sum_k |a_k| >= Re <b, lambda> for every feasible
/// pair, with <x, y> = sum_j x_j conj(y_j).
namespace optrec::cone {

struct ComplexL1Problem {
  Eigen::MatrixXcd M;  ///< n x m constraint map
  Eigen::VectorXcd b;  ///< length n
};

enum class SolveStatus { optimal, max_iter, infeasible };

std::string to_string(SolveStatus status);

struct SolverConfig {
  double tol_feas = 1e-9;
  double tol_gap = 1e-8;
  std::size_t max_iter = 50000;
  /// Initial penalty relative to m / ||M^+ b||_1; adapted by residual balancing.
  double rho_admm = 1.0;

  void validate() const;
};

struct L1Solution {
  Eigen::VectorXcd a;
  double objective = 0.0;
  Eigen::VectorXcd dual;  ///< lambda, scaled so that max_k |(M^* lambda)_k| <= 1
  double primal_residual = 0.0;
  double duality_gap = 0.0;
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
};

struct CertificateReport {
  double feasibility;      ///< ||M a - b||_2
  double gap;              ///< sum |a_k| - Re <b, lambda>
  double block_dual_norm;  ///< max_k |(M^* lambda)_k|
};

/// ADMM solver with the factorization of M cached, for repeated right-hand
/// sides against the same constraint map.
///
/// Iteration (over-relaxed, scaled form):
///   a <- argmin ||a - (z - u)|| s.t. M a = b
///   z <- block soft-threshold(alpha a + (1 - alpha) z + u, 1 / rho)
///   u <- u + alpha a + (1 - alpha) z_old - z
/// started from z = u = 0. rho u lies in the subdifferential of the group
/// norm at z, and its projection onto range(M^*) gives the dual estimate.
/// Once the support of z settles, a Newton polish on the KKT system of the
/// support tightens the certificate to the requested gap.
class L1Solver {
 public:
  explicit L1Solver(Eigen::MatrixXcd M, SolverConfig config = {});

  L1Solution solve(const Eigen::VectorXcd& b) const;

  const Eigen::MatrixXcd& M() const noexcept { return M_; }
  const SolverConfig& config() const noexcept { return config_; }
  /// Numerical rank of M at relative threshold 1e-10.
  Eigen::Index rank() const noexcept { return rank_; }

 private:
  Eigen::MatrixXcd M_;
  SolverConfig config_;
  Eigen::MatrixXcd pinv_;       // M^+, m x n
  Eigen::MatrixXcd projector_;  // I - M^+ M
  Eigen::Index rank_ = 0;
};

/// Throws PreconditionError on dimension mismatch; a rank-deficient M with an
/// unreachable b yields status infeasible.
L1Solution solve(const ComplexL1Problem& problem, const SolverConfig& config = {});

/// Recomputes the certificate quantities of `solution` from scratch. The gap
/// uses lambda rescaled to dual feasibility when needed.
CertificateReport check_certificate(const ComplexL1Problem& problem, const L1Solution& solution);

}  // namespace optrec::cone
