#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "optrec/cone_l1.hpp"
#include "optrec/hardy_core.hpp"

/// Optimal estimation of F(zeta_0) in the disc algebra from samples on the
/// torus. With V = P_n the optimal linear weights solve
///
///   minimize sum_k |a_k|  subject to  sum_k a_k zeta_k^{j-1} = zeta_0^{j-1},  j = 1..n,
///
/// and the compatibility indicator is 1 + sum_k |a_k|.
namespace optrec::da {

using hardy::cplx;

/// Points closer than this to zeta_0 count as coinciding with it.
inline constexpr double kNodeExclusion = 1e-12;

struct EstimationWeights {
  Eigen::VectorXcd a;
  double mu = 0.0;  ///< 1 + sum_k |a_k|
  cplx zeta0;
  hardy::PointConfiguration config;
  std::size_t n = 0;
  cone::L1Solution solution;
  /// Certificate of the program as solved, i.e. with the constraints written
  /// in a basis of P_n orthonormal on the nodes (same feasible set and dual
  /// bound as the monomial form).
  cone::CertificateReport certificate{};
  /// ||M a - b||_2 for the monomial constraints of build_estimation_problem.
  double monomial_residual = 0.0;
  /// The dual certificate as a polynomial p in P_n: its values at the nodes
  /// (|p(zeta_k)| <= 1) and at zeta_0. For feasible a,
  /// sum_k |a_k| >= |sum_k a_k p(zeta_k)| = |p(zeta_0)| >= Re p(zeta_0).
  Eigen::VectorXcd dual_at_nodes;
  cplx dual_at_zeta0;
};

/// M_{j,k} = zeta_k^{j-1}, b_j = zeta_0^{j-1}. Requires every zeta_k and
/// zeta_0 on the torus, zeta_0 distinct from the nodes and 1 <= n <= m.
cone::ComplexL1Problem build_estimation_problem(const hardy::PointConfiguration& config, cplx zeta0,
                                                std::size_t n);

/// Solves the weight program. The constraints are handed to the solver in a
/// basis of P_n orthonormal on the nodes, which leaves the feasible set
/// unchanged but avoids the conditioning of the monomial Vandermonde matrix.
/// The solver status is kept in `solution`; callers decide whether anything
/// short of optimal is fatal.
EstimationWeights optimal_weights(const hardy::PointConfiguration& config, cplx zeta0, std::size_t n,
                                  const cone::SolverConfig& solver = {});

/// sum_k a_k y_k.
cplx estimate(const EstimationWeights& weights, const Eigen::VectorXcd& y);

struct DaIndicator {
  double mu_sup = 0.0;
  cplx argmax_zeta0;
  std::size_t grid_size = 0;
  std::size_t evaluated = 0;  ///< grid points not excluded as nodes
  double max_gap = 0.0;       ///< largest certificate gap over the grid
};

/// max of mu over zeta_0 = exp(i 2 pi (g + 1/2) / grid_size), skipping grid
/// points that coincide with a node. A lower bound for the supremum over the
/// torus. Requires grid_size >= 8 m; throws SolverError naming zeta_0 if any
/// grid solve is not certified optimal. `threads` = 0 uses all cores.
DaIndicator identification_indicator_da(const hardy::PointConfiguration& config, std::size_t n,
                                        std::size_t grid_size, const cone::SolverConfig& solver = {},
                                        std::size_t threads = 0);

struct KappaRow {
  std::size_t n = 0;
  double mu_sup = 0.0;
  double kappa = 0.0;              ///< mu_sup - 2
  double reference = 0.0;          ///< ln(m / (m - n + 1))
  std::optional<double> ratio;     ///< kappa / reference, absent when reference = 0
  double max_gap = 0.0;
};

/// The indicator sweep over n for m equispaced torus points.
std::vector<KappaRow> kappa_shape_sweep(std::size_t m, const std::vector<std::size_t>& n_list,
                                        std::size_t grid_size, const cone::SolverConfig& solver = {},
                                        std::size_t threads = 0);

}  // namespace optrec::da
