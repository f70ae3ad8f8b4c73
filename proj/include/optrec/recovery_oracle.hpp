#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optrec/hardy_core.hpp"

/// Finite-dimensional optimal recovery in X = C^d: data y = L f, model set
/// K = {f : dist(f, V) <= epsilon}. Everything here is computed directly from
/// SVDs and least squares, independently of the closed forms elsewhere, so it
/// serves as a reference for them.
namespace optrec::oracle {

struct FiniteRecoveryInstance {
  std::size_t dim = 0;
  Eigen::MatrixXcd V_basis;  ///< d x n, orthonormal columns (n = 0 allowed)
  Eigen::MatrixXcd L_map;    ///< m x d, full row rank
  Eigen::VectorXcd y;        ///< length m
  double epsilon = 0.0;

  std::size_t n() const noexcept { return static_cast<std::size_t>(V_basis.cols()); }
  std::size_t m() const noexcept { return static_cast<std::size_t>(L_map.rows()); }
};

/// Orthonormalizes the columns of `V` (d x n, linearly independent) and checks
/// that L has full row rank m <= d.
FiniteRecoveryInstance make_instance(const Eigen::MatrixXcd& V, Eigen::MatrixXcd L, Eigen::VectorXcd y,
                                     double epsilon);

/// Orthonormal basis of ker(L), d x (d - m).
Eigen::MatrixXcd kernel_basis(const FiniteRecoveryInstance& inst);

struct FiniteMu {
  double value = 0.0;       ///< 0 for a trivial kernel; +inf when ker(L) meets V
  bool infinite = false;
  double sigma_min = 0.0;   ///< of (I - P_V) Nmat
  Eigen::VectorXcd worst;   ///< unit kernel vector attaining the sup (empty if ker(L) = {0})
};

/// mu = sup_{u in ker L} ||u|| / dist(u, V) = 1 / sigma_min((I - P_V) Nmat).
FiniteMu finite_mu(const FiniteRecoveryInstance& inst);

struct ConstrainedMin {
  Eigen::VectorXcd f_star;
  double distance = 0.0;         ///< ||f* - P_V f*||
  double data_residual = 0.0;    ///< ||L f* - y||
  double orth_V = 0.0;           ///< ||V^* (f* - P_V f*)||
  double orth_kernel = 0.0;      ///< ||Nmat^* (f* - P_V f*)||
};

/// argmin ||f - P_V f|| subject to L f = y; among minimizers the one closest
/// to the minimum-norm solution. Throws InconsistentDataError if y is not in
/// the range of L.
ConstrainedMin constrained_min_dist(const FiniteRecoveryInstance& inst);

/// mu sqrt(epsilon^2 - ||f* - P_V f*||^2). Throws EmptyFeasibleSetError when
/// epsilon is below the minimum distance.
double local_radius(const FiniteRecoveryInstance& inst);

struct ExtremalPair {
  Eigen::VectorXcd f_plus;
  Eigen::VectorXcd f_minus;
  Eigen::VectorXcd u;
};

/// f+- = f* +- u with u along the worst kernel direction, scaled so that
/// ||f* - P_V f*||^2 + ||u - P_V u||^2 = epsilon^2. Requires 0 < mu < inf.
ExtremalPair extremal_pair(const FiniteRecoveryInstance& inst);

struct MonteCarloReport {
  std::size_t samples = 0;
  double max_distance = 0.0;         ///< max ||f - f*|| over the samples
  double max_data_residual = 0.0;    ///< max ||L f - y||
  double max_model_excess = 0.0;     ///< max (dist(f, V) - epsilon), <= 0 when all lie in K
};

/// Samples f uniformly in K intersected with L^{-1}(y), as f* + Nmat x with x
/// the image of a uniform ball point under the inverse of the quadratic form.
/// With `include_extremal` the two extremal elements are added to the sample.
MonteCarloReport monte_carlo_sup(const FiniteRecoveryInstance& inst, std::size_t samples, std::uint64_t seed,
                                 bool include_extremal = true);

/// H2 truncated to C^N: V = span of the first n monomials, row k of L holds
/// (zeta_k^j)_{j < N}. Data y = 0.
FiniteRecoveryInstance truncated_h2_instance(const hardy::PointConfiguration& config, std::size_t n,
                                             std::size_t N, double epsilon = 1.0);

struct InstanceShape {
  std::size_t d = 0;
  std::size_t m = 0;
  std::size_t n = 0;
};

/// Seeded random instance. Unless given, m in [1, 8], d in [m + 1, 20] and
/// n in [0, min(4, m)]; y = L f0 for a random f0 (y = 0 with `zero_data`),
/// epsilon drawn above the feasible minimum unless `epsilon` is given.
FiniteRecoveryInstance random_instance(std::uint64_t seed, std::optional<InstanceShape> shape = std::nullopt,
                                       std::optional<double> epsilon = std::nullopt, bool zero_data = false);

struct OracleCheck {
  std::string name;
  bool passed = false;
  double worst = 0.0;      ///< worst residual over the instances
  double tolerance = 0.0;
  std::size_t cases = 0;
};

struct OracleSuiteConfig {
  std::uint64_t seed = 1;
  std::size_t instances = 100;
  std::size_t samples = 1000;
  std::optional<InstanceShape> shape;
  std::optional<double> epsilon;
  bool zero_data = false;
};

struct InstanceSummary {
  std::uint64_t seed = 0;
  InstanceShape shape;
  double epsilon = 0.0;
  double min_distance = 0.0;  ///< ||f* - P_V f*||
  double mu = 0.0;
  bool mu_infinite = false;
  double radius = 0.0;
};

struct OracleSuiteReport {
  std::vector<OracleCheck> checks;
  std::vector<InstanceSummary> instances;
  bool all_passed() const;
};

/// Runs attainment, Monte-Carlo sandwich, orthogonality, feasibility and
/// y = 0 radius checks on seeded random instances, plus fixed edge cases.
/// Throws EmptyFeasibleSetError (a given epsilon below an instance's minimum).
OracleSuiteReport run_oracle_suite(const OracleSuiteConfig& config);

}  // namespace optrec::oracle
