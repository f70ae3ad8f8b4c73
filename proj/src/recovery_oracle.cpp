#include "optrec/recovery_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "optrec/random.hpp"

namespace optrec::oracle {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cplx = std::complex<double>;

constexpr double kRankTolerance = 1e-10;
constexpr double kInfiniteMuSigma = 1e-12;

void require(bool condition, const std::string& what) {
  if (!condition) throw PreconditionError(what);
}

// (I - P_V) x for orthonormal V
VectorXcd residual_from_V(const MatrixXcd& V, const VectorXcd& x) {
  if (V.cols() == 0) return x;
  return x - V * (V.adjoint() * x);
}

MatrixXcd residual_from_V(const MatrixXcd& V, const MatrixXcd& X) {
  if (V.cols() == 0) return X;
  return X - V * (V.adjoint() * X);
}

double dist_to_V(const MatrixXcd& V, const VectorXcd& x) { return residual_from_V(V, x).norm(); }

// slack = epsilon^2 - ||f* - P_V f*||^2
double budget(const FiniteRecoveryInstance& inst, double distance) {
  const double eps = inst.epsilon;
  if (eps < distance && distance - eps > 1e-12 * std::max(1.0, distance)) {
    std::ostringstream os;
    os.precision(17);
    os << "epsilon = " << eps << " is below the minimum model distance " << distance
       << " of the data-consistent set";
    throw EmptyFeasibleSetError(os.str());
  }
  return std::max(0.0, eps * eps - distance * distance);
}

struct KernelSvd {
  MatrixXcd N;       // orthonormal kernel basis
  MatrixXcd A;       // (I - P_V) N
  Eigen::JacobiSVD<MatrixXcd> svd;
};

KernelSvd kernel_svd(const FiniteRecoveryInstance& inst) {
  KernelSvd k;
  k.N = kernel_basis(inst);
  if (k.N.cols() > 0) {
    k.A = residual_from_V(inst.V_basis, k.N);
    k.svd.compute(k.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  }
  return k;
}

// uniform point in the complex unit ball of C^k
VectorXcd uniform_ball(Rng& rng, Index k) {
  VectorXcd g(k);
  for (Index i = 0; i < k; ++i) g[i] = rng.complex_normal();
  const double norm = g.norm();
  const double radius = std::pow(rng.uniform(), 1.0 / (2.0 * static_cast<double>(k)));
  return norm > 0 ? VectorXcd(g * (radius / norm)) : VectorXcd::Zero(k);
}

MatrixXcd random_matrix(Rng& rng, Index rows, Index cols) {
  MatrixXcd out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = rng.complex_normal();
  return out;
}

}  // namespace

FiniteRecoveryInstance make_instance(const MatrixXcd& V, MatrixXcd L, VectorXcd y, double epsilon) {
  const Index d = L.cols();
  require(d >= 1, "ambient dimension d >= 1");
  require(L.rows() >= 1 && L.rows() <= d, "observation map must have 1 <= m <= d rows");
  require(V.rows() == d, "model basis must have d rows");
  require(V.cols() <= d, "model dimension n <= d");
  require(y.size() == L.rows(), "data length must equal m");
  require(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon >= 0");
  require(L.allFinite() && V.allFinite() && y.allFinite(), "instance entries must be finite");

  Eigen::JacobiSVD<MatrixXcd> svd_l(L);
  const Eigen::VectorXd sl = svd_l.singularValues();
  require(sl.minCoeff() > kRankTolerance * sl.maxCoeff(), "observation map must have full row rank");

  FiniteRecoveryInstance inst;
  inst.dim = static_cast<std::size_t>(d);
  if (V.cols() > 0) {
    Eigen::JacobiSVD<MatrixXcd> svd_v(V);
    const Eigen::VectorXd sv = svd_v.singularValues();
    require(sv.minCoeff() > kRankTolerance * sv.maxCoeff(), "model basis must be linearly independent");
    Eigen::HouseholderQR<MatrixXcd> qr(V);
    inst.V_basis = qr.householderQ() * MatrixXcd::Identity(d, V.cols());
  } else {
    inst.V_basis = MatrixXcd(d, 0);
  }
  inst.L_map = std::move(L);
  inst.y = std::move(y);
  inst.epsilon = epsilon;
  return inst;
}

MatrixXcd kernel_basis(const FiniteRecoveryInstance& inst) {
  const Index d = inst.L_map.cols();
  const Index m = inst.L_map.rows();
  Eigen::JacobiSVD<MatrixXcd> svd(inst.L_map, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(d - m);
}

FiniteMu finite_mu(const FiniteRecoveryInstance& inst) {
  const KernelSvd k = kernel_svd(inst);
  FiniteMu out;
  if (k.N.cols() == 0) return out;  // empty sup
  const Eigen::VectorXd s = k.svd.singularValues();
  const Index last = s.size() - 1;
  out.sigma_min = s[last];
  out.worst = k.N * k.svd.matrixV().col(last);
  if (out.sigma_min <= kInfiniteMuSigma) {
    out.infinite = true;
    out.value = std::numeric_limits<double>::infinity();
  } else {
    out.value = 1.0 / out.sigma_min;
  }
  return out;
}

ConstrainedMin constrained_min_dist(const FiniteRecoveryInstance& inst) {
  Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod_l(inst.L_map);
  const VectorXcd f0 = cod_l.solve(inst.y);  // minimum norm
  const double fit = (inst.L_map * f0 - inst.y).norm();
  if (fit > 1e-9 * (1.0 + inst.y.norm())) {
    throw InconsistentDataError("data y is not in the range of the observation map");
  }

  const KernelSvd k = kernel_svd(inst);
  ConstrainedMin out;
  out.f_star = f0;
  if (k.N.cols() > 0) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod_a(k.A);
    cod_a.setThreshold(kRankTolerance);
    const VectorXcd x = cod_a.solve(VectorXcd(-residual_from_V(inst.V_basis, f0)));
    out.f_star += k.N * x;
  }
  const VectorXcd r = residual_from_V(inst.V_basis, out.f_star);
  out.distance = r.norm();
  out.data_residual = (inst.L_map * out.f_star - inst.y).norm();
  out.orth_V = inst.V_basis.cols() > 0 ? (inst.V_basis.adjoint() * r).norm() : 0.0;
  out.orth_kernel = k.N.cols() > 0 ? (k.N.adjoint() * r).norm() : 0.0;
  return out;
}

double local_radius(const FiniteRecoveryInstance& inst) {
  const ConstrainedMin cm = constrained_min_dist(inst);
  const double slack = budget(inst, cm.distance);
  const FiniteMu mu = finite_mu(inst);
  if (slack == 0.0 || mu.value == 0.0) return 0.0;
  return mu.infinite ? std::numeric_limits<double>::infinity() : mu.value * std::sqrt(slack);
}

ExtremalPair extremal_pair(const FiniteRecoveryInstance& inst) {
  const ConstrainedMin cm = constrained_min_dist(inst);
  const double slack = budget(inst, cm.distance);
  const FiniteMu mu = finite_mu(inst);
  require(mu.value > 0.0 && !mu.infinite, "extremal pair needs 0 < mu < infinity");
  ExtremalPair pair;
  pair.u = mu.worst * (std::sqrt(slack) / mu.sigma_min);
  pair.f_plus = cm.f_star + pair.u;
  pair.f_minus = cm.f_star - pair.u;
  return pair;
}

MonteCarloReport monte_carlo_sup(const FiniteRecoveryInstance& inst, std::size_t samples, std::uint64_t seed,
                                 bool include_extremal) {
  const ConstrainedMin cm = constrained_min_dist(inst);
  const double slack = budget(inst, cm.distance);
  const KernelSvd k = kernel_svd(inst);
  MonteCarloReport report;

  auto record = [&](const VectorXcd& f) {
    ++report.samples;
    report.max_distance = std::max(report.max_distance, (f - cm.f_star).norm());
    report.max_data_residual = std::max(report.max_data_residual, (inst.L_map * f - inst.y).norm());
    const double excess = dist_to_V(inst.V_basis, f) - inst.epsilon;
    report.max_model_excess = report.samples == 1 ? excess : std::max(report.max_model_excess, excess);
  };

  if (k.N.cols() == 0) {
    // kernel is trivial: the data-consistent set is the single point f*
    for (std::size_t s = 0; s < samples; ++s) record(cm.f_star);
    return report;
  }

  const Eigen::VectorXd sigma = k.svd.singularValues();
  require(sigma.minCoeff() > kInfiniteMuSigma, "model set slice is unbounded (ker L meets V)");
  // x with ||A x||^2 <= slack, A = W S Z^*: x = Z S^{-1} w with |w| <= sqrt(slack)
  const MatrixXcd map = k.svd.matrixV() * sigma.cwiseInverse().asDiagonal();
  const double scale = std::sqrt(slack);
  Rng rng(seed, 2);
  for (std::size_t s = 0; s < samples; ++s) {
    const VectorXcd w = uniform_ball(rng, sigma.size()) * scale;
    record(cm.f_star + k.N * (map * w));
  }
  if (include_extremal) {
    const ExtremalPair pair = extremal_pair(inst);
    record(pair.f_plus);
    record(pair.f_minus);
  }
  return report;
}

FiniteRecoveryInstance truncated_h2_instance(const hardy::PointConfiguration& config, std::size_t n,
                                             std::size_t N, double epsilon) {
  const std::size_t m = config.size();
  require(n <= m, "model dimension n <= m");
  require(N >= m && N >= 1, "truncation order N >= m");
  MatrixXcd L(static_cast<Index>(m), static_cast<Index>(N));
  for (std::size_t k = 0; k < m; ++k) L.row(static_cast<Index>(k)) = hardy::monomial_row(config.points[static_cast<Index>(k)], N);
  const MatrixXcd V = MatrixXcd::Identity(static_cast<Index>(N), static_cast<Index>(n));
  return make_instance(V, std::move(L), VectorXcd::Zero(static_cast<Index>(m)), epsilon);
}

FiniteRecoveryInstance random_instance(std::uint64_t seed, std::optional<InstanceShape> shape,
                                       std::optional<double> epsilon, bool zero_data) {
  Rng rng(seed, 3);
  InstanceShape s;
  if (shape) {
    s = *shape;
    require(s.m >= 1 && s.m <= s.d, "random instance needs 1 <= m <= d");
    require(s.n <= s.d, "random instance needs n <= d");
  } else {
    s.m = static_cast<std::size_t>(rng.integer(1, 8));
    s.d = static_cast<std::size_t>(rng.integer(s.m + 1, 20));
    s.n = static_cast<std::size_t>(rng.integer(0, std::min<std::size_t>(4, s.m)));
  }
  const auto d = static_cast<Index>(s.d);
  const auto m = static_cast<Index>(s.m);
  const auto n = static_cast<Index>(s.n);
  const MatrixXcd L = random_matrix(rng, m, d);
  const MatrixXcd V = random_matrix(rng, d, n);
  const VectorXcd f0 = random_matrix(rng, d, 1).col(0);
  const VectorXcd y = zero_data ? VectorXcd::Zero(m) : VectorXcd(L * f0);
  FiniteRecoveryInstance inst = make_instance(V, L, y, 0.0);
  if (epsilon) {
    inst.epsilon = *epsilon;
  } else {
    const double dmin = constrained_min_dist(inst).distance;
    inst.epsilon = dmin + rng.uniform(0.1, 1.0) * (1.0 + dmin);
  }
  return inst;
}

bool OracleSuiteReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.passed; });
}

OracleSuiteReport run_oracle_suite(const OracleSuiteConfig& config) {
  require(config.instances >= 1, "at least one oracle instance");
  if (config.shape) require(config.shape->d <= 64, "oracle dimensions limited to d <= 64");

  OracleCheck attainment{"extremal_pair_attains_local_radius", true, 0.0, 1e-8, 0};
  OracleCheck sandwich_upper{"monte_carlo_sup_below_local_radius", true, 0.0, 1e-8, 0};
  OracleCheck sandwich_lower{"monte_carlo_sup_reaches_local_radius", true, 0.0, 0.01, 0};
  OracleCheck samples_in_k{"samples_data_consistent_and_in_model_set", true, 0.0, 1e-9, 0};
  OracleCheck orthogonality{"constrained_minimizer_orthogonality", true, 0.0, 1e-9, 0};
  OracleCheck feasibility{"constrained_minimizer_fits_data", true, 0.0, 1e-9, 0};
  OracleCheck pair_in_k{"extremal_pair_in_model_set", true, 0.0, 1e-9, 0};
  OracleCheck global_bound{"radius_at_zero_data_equals_mu_epsilon", true, 0.0, 1e-9, 0};
  OracleCheck zero_data_worst{"zero_data_radius_dominates", true, 0.0, 1e-12, 0};

  auto worsen = [](OracleCheck& c, double value) {
    ++c.cases;
    c.worst = std::max(c.worst, value);
    if (!(value <= c.tolerance)) c.passed = false;
  };

  OracleSuiteReport report;
  for (std::size_t i = 0; i < config.instances; ++i) {
    const std::uint64_t seed = config.seed * 1000003ULL + i;
    const FiniteRecoveryInstance inst = random_instance(seed, config.shape, config.epsilon, config.zero_data);
    const ConstrainedMin cm = constrained_min_dist(inst);
    worsen(orthogonality, std::max(cm.orth_V, cm.orth_kernel));
    worsen(feasibility, cm.data_residual);

    const double radius = local_radius(inst);  // throws on an empty feasible set
    const FiniteMu mu = finite_mu(inst);
    report.instances.push_back({seed, {inst.dim, inst.m(), inst.n()}, inst.epsilon, cm.distance, mu.value,
                                mu.infinite, radius});
    if (mu.infinite || mu.value == 0.0) continue;

    const ExtremalPair pair = extremal_pair(inst);
    worsen(attainment, std::abs(0.5 * (pair.f_plus - pair.f_minus).norm() - radius));
    worsen(pair_in_k, std::max({dist_to_V(inst.V_basis, pair.f_plus) - inst.epsilon,
                                dist_to_V(inst.V_basis, pair.f_minus) - inst.epsilon,
                                (inst.L_map * pair.f_plus - inst.y).norm(),
                                (inst.L_map * pair.f_minus - inst.y).norm(), 0.0}));

    const MonteCarloReport mc = monte_carlo_sup(inst, config.samples, seed, true);
    worsen(sandwich_upper, std::max(0.0, mc.max_distance - radius));
    worsen(sandwich_lower, radius > 0.0 ? std::max(0.0, 1.0 - mc.max_distance / radius) : 0.0);
    worsen(samples_in_k, std::max({mc.max_data_residual / (1.0 + inst.y.norm()), mc.max_model_excess, 0.0}));

    // zero data is the worst case: radius mu * epsilon, inside [mu eps, 2 mu eps]
    FiniteRecoveryInstance zero = inst;
    zero.y.setZero();
    const double r0 = local_radius(zero);
    const double mu_eps = mu.value * inst.epsilon;
    worsen(global_bound, std::abs(r0 - mu_eps) / std::max(1.0, mu_eps));
    worsen(zero_data_worst, std::max(0.0, radius - r0) / std::max(1.0, r0));
  }

  // fixed edge cases
  OracleCheck trivial_kernel{"identity_observation_gives_mu_zero", true, 0.0, 0.0, 0};
  OracleCheck zero_model{"zero_model_space_gives_mu_one", true, 0.0, 1e-12, 0};
  OracleCheck plain_radius{"zero_model_line_radius_equals_epsilon", true, 0.0, 1e-12, 0};
  OracleCheck zero_budget{"minimal_epsilon_collapses_pair", true, 0.0, 1e-9, 0};
  {
    const FiniteRecoveryInstance id = make_instance(MatrixXcd::Identity(3, 1), MatrixXcd::Identity(3, 3),
                                                    VectorXcd::Zero(3), 1.0);
    worsen(trivial_kernel, finite_mu(id).value);

    Rng rng(config.seed, 4);
    const FiniteRecoveryInstance z0 = make_instance(MatrixXcd(5, 0), random_matrix(rng, 2, 5), VectorXcd::Ones(2), 10.0);
    worsen(zero_model, std::abs(finite_mu(z0).value - 1.0));

    const FiniteRecoveryInstance line = make_instance(MatrixXcd(2, 0), MatrixXcd::Ones(1, 2), VectorXcd::Zero(1), 0.75);
    worsen(plain_radius, std::abs(local_radius(line) - 0.75));

    FiniteRecoveryInstance tight = random_instance(config.seed * 7919ULL + 1, InstanceShape{8, 3, 2});
    tight.epsilon = constrained_min_dist(tight).distance;
    const ExtremalPair pair = extremal_pair(tight);
    worsen(zero_budget, (pair.f_plus - pair.f_minus).norm());
  }

  report.checks = {attainment,   sandwich_upper, sandwich_lower, samples_in_k,   orthogonality,
                   feasibility,  pair_in_k,      global_bound,   zero_data_worst, trivial_kernel,
                   zero_model,   plain_radius,   zero_budget};
  return report;
}

}  // namespace optrec::oracle
