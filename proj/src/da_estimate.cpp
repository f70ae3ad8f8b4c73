#include "optrec/da_estimate.hpp"

#include <cmath>
#include <sstream>

#include "parallel.hpp"

namespace optrec::da {

namespace {

constexpr double kTorusTolerance = 1e-12;

void require(bool condition, const std::string& what) {
  if (!condition) throw PreconditionError(what);
}

void check_nodes(const hardy::PointConfiguration& config, std::size_t n) {
  const std::size_t m = config.size();
  require(m >= 1, "at least one sample point");
  require(n >= 1 && n <= m, "basis dimension must satisfy 1 <= n <= m");
  for (Eigen::Index k = 0; k < config.points.size(); ++k) {
    require(std::abs(std::abs(config.points[k]) - 1.0) <= kTorusTolerance,
            "disc-algebra sample points must lie on the unit circle");
  }
}

void check_inputs(const hardy::PointConfiguration& config, cplx zeta0, std::size_t n) {
  check_nodes(config, n);
  require(std::abs(std::abs(zeta0) - 1.0) <= kTorusTolerance, "zeta0 must lie on the unit circle");
  for (Eigen::Index k = 0; k < config.points.size(); ++k) {
    if (std::abs(config.points[k] - zeta0) <= kNodeExclusion) {
      std::ostringstream os;
      os << "zeta0 coincides with sample point " << k + 1;
      throw PreconditionError(os.str());
    }
  }
}

Eigen::MatrixXcd constraint_map(const hardy::PointConfiguration& config, std::size_t n) {
  const auto m = static_cast<Eigen::Index>(config.size());
  Eigen::MatrixXcd M(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index k = 0; k < m; ++k) M.col(k) = hardy::monomial_row(config.points[k], n).transpose();
  return M;
}

Eigen::VectorXcd moment_vector(cplx zeta0, std::size_t n) {
  return hardy::monomial_row(zeta0, n).transpose();
}

// Basis phi_0..phi_{n-1} of P_n orthonormal on the nodes (Vandermonde with
// Arnoldi): Q_kj = phi_j(zeta_k) with columns of norm sqrt(m), and
// z phi_{j-1} = sum_{i <= j} H_ij phi_i.
// The constraints in this basis define the same feasible set as the monomial
// ones but stay well conditioned for clustered nodes.
struct ArnoldiBasis {
  Eigen::MatrixXcd Q;  // m x n, phi_j(zeta_k)
  Eigen::MatrixXcd H;  // n x n, column j - 1 holds the recurrence for phi_j
};

ArnoldiBasis arnoldi_basis(const hardy::PointConfiguration& config, std::size_t n) {
  const auto m = static_cast<Eigen::Index>(config.size());
  const auto nn = static_cast<Eigen::Index>(n);
  const double scale = std::sqrt(static_cast<double>(m));
  ArnoldiBasis basis{Eigen::MatrixXcd::Zero(m, nn), Eigen::MatrixXcd::Zero(nn, nn)};
  basis.Q.col(0).setOnes();
  for (Eigen::Index j = 1; j < nn; ++j) {
    Eigen::VectorXcd v = config.points.cwiseProduct(basis.Q.col(j - 1));
    for (int pass = 0; pass < 2; ++pass) {  // reorthogonalize once
      for (Eigen::Index i = 0; i < j; ++i) {
        const cplx h = basis.Q.col(i).dot(v) / static_cast<double>(m);
        basis.H(i, j - 1) += h;
        v -= h * basis.Q.col(i);
      }
    }
    const double h = v.norm() / scale;
    require(h > 0.0, "sample points must be distinct");
    basis.H(j, j - 1) = h;
    basis.Q.col(j) = v / h;
  }
  return basis;
}

Eigen::VectorXcd evaluate_basis(const ArnoldiBasis& basis, cplx z) {
  const Eigen::Index n = basis.H.rows();
  Eigen::VectorXcd w(n);
  w[0] = 1.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    cplx v = z * w[j - 1];
    for (Eigen::Index i = 0; i < j; ++i) v -= basis.H(i, j - 1) * w[i];
    w[j] = v / basis.H(j, j - 1);
  }
  return w;
}

// The weight program in the Arnoldi basis, with the solver built once.
struct ConditionedProgram {
  ArnoldiBasis basis;
  cone::L1Solver solver;

  ConditionedProgram(const hardy::PointConfiguration& config, std::size_t n, const cone::SolverConfig& cfg)
      : basis(arnoldi_basis(config, n)), solver(basis.Q.transpose(), cfg) {}
};

EstimationWeights wrap(const ConditionedProgram& program, const hardy::PointConfiguration& config, cplx zeta0,
                       std::size_t n) {
  const cone::ComplexL1Problem problem{program.solver.M(), evaluate_basis(program.basis, zeta0)};
  EstimationWeights w;
  w.solution = program.solver.solve(problem.b);
  w.a = w.solution.a;
  w.mu = 1.0 + w.a.cwiseAbs().sum();
  w.zeta0 = zeta0;
  w.config = config;
  w.n = n;
  w.certificate = cone::check_certificate(problem, w.solution);
  w.monomial_residual = (constraint_map(config, n) * w.a - moment_vector(zeta0, n)).norm();
  // p = sum_j conj(lambda_j) phi_j, so (M^* lambda)_k = conj(p(zeta_k))
  w.dual_at_nodes = (problem.M.adjoint() * w.solution.dual).conjugate();
  w.dual_at_zeta0 = w.solution.dual.dot(problem.b);
  return w;
}

std::string describe(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << z.real() << ", " << z.imag() << ")";
  return os.str();
}

}  // namespace

cone::ComplexL1Problem build_estimation_problem(const hardy::PointConfiguration& config, cplx zeta0,
                                                std::size_t n) {
  check_inputs(config, zeta0, n);
  return {constraint_map(config, n), moment_vector(zeta0, n)};
}

EstimationWeights optimal_weights(const hardy::PointConfiguration& config, cplx zeta0, std::size_t n,
                                  const cone::SolverConfig& solver) {
  check_inputs(config, zeta0, n);
  return wrap(ConditionedProgram(config, n, solver), config, zeta0, n);
}

cplx estimate(const EstimationWeights& weights, const Eigen::VectorXcd& y) {
  require(y.size() == weights.a.size(), "data length must equal the number of sample points");
  return (weights.a.array() * y.array()).sum();
}

DaIndicator identification_indicator_da(const hardy::PointConfiguration& config, std::size_t n,
                                        std::size_t grid_size, const cone::SolverConfig& solver,
                                        std::size_t threads) {
  check_nodes(config, n);
  require(grid_size >= 8 * config.size(), "grid_size must be at least 8 m");

  std::vector<cplx> grid;
  grid.reserve(grid_size);
  for (std::size_t g = 0; g < grid_size; ++g) {
    const cplx z = std::polar(1.0, 2.0 * hardy::kPi * (static_cast<double>(g) + 0.5) / static_cast<double>(grid_size));
    if (((config.points.array() - z).abs() > kNodeExclusion).all()) grid.push_back(z);
  }
  require(!grid.empty(), "every grid point coincides with a sample point");

  const ConditionedProgram program(config, n, solver);
  std::vector<double> mu(grid.size());
  std::vector<double> gap(grid.size());
  detail::parallel_for(
      grid.size(),
      [&](std::size_t i) {
        const EstimationWeights w = wrap(program, config, grid[i], n);
        if (w.solution.status != cone::SolveStatus::optimal) {
          throw SolverError("weight program not certified at zeta0 = " + describe(grid[i]) +
                            " (status " + cone::to_string(w.solution.status) + ")");
        }
        mu[i] = w.mu;
        gap[i] = w.certificate.gap;
      },
      threads);

  DaIndicator out;
  out.grid_size = grid_size;
  out.evaluated = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i == 0 || mu[i] > out.mu_sup) {
      out.mu_sup = mu[i];
      out.argmax_zeta0 = grid[i];
    }
    out.max_gap = std::max(out.max_gap, gap[i]);
  }
  return out;
}

std::vector<KappaRow> kappa_shape_sweep(std::size_t m, const std::vector<std::size_t>& n_list,
                                        std::size_t grid_size, const cone::SolverConfig& solver,
                                        std::size_t threads) {
  const hardy::PointConfiguration config = hardy::equispaced_torus(m);
  std::vector<KappaRow> rows;
  rows.reserve(n_list.size());
  for (const std::size_t n : n_list) {
    const DaIndicator ind = identification_indicator_da(config, n, grid_size, solver, threads);
    KappaRow row;
    row.n = n;
    row.mu_sup = ind.mu_sup;
    row.kappa = ind.mu_sup - 2.0;
    row.reference = std::log(static_cast<double>(m) / static_cast<double>(m - n + 1));
    if (row.reference > 0.0) row.ratio = row.kappa / row.reference;
    row.max_gap = ind.max_gap;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace optrec::da
