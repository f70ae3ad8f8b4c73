#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "optrec/da_estimate.hpp"
#include "oracles.hpp"

using namespace optrec;
using namespace optrec::da;

namespace {

double l1(const Eigen::VectorXcd& a) { return a.cwiseAbs().sum(); }

cplx off_grid(double angle) { return std::polar(1.0, angle); }

}  // namespace

TEST_CASE("constraint assembly") {
  const auto c = hardy::equispaced_torus(4);
  const cplx z0 = off_grid(0.3);
  const auto p = build_estimation_problem(c, z0, 3);
  CHECK(p.M.rows() == 3);
  CHECK(p.M.cols() == 4);
  const Eigen::MatrixXcd V = oracle::vandermonde(oracle::roots_of_unity(4), 3).transpose();
  CHECK((p.M - V).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(p.b[0] - 1.0) == 0.0);
  CHECK(std::abs(p.b[2] - z0 * z0) < 1e-15);
}

TEST_CASE("preconditions") {
  const auto c = hardy::equispaced_torus(6);
  CHECK_THROWS_AS(build_estimation_problem(c, 1.0, 2), PreconditionError);
  CHECK_THROWS_AS(build_estimation_problem(c, off_grid(0.2), 7), PreconditionError);
  CHECK_THROWS_AS(build_estimation_problem(c, off_grid(0.2), 0), PreconditionError);
  CHECK_THROWS_AS(build_estimation_problem(c, 0.5, 2), PreconditionError);
  CHECK_THROWS_AS(build_estimation_problem(hardy::equispaced_circle(6, 0.5), off_grid(0.2), 2),
                  PreconditionError);
  CHECK_THROWS_AS(identification_indicator_da(c, 2, 47), PreconditionError);
}

TEST_CASE("one constraint: weights summing to one") {
  for (const std::size_t m : {1, 5, 16}) {
    const auto w = optimal_weights(hardy::random_torus(m, 2), off_grid(1.0), 1);
    CHECK(w.solution.status == cone::SolveStatus::optimal);
    CHECK(std::abs(w.mu - 2.0) < 1e-8);
    CHECK(std::abs(w.a.sum() - 1.0) < 1e-9);
  }
}

TEST_CASE("two antipodal nodes") {
  // a_1 + a_2 = 1, a_1 - a_2 = i  =>  a = ((1 + i) / 2, (1 - i) / 2)
  const auto w = optimal_weights(hardy::equispaced_torus(2), cplx(0, 1), 2);
  CHECK(w.solution.status == cone::SolveStatus::optimal);
  CHECK(std::abs(w.a[0] - cplx(0.5, 0.5)) < 1e-10);
  CHECK(std::abs(w.a[1] - cplx(0.5, -0.5)) < 1e-10);
  CHECK(std::abs(w.mu - (1.0 + std::sqrt(2.0))) < 1e-10);
}

TEST_CASE("full degree: the weights are Lagrange weights") {
  SUBCASE("equispaced") {
    for (const std::size_t m : {3, 4, 8}) {
      const auto c = hardy::equispaced_torus(m);
      const cplx z0 = off_grid(0.37);
      const auto w = optimal_weights(c, z0, m);
      const Eigen::VectorXcd ref = oracle::lagrange_weights_solve(c.points, z0);
      CHECK((w.a - ref).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((ref - oracle::lagrange_weights_product(c.points, z0)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(std::abs(w.mu - 1.0 - l1(ref)) < 1e-9);
    }
  }
  SUBCASE("sixty-four random nodes") {
    const auto c = hardy::random_torus(64, 9);
    const cplx z0 = off_grid(oracle::kPi / 64.0);
    const auto w = optimal_weights(c, z0, 64);
    REQUIRE(w.solution.status == cone::SolveStatus::optimal);
    const Eigen::VectorXcd ref = oracle::lagrange_weights_product(c.points, z0);
    CHECK(std::abs(w.mu - 1.0 - l1(ref)) <= 1e-6 * l1(ref));
    CHECK(w.monomial_residual <= 1e-8 * l1(ref));
  }
}

TEST_CASE("the dual certificate is a bounded polynomial of degree below n") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const std::size_t m = 12;
    const std::size_t n = 2 + seed % 6;
    const auto c = hardy::random_torus(m, seed);
    const cplx z0 = off_grid(0.5 + 0.3 * static_cast<double>(seed));
    const auto w = optimal_weights(c, z0, n);
    REQUIRE(w.solution.status == cone::SolveStatus::optimal);

    // fit a polynomial of degree < n to the node values; it must be exact
    const Eigen::MatrixXcd V = oracle::vandermonde(c.points, n);
    const Eigen::VectorXcd coef = V.colPivHouseholderQr().solve(w.dual_at_nodes);
    CHECK((V * coef - w.dual_at_nodes).norm() < 1e-9);
    const cplx p0 = (oracle::vandermonde(Eigen::VectorXcd::Constant(1, z0), n) * coef)(0);
    CHECK(std::abs(p0 - w.dual_at_zeta0) < 1e-8);

    CHECK(w.dual_at_nodes.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
    const double obj = l1(w.a);
    CHECK(obj - w.dual_at_zeta0.real() <= 1e-8 * (1.0 + obj));
    CHECK(obj - w.dual_at_zeta0.real() >= -1e-9 * (1.0 + obj));

    // weak duality against some other feasible point: the minimum-norm one
    const auto prob = build_estimation_problem(c, z0, n);
    const Eigen::VectorXcd other = prob.M.completeOrthogonalDecomposition().solve(prob.b);
    CHECK(l1(other) >= w.dual_at_zeta0.real() - 1e-9);
    CHECK(l1(other) >= obj - 1e-9);
  }
}

TEST_CASE("estimates") {
  const auto c = hardy::random_torus(16, 4);
  const cplx z0 = off_grid(2.2);
  const std::size_t n = 6;
  const auto w = optimal_weights(c, z0, n);
  REQUIRE(w.solution.status == cone::SolveStatus::optimal);

  SUBCASE("exact on polynomials of degree below n") {
    Eigen::VectorXcd coef(static_cast<Eigen::Index>(n));
    coef << cplx(1, -1), 0.5, cplx(0, 2), -0.25, 0.1, cplx(0.3, 0.3);
    const Eigen::VectorXcd y = oracle::vandermonde(c.points, n) * coef;
    const cplx truth = (oracle::vandermonde(Eigen::VectorXcd::Constant(1, z0), n) * coef)(0);
    CHECK(std::abs(estimate(w, y) - truth) < 1e-10);
  }
  SUBCASE("zero data") { CHECK(std::abs(estimate(w, Eigen::VectorXcd::Zero(16))) == 0.0); }
  SUBCASE("error bound for model functions") {
    hardy::ModelSetParams params;
    params.n = n;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto F = hardy::sample_model_function(params, 80, seed);
      Eigen::VectorXcd y(16);
      for (Eigen::Index k = 0; k < 16; ++k) y[k] = hardy::eval_series(F, c.points[k]);
      const double err = std::abs(estimate(w, y) - hardy::eval_series(F, z0));
      CHECK(err <= w.mu * hardy::tail_l1(F, n) + 1e-12);
    }
  }
  CHECK_THROWS_AS(estimate(w, Eigen::VectorXcd::Zero(3)), PreconditionError);
}

TEST_CASE("supremum over the torus") {
  SUBCASE("one constraint") {
    const auto ind = identification_indicator_da(hardy::random_torus(8, 3), 1, 64);
    CHECK(std::abs(ind.mu_sup - 2.0) < 1e-8);
    CHECK(ind.evaluated == 64);
    CHECK(ind.max_gap <= 1e-8 * 3.0);
  }
  SUBCASE("grid points on nodes are skipped") {
    // m = 4 nodes at angles 2 pi k / 4; grid (g + 1/2) 2 pi / 32 never hits them
    const auto ind = identification_indicator_da(hardy::equispaced_torus(4), 2, 32);
    CHECK(ind.evaluated == 32);
    CHECK(std::abs(std::abs(ind.argmax_zeta0) - 1.0) < 1e-15);
  }
  SUBCASE("kappa sweep on a small torus") {
    const std::size_t m = 8;
    std::vector<std::size_t> ns;
    for (std::size_t n = 1; n <= m; ++n) ns.push_back(n);
    const auto rows = kappa_shape_sweep(m, ns, 64);
    REQUIRE(rows.size() == m);
    CHECK(std::abs(rows[0].kappa) < 1e-7);
    CHECK(!rows[0].ratio.has_value());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double nn = static_cast<double>(rows[i].n);
      CHECK(rows[i].reference == doctest::Approx(std::log(8.0 / (8.0 - nn + 1.0))).epsilon(1e-14));
      CHECK(rows[i].kappa == doctest::Approx(rows[i].mu_sup - 2.0));
      CHECK(rows[i].kappa >= -1e-7);
      if (i > 0) CHECK(rows[i].kappa >= rows[i - 1].kappa - 1e-7);
    }
    // full degree: Lagrange weights maximized over the same grid
    const auto z = oracle::roots_of_unity(m);
    double lagrange = 0.0;
    for (int g = 0; g < 64; ++g) {
      const double val = l1(oracle::lagrange_weights_product(z, std::polar(1.0, 2.0 * oracle::kPi * (g + 0.5) / 64.0)));
      lagrange = std::max(lagrange, val);
    }
    CHECK(std::abs(rows.back().mu_sup - 1.0 - lagrange) < 1e-8);
  }
}
