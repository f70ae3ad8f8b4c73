#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "optrec/hardy_core.hpp"
#include "oracles.hpp"

using namespace optrec;
using namespace optrec::hardy;

namespace {

TaylorSeries series(std::initializer_list<cplx> c) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (const auto& x : c) v[i++] = x;
  return TaylorSeries(v);
}

}  // namespace

TEST_CASE("monomial rows") {
  const cplx i(0, 1);
  const auto r0 = monomial_row(0.0, 3);
  CHECK(r0[0] == cplx(1));
  CHECK(r0[1] == cplx(0));
  CHECK(r0[2] == cplx(0));

  const auto rh = monomial_row(0.5, 3);
  CHECK(std::abs(rh[1] - 0.5) == 0.0);
  CHECK(std::abs(rh[2] - 0.25) == 0.0);

  const auto ri = monomial_row(i, 4);
  CHECK(std::abs(ri[0] - 1.0) < 1e-15);
  CHECK(std::abs(ri[1] - i) < 1e-15);
  CHECK(std::abs(ri[2] + 1.0) < 1e-15);
  CHECK(std::abs(ri[3] + i) < 1e-15);

  SUBCASE("agrees with repeated multiplication") {
    const cplx z = std::polar(0.9, 1.3);
    const auto row = monomial_row(z, 40);
    const auto ref = oracle::vandermonde(Eigen::VectorXcd::Constant(1, z), 40);
    CHECK((row - ref.row(0)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("cauchy kernel values") {
  CHECK(std::abs(cauchy_kernel(0.0, 0.7) - 1.0) < 1e-15);
  CHECK(std::abs(cauchy_kernel(0.5, 0.5) - 4.0 / 3.0) < 1e-15);
  // 1 / (1 + 0.25 i) = (1 - 0.25 i) / 1.0625
  const cplx expected(1.0 / 1.0625, -0.25 / 1.0625);
  const cplx k = cauchy_kernel(cplx(0, 0.5), 0.5);
  CHECK(std::abs(k - expected) < 1e-15);
  CHECK(std::abs(k.real() - 0.9412) < 5e-5);
  CHECK(std::abs(k.imag() + 0.2353) < 5e-5);

  CHECK_THROWS_AS(cauchy_kernel(1.0, 1.0), DegenerateKernelError);
  CHECK_THROWS_AS(cauchy_kernel(cplx(0, 1), cplx(0, 1)), DegenerateKernelError);
}

TEST_CASE("kernel series reproduces point evaluation") {
  const cplx zeta = std::polar(0.6, 0.4);
  const auto f = series({1.0, cplx(0, 2), -0.5, cplx(0.3, 0.1)});
  // <f, E_zeta> = f(zeta)
  const cplx inner = h2_inner(f, kernel_series(zeta, 80));
  CHECK(std::abs(inner - eval_series(f, zeta)) < 1e-14);
  // <E_w, E_zeta> = 1 / (1 - conj(w) zeta)
  const cplx w = std::polar(0.3, -2.0);
  CHECK(std::abs(h2_inner(kernel_series(w, 120), kernel_series(zeta, 120)) - cauchy_kernel(w, zeta)) < 1e-14);
}

TEST_CASE("h2 inner products") {
  const cplx i(0, 1);
  CHECK(std::abs(h2_inner(series({1.0, 0.5}), series({1.0, 0.5})) - 1.25) < 1e-15);
  CHECK(std::abs(h2_inner(series({0.0, 1.0}), series({1.0, 0.0}))) == 0.0);
  CHECK(std::abs(h2_inner(series({1.0, i}), series({i, 1.0}))) < 1e-15);
  SUBCASE("shorter series is zero-padded") {
    CHECK(std::abs(h2_inner(series({2.0}), series({3.0, 5.0, 7.0})) - 6.0) < 1e-15);
  }
  SUBCASE("self inner product is the squared norm") {
    const auto f = series({cplx(1, 2), cplx(-3, 0.5), cplx(0, -1)});
    const cplx v = h2_inner(f, f);
    CHECK(std::abs(v.imag()) == 0.0);
    CHECK(std::abs(v.real() - f.h2_norm() * f.h2_norm()) < 1e-13);
  }
}

TEST_CASE("horner evaluation") {
  CHECK(std::abs(eval_series(series({1.0, 1.0, 1.0}), 0.0) - 1.0) == 0.0);
  CHECK(std::abs(eval_series(series({1.0, 1.0, 1.0}), 0.5) - 1.75) == 0.0);
  const std::size_t m = 7;
  const double r = 0.8;
  const double theta = 0.9;
  const auto mono = TaylorSeries::monomial(m);
  CHECK(mono.size() == m + 1);
  const cplx expected = std::polar(std::pow(r, m), m * theta);
  CHECK(std::abs(eval_series(mono, std::polar(r, theta)) - expected) < 1e-15);
}

TEST_CASE("series arithmetic") {
  const auto f = series({1.0, 2.0});
  const auto g = series({0.5, 0.0, 3.0});
  const auto s = f + g;
  CHECK(s.size() == 3);
  CHECK(std::abs(s[2] - 3.0) == 0.0);
  const auto d = f - g;
  CHECK(std::abs(d[0] - 0.5) == 0.0);
  CHECK(std::abs(d[2] + 3.0) == 0.0);
  const auto p = cplx(0, 2) * f;
  CHECK(std::abs(p[1] - cplx(0, 4)) == 0.0);
  CHECK(std::abs(f[10]) == 0.0);
  CHECK_THROWS_AS(TaylorSeries(Eigen::VectorXcd()), PreconditionError);
}

TEST_CASE("tail norms") {
  const auto f = series({3.0, 4.0, cplx(0, 12.0)});
  CHECK(std::abs(tail_norm(f, 0) - 13.0) < 1e-14);
  CHECK(std::abs(tail_norm(f, 1) - std::sqrt(160.0)) < 1e-14);
  CHECK(tail_norm(f, 3) == 0.0);
  CHECK(std::abs(tail_l1(f, 1) - 16.0) < 1e-14);
  CHECK(tail_l1(f, 5) == 0.0);
}

TEST_CASE("sup norm on the torus") {
  // |1 + z| peaks at z = 1 with value 2
  const auto est = sup_norm_on_torus(series({1.0, 1.0}), 256);
  CHECK(std::abs(est.value - 2.0) < 1e-10);
  // |z^3 + 0.5| has maximum 1.5 at z^3 = 1
  const auto tri = sup_norm_on_torus(series({0.5, 0.0, 0.0, 1.0}), 512);
  CHECK(std::abs(tri.value - 1.5) < 1e-10);
  // the estimate never exceeds the l1 bound
  const auto f = series({cplx(0.3, 0.1), cplx(-0.2, 0.7), cplx(0.05, -0.4)});
  CHECK(sup_norm_on_torus(f).value <= tail_l1(f, 0) + 1e-14);
}

TEST_CASE("point configurations") {
  SUBCASE("equispaced circle") {
    const auto c = equispaced_circle(8, 0.5);
    CHECK(c.size() == 8);
    CHECK(c.scheme == PointScheme::equispaced_circle);
    CHECK((c.points - oracle::roots_of_unity(8, 0.5)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(!is_torus(c.scheme));
  }
  SUBCASE("origin only for a single point") {
    const auto c = equispaced_circle(1, 0.0);
    CHECK(std::abs(c.points[0]) == 0.0);
    CHECK_THROWS_AS(equispaced_circle(2, 0.0), PreconditionError);
    CHECK_THROWS_AS(equispaced_circle(4, 1.0), PreconditionError);
    CHECK_THROWS_AS(equispaced_circle(0, 0.5), PreconditionError);
  }
  SUBCASE("random circle is seeded, on the circle and distinct") {
    const auto a = random_circle(32, 0.7, 11);
    const auto b = random_circle(32, 0.7, 11);
    const auto c = random_circle(32, 0.7, 12);
    CHECK(a.points == b.points);
    CHECK(a.points != c.points);
    REQUIRE(a.seed.has_value());
    CHECK(*a.seed == 11);
    CHECK(((a.points.cwiseAbs().array() - 0.7).abs() < 1e-15).all());
    for (Eigen::Index i = 0; i < a.points.size(); ++i)
      for (Eigen::Index j = 0; j < i; ++j) CHECK(std::abs(a.points[i] - a.points[j]) > 0.0);
  }
  SUBCASE("torus schemes") {
    CHECK(is_torus(equispaced_torus(5).scheme));
    const auto t = random_torus(16, 3);
    CHECK(is_torus(t.scheme));
    CHECK(((t.points.cwiseAbs().array() - 1.0).abs() < 1e-15).all());
  }
  SUBCASE("explicit points") {
    Eigen::VectorXcd p(2);
    p << 0.5, -0.25;
    const auto c = explicit_points(p);
    CHECK(c.radius == 0.5);
    Eigen::VectorXcd dup(2);
    dup << 0.5, 0.5;
    CHECK_THROWS_AS(explicit_points(dup), PreconditionError);
  }
  CHECK(to_string(PointScheme::random_torus) == "random_torus");
}

TEST_CASE("model function sampling") {
  ModelSetParams p;
  p.n = 3;
  p.M = 1.0;
  p.rho = 2.0;
  CHECK(std::abs(p.decay_epsilon() - 0.125) < 1e-15);
  CHECK(std::abs(p.sample_epsilon() - 0.125 / std::sqrt(0.75)) < 1e-15);

  SUBCASE("envelope") {
    const auto f = sample_model_function(p, 8, 7);
    for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(f[j]) <= std::pow(2.0, -static_cast<double>(j)));
  }
  SUBCASE("fast decay") {
    ModelSetParams q = p;
    q.rho = 1e6;
    const auto f = sample_model_function(q, 4, 1);
    for (std::size_t j = 1; j < 4; ++j) CHECK(std::abs(f[j]) < 1e-5 * q.M);
  }
  SUBCASE("determinism and seed dependence") {
    const auto a = sample_model_function(p, 16, 5);
    const auto b = sample_model_function(p, 16, 5);
    const auto c = sample_model_function(p, 16, 6);
    CHECK(a.coeffs() == b.coeffs());
    CHECK(a.coeffs() != c.coeffs());
  }
  SUBCASE("distance to the model space stays below the sample bound") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto f = sample_model_function(p, 60, seed);
      for (std::size_t n = 1; n <= 10; ++n) {
        ModelSetParams q = p;
        q.n = n;
        CHECK(tail_norm(f, n) <= q.sample_epsilon());
      }
    }
  }
  SUBCASE("invalid parameters") {
    ModelSetParams q = p;
    q.rho = 1.0;
    CHECK_THROWS_AS(q.validate(), PreconditionError);
    q = p;
    q.M = 0.0;
    CHECK_THROWS_AS(q.validate(), PreconditionError);
    q = p;
    q.n = 0;
    CHECK_THROWS_AS(q.validate(), PreconditionError);
  }
  CHECK(std::pow(2.0, -static_cast<double>(default_truncation(2.0))) < 1e-14);
  CHECK(std::pow(2.0, -static_cast<double>(default_truncation(2.0) - 1)) >= 1e-14);
}
