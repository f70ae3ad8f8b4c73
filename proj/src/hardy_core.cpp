#include "optrec/hardy_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "optrec/random.hpp"

namespace optrec::hardy {

namespace {

void require(bool condition, const std::string& what) {
  if (!condition) throw PreconditionError(what);
}

double angular_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

std::vector<double> equispaced_angles(std::size_t m) {
  std::vector<double> angles(m);
  for (std::size_t k = 0; k < m; ++k) {
    angles[k] = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m);
  }
  return angles;
}

std::vector<double> random_angles(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> angles;
  angles.reserve(m);
  while (angles.size() < m) {
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    const bool collides = std::any_of(angles.begin(), angles.end(), [&](double other) {
      return angular_distance(theta, other) < kMinAngularSeparation;
    });
    if (!collides) angles.push_back(theta);
  }
  return angles;
}

Eigen::VectorXcd points_from_angles(double r, const std::vector<double>& angles) {
  Eigen::VectorXcd points(static_cast<Eigen::Index>(angles.size()));
  for (std::size_t k = 0; k < angles.size(); ++k) {
    points[static_cast<Eigen::Index>(k)] = std::polar(r, angles[k]);
  }
  return points;
}

void check_distinct(const Eigen::VectorXcd& points) {
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    for (Eigen::Index j = i + 1; j < points.size(); ++j) {
      if (std::abs(points[i] - points[j]) <= 1e-14) {
        std::ostringstream os;
        os << "sample points must be pairwise distinct (points " << i + 1 << " and " << j + 1
           << " coincide)";
        throw PreconditionError(os.str());
      }
    }
  }
}

}  // namespace

TaylorSeries::TaylorSeries(Eigen::VectorXcd coeffs) : coeffs_(std::move(coeffs)) {
  require(coeffs_.size() >= 1, "a Taylor series needs at least one coefficient");
  require(coeffs_.allFinite(), "Taylor coefficients must be finite");
}

TaylorSeries TaylorSeries::zero(std::size_t length) {
  return TaylorSeries(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(std::max<std::size_t>(length, 1))));
}

TaylorSeries TaylorSeries::monomial(std::size_t degree) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(degree + 1));
  c[static_cast<Eigen::Index>(degree)] = 1.0;
  return TaylorSeries(std::move(c));
}

TaylorSeries operator+(const TaylorSeries& f, const TaylorSeries& g) {
  const auto n = static_cast<Eigen::Index>(std::max(f.size(), g.size()));
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
  c.head(f.coeffs().size()) += f.coeffs();
  c.head(g.coeffs().size()) += g.coeffs();
  return TaylorSeries(std::move(c));
}

TaylorSeries operator-(const TaylorSeries& f, const TaylorSeries& g) {
  return f + cplx(-1.0) * g;
}

TaylorSeries operator*(cplx s, const TaylorSeries& f) {
  return TaylorSeries(s * f.coeffs());
}

std::string to_string(PointScheme scheme) {
  switch (scheme) {
    case PointScheme::equispaced_circle: return "equispaced_circle";
    case PointScheme::random_circle: return "random_circle";
    case PointScheme::equispaced_torus: return "equispaced_torus";
    case PointScheme::random_torus: return "random_torus";
    case PointScheme::explicit_points: return "explicit";
  }
  return "unknown";
}

bool is_torus(PointScheme scheme) {
  return scheme == PointScheme::equispaced_torus || scheme == PointScheme::random_torus;
}

PointConfiguration equispaced_circle(std::size_t m, double r) {
  require(m >= 1, "m >= 1");
  require(r >= 0.0 && r < 1.0, "circle radius r must lie in [0, 1)");
  require(r > 0.0 || m == 1, "radius r = 0 is only valid for a single point");
  PointConfiguration config;
  config.scheme = PointScheme::equispaced_circle;
  config.radius = r;
  config.angles = equispaced_angles(m);
  config.points = points_from_angles(r, config.angles);
  return config;
}

PointConfiguration random_circle(std::size_t m, double r, std::uint64_t seed) {
  require(m >= 1, "m >= 1");
  require(r > 0.0 && r < 1.0, "circle radius r must lie in (0, 1)");
  PointConfiguration config;
  config.scheme = PointScheme::random_circle;
  config.radius = r;
  config.seed = seed;
  config.angles = random_angles(m, seed);
  config.points = points_from_angles(r, config.angles);
  return config;
}

PointConfiguration equispaced_torus(std::size_t m) {
  require(m >= 1, "m >= 1");
  PointConfiguration config;
  config.scheme = PointScheme::equispaced_torus;
  config.radius = 1.0;
  config.angles = equispaced_angles(m);
  config.points = points_from_angles(1.0, config.angles);
  return config;
}

PointConfiguration random_torus(std::size_t m, std::uint64_t seed) {
  require(m >= 1, "m >= 1");
  PointConfiguration config;
  config.scheme = PointScheme::random_torus;
  config.radius = 1.0;
  config.seed = seed;
  config.angles = random_angles(m, seed);
  config.points = points_from_angles(1.0, config.angles);
  return config;
}

PointConfiguration explicit_points(Eigen::VectorXcd points) {
  require(points.size() >= 1, "at least one sample point");
  require(points.allFinite(), "sample points must be finite");
  check_distinct(points);
  PointConfiguration config;
  config.scheme = PointScheme::explicit_points;
  config.radius = points.cwiseAbs().maxCoeff();
  config.points = std::move(points);
  return config;
}

Eigen::RowVectorXcd monomial_row(cplx zeta, std::size_t n) {
  require(n >= 1, "monomial_row needs n >= 1");
  Eigen::RowVectorXcd row(static_cast<Eigen::Index>(n));
  row[0] = 1.0;
  for (Eigen::Index j = 1; j < row.size(); ++j) row[j] = row[j - 1] * zeta;
  return row;
}

cplx cauchy_kernel(cplx zeta, cplx z) {
  const cplx denom = 1.0 - std::conj(zeta) * z;
  if (std::abs(denom) < 16.0 * std::numeric_limits<double>::epsilon()) {
    throw DegenerateKernelError("Cauchy kernel denominator 1 - conj(zeta) z vanishes");
  }
  return 1.0 / denom;
}

TaylorSeries kernel_series(cplx zeta, std::size_t length) {
  return TaylorSeries(monomial_row(std::conj(zeta), std::max<std::size_t>(length, 1)).transpose());
}

cplx h2_inner(const TaylorSeries& f, const TaylorSeries& g) {
  const auto n = static_cast<Eigen::Index>(std::min(f.size(), g.size()));
  // Eigen's dot conjugates its left operand
  return g.coeffs().head(n).dot(f.coeffs().head(n));
}

cplx eval_series(const TaylorSeries& f, cplx z) {
  const auto& c = f.coeffs();
  cplx acc = c[c.size() - 1];
  for (Eigen::Index j = c.size() - 2; j >= 0; --j) acc = acc * z + c[j];
  return acc;
}

double tail_norm(const TaylorSeries& f, std::size_t n) {
  if (n >= f.size()) return 0.0;
  return f.coeffs().tail(static_cast<Eigen::Index>(f.size() - n)).norm();
}

double tail_l1(const TaylorSeries& f, std::size_t n) {
  if (n >= f.size()) return 0.0;
  return f.coeffs().tail(static_cast<Eigen::Index>(f.size() - n)).cwiseAbs().sum();
}

SupNormEstimate sup_norm_on_torus(const TaylorSeries& f, std::size_t samples) {
  require(samples >= 8, "sup-norm estimate needs at least 8 torus samples");
  const double h = 2.0 * kPi / static_cast<double>(samples);
  auto modulus = [&](double theta) { return std::abs(eval_series(f, std::polar(1.0, theta))); };

  double best = -1.0;
  double best_theta = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double theta = h * static_cast<double>(s);
    const double v = modulus(theta);
    if (v > best) {
      best = v;
      best_theta = theta;
    }
  }

  // golden-section search on [best - h, best + h]
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = best_theta - h;
  double hi = best_theta + h;
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = modulus(x1);
  double f2 = modulus(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = modulus(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = modulus(x2);
    }
  }
  const double refined = std::max(f1, f2);
  if (refined > best) {
    best = refined;
    best_theta = f1 > f2 ? x1 : x2;
  }
  return {best, best_theta, h};
}

void ModelSetParams::validate() const {
  require(n >= 1, "model dimension n >= 1");
  require(epsilon >= 0.0, "epsilon >= 0");
  require(rho > 1.0, "decay rho > 1");
  require(M > 0.0, "scale M > 0");
}

double ModelSetParams::decay_epsilon() const {
  return M * std::pow(rho, -static_cast<double>(n));
}

double ModelSetParams::sample_epsilon() const {
  return decay_epsilon() / std::sqrt(1.0 - 1.0 / (rho * rho));
}

std::size_t default_truncation(double rho) {
  require(rho > 1.0, "decay rho > 1");
  return static_cast<std::size_t>(std::floor(14.0 * std::log(10.0) / std::log(rho))) + 1;
}

TaylorSeries sample_model_function(const ModelSetParams& params, std::size_t length,
                                   std::uint64_t seed) {
  params.validate();
  require(length >= params.n, "truncation length N >= n");
  Rng rng(seed, 1);
  Eigen::VectorXcd c(static_cast<Eigen::Index>(length));
  double envelope = params.M;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    c[j] = envelope * rng.unit_disc();
    envelope /= params.rho;
  }
  return TaylorSeries(std::move(c));
}

}  // namespace optrec::hardy
