#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optrec/errors.hpp"

/// Truncated Hardy-space elements, sampling configurations and the Cauchy
/// kernel. Everything else in the library is built on these.
namespace optrec::hardy {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// F(z) = sum_j f_j z^j truncated to N = coeffs.size() >= 1 terms.
class TaylorSeries {
 public:
  explicit TaylorSeries(Eigen::VectorXcd coeffs);

  static TaylorSeries zero(std::size_t length);
  static TaylorSeries monomial(std::size_t degree);

  const Eigen::VectorXcd& coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(coeffs_.size()); }
  cplx operator[](std::size_t j) const { return j < size() ? coeffs_[static_cast<Eigen::Index>(j)] : cplx{}; }

  /// sqrt(sum |f_j|^2).
  double h2_norm() const { return coeffs_.norm(); }

 private:
  Eigen::VectorXcd coeffs_;
};

TaylorSeries operator+(const TaylorSeries& f, const TaylorSeries& g);
TaylorSeries operator-(const TaylorSeries& f, const TaylorSeries& g);
TaylorSeries operator*(cplx s, const TaylorSeries& f);

enum class PointScheme {
  equispaced_circle,
  random_circle,
  equispaced_torus,
  random_torus,
  explicit_points,
};

std::string to_string(PointScheme scheme);
bool is_torus(PointScheme scheme);

/// Sample points zeta_1..zeta_m with the recipe that produced them.
///
/// For the circle/torus schemes `angles[k]` is the defining argument of
/// zeta_k; consumers needing more than double precision regenerate the points
/// from (radius, angles) rather than from `points`.
struct PointConfiguration {
  Eigen::VectorXcd points;
  PointScheme scheme = PointScheme::explicit_points;
  double radius = 0.0;
  std::optional<std::uint64_t> seed;
  std::vector<double> angles;

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.size()); }
};

/// zeta_k = r exp(2 pi i (k-1) / m). r = 0 is accepted only for m = 1.
PointConfiguration equispaced_circle(std::size_t m, double r);
/// i.i.d. uniform angles on [0, 2 pi), resampled on collision.
PointConfiguration random_circle(std::size_t m, double r, std::uint64_t seed);
PointConfiguration equispaced_torus(std::size_t m);
PointConfiguration random_torus(std::size_t m, std::uint64_t seed);
/// Arbitrary distinct points; radius is set to max |zeta_k|.
PointConfiguration explicit_points(Eigen::VectorXcd points);

/// Minimum angular separation used when drawing random angles.
inline constexpr double kMinAngularSeparation = 1e-12;

/// Row (1, zeta, ..., zeta^{n-1}).
Eigen::RowVectorXcd monomial_row(cplx zeta, std::size_t n);

/// 1 / (1 - conj(zeta) z). Throws DegenerateKernelError when the
/// denominator is below 16 machine epsilons.
cplx cauchy_kernel(cplx zeta, cplx z);

/// Coefficients conj(zeta)^j, j < length, of the kernel E_zeta.
TaylorSeries kernel_series(cplx zeta, std::size_t length);

/// sum_j f_j conj(g_j); the shorter series is zero-padded.
cplx h2_inner(const TaylorSeries& f, const TaylorSeries& g);

/// Horner evaluation of the truncated sum.
cplx eval_series(const TaylorSeries& f, cplx z);

/// dist_H2(F, P_n) = sqrt(sum_{j >= n} |f_j|^2).
double tail_norm(const TaylorSeries& f, std::size_t n);

/// sum_{j >= n} |f_j|, an upper bound for dist_Hinf(F, P_n).
double tail_l1(const TaylorSeries& f, std::size_t n);

struct SupNormEstimate {
  double value;
  double argument;
  double grid_spacing;
};

/// max_{|z|=1} |F(z)| by dense sampling of the torus followed by a
/// golden-section refinement around the best sample.
SupNormEstimate sup_norm_on_torus(const TaylorSeries& f, std::size_t samples = 4096);

/// Approximability model parameters: polynomials of degree < n, decay rho,
/// scale M.
struct ModelSetParams {
  std::size_t n = 1;
  double epsilon = 0.0;
  double rho = 2.0;
  double M = 1.0;

  void validate() const;
  /// M rho^{-n}.
  double decay_epsilon() const;
  /// M rho^{-n} / sqrt(1 - rho^{-2}), the H2 distance bound of a sample.
  double sample_epsilon() const;
};

/// Smallest N with rho^{-N} < 1e-14.
std::size_t default_truncation(double rho);

/// f_j = M rho^{-j} u_j with u_j i.i.d. uniform on the unit disc.
TaylorSeries sample_model_function(const ModelSetParams& params, std::size_t length,
                                   std::uint64_t seed);

}  // namespace optrec::hardy
