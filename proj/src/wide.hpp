#pragma once

// Extended-precision complex linear algebra for the Cauchy Gramian.
//
// Gramians of Cauchy kernels at m points of radius r have condition numbers
// up to r^{-2(m-1)}, so the Cholesky stage of the H2 route runs with 100
// significant digits. Only the small set of dense kernels needed there lives
// here; results are rounded back to double at the module boundary.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "optrec/hardy_core.hpp"

namespace optrec::detail {

namespace bmp = boost::multiprecision;

using wide_real = bmp::number<bmp::cpp_bin_float<100>, bmp::et_off>;
using wide_complex = bmp::number<bmp::complex_adaptor<bmp::cpp_bin_float<100>>, bmp::et_off>;

inline wide_complex widen(std::complex<double> z) {
  return wide_complex(wide_real(z.real()), wide_real(z.imag()));
}

inline std::complex<double> narrow(const wide_complex& z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

inline wide_real norm2(const wide_complex& z) {
  const wide_real re = z.real();
  const wide_real im = z.imag();
  return re * re + im * im;
}

inline wide_complex conj_of(const wide_complex& z) {
  return wide_complex(z.real(), wide_real(-z.imag()));
}

/// Dense column-major matrix.
class WideMatrix {
 public:
  WideMatrix() = default;
  WideMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, wide_complex(0)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  wide_complex& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  const wide_complex& operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  Eigen::MatrixXcd to_eigen() const {
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t j = 0; j < cols_; ++j)
      for (std::size_t i = 0; i < rows_; ++i)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = narrow((*this)(i, j));
    return out;
  }

  static WideMatrix from_eigen(const Eigen::MatrixXcd& m) {
    WideMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (std::size_t j = 0; j < out.cols_; ++j)
      for (std::size_t i = 0; i < out.rows_; ++i)
        out(i, j) = widen(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    return out;
  }

  /// Leading rows x cols block.
  WideMatrix leading(std::size_t rows, std::size_t cols) const {
    WideMatrix out(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < rows; ++i) out(i, j) = (*this)(i, j);
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<wide_complex> data_;
};

using WideVector = std::vector<wide_complex>;

inline WideVector widen(const Eigen::VectorXcd& v) {
  WideVector out(static_cast<std::size_t>(v.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = widen(v[static_cast<Eigen::Index>(i)]);
  return out;
}

inline Eigen::VectorXcd narrow(const WideVector& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = narrow(v[i]);
  return out;
}

/// Points of a configuration, regenerated from their defining angles.
inline WideVector wide_points(const hardy::PointConfiguration& config) {
  const std::size_t m = config.size();
  WideVector out(m);
  const wide_real two_pi = 2 * boost::math::constants::pi<wide_real>();
  switch (config.scheme) {
    case hardy::PointScheme::equispaced_circle:
    case hardy::PointScheme::equispaced_torus: {
      const wide_real r(config.radius);
      for (std::size_t k = 0; k < m; ++k) {
        const wide_real theta = two_pi * wide_real(k) / wide_real(m);
        out[k] = wide_complex(r * cos(theta), r * sin(theta));
      }
      break;
    }
    case hardy::PointScheme::random_circle:
    case hardy::PointScheme::random_torus: {
      const wide_real r(config.radius);
      for (std::size_t k = 0; k < m; ++k) {
        const wide_real theta(config.angles[k]);
        out[k] = wide_complex(r * cos(theta), r * sin(theta));
      }
      break;
    }
    case hardy::PointScheme::explicit_points:
      for (std::size_t k = 0; k < m; ++k) out[k] = widen(config.points[static_cast<Eigen::Index>(k)]);
      break;
  }
  return out;
}

/// In-place lower Cholesky factor A = L L^*. Returns false when a pivot is
/// not positive.
inline bool cholesky_in_place(WideMatrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    wide_real diag = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) diag -= norm2(a(j, k));
    if (!(diag > 0)) return false;
    const wide_real ljj = sqrt(diag);
    a(j, j) = wide_complex(ljj);
    for (std::size_t i = j + 1; i < n; ++i) {
      wide_complex s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * conj_of(a(j, k));
      a(i, j) = s / ljj;
    }
    for (std::size_t i = 0; i < j; ++i) a(i, j) = wide_complex(0);
  }
  return true;
}

/// Solves L X = B in place on each column of B.
inline void forward_solve(const WideMatrix& l, WideMatrix& b) {
  const std::size_t n = l.rows();
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      wide_complex s = b(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b(k, c);
      b(i, c) = s / l(i, i).real();
    }
  }
}

inline void forward_solve(const WideMatrix& l, WideVector& b) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    wide_complex s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i).real();
  }
}

/// Solves L^* x = b in place.
inline void adjoint_solve(const WideMatrix& l, WideVector& b) {
  const std::size_t n = b.size();
  for (std::size_t ii = n; ii-- > 0;) {
    wide_complex s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= conj_of(l(k, ii)) * b[k];
    b[ii] = s / l(ii, ii).real();
  }
}

/// Inverse of a lower-triangular matrix.
inline WideMatrix lower_inverse(const WideMatrix& l) {
  const std::size_t n = l.rows();
  WideMatrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    inv(c, c) = wide_complex(1) / l(c, c).real();
    for (std::size_t i = c + 1; i < n; ++i) {
      wide_complex s(0);
      for (std::size_t k = c; k < i; ++k) s -= l(i, k) * inv(k, c);
      inv(i, c) = s / l(i, i).real();
    }
  }
  return inv;
}

/// X^* X for an m x n matrix X.
inline WideMatrix gram_of_columns(const WideMatrix& x) {
  const std::size_t n = x.cols();
  WideMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      wide_complex s(0);
      for (std::size_t k = 0; k < x.rows(); ++k) s += conj_of(x(k, i)) * x(k, j);
      out(i, j) = s;
      out(j, i) = conj_of(s);
    }
    out(i, i) = wide_complex(out(i, i).real());
  }
  return out;
}

inline WideVector adjoint_times(const WideMatrix& x, const WideVector& v) {
  WideVector out(x.cols(), wide_complex(0));
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t k = 0; k < x.rows(); ++k) out[j] += conj_of(x(k, j)) * v[k];
  return out;
}

inline WideVector times(const WideMatrix& x, const WideVector& v) {
  WideVector out(x.rows(), wide_complex(0));
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t k = 0; k < x.rows(); ++k) out[k] += x(k, j) * v[j];
  return out;
}

}  // namespace optrec::detail
