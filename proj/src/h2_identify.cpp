#include "optrec/h2_identify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wide.hpp"

namespace optrec::h2 {

using optrec::detail::WideMatrix;
using optrec::detail::WideVector;
using optrec::detail::wide_complex;
using optrec::detail::wide_real;

namespace detail {

struct WideKernel {
  WideVector points;
  WideMatrix H;
  WideMatrix L;  // lower Cholesky factor of H
  bool factored = false;
  double rcond = 0.0;
};

struct WideGram {
  std::shared_ptr<const WideKernel> kernel;
  WideMatrix G;
  WideMatrix X;   // L^{-1} G
  WideMatrix C;   // X^* X = G^* H^{-1} G
  WideMatrix Lc;  // lower Cholesky factor of C
  bool c_factored = false;
  Eigen::MatrixXcd Lc_inv;  // Lc^{-1}, rounded; C^{-1} = Lc_inv^* Lc_inv
};

struct WideRecovery {
  WideVector c;
  WideVector d;
};

}  // namespace detail

namespace {

void require(bool condition, const std::string& what) {
  if (!condition) throw PreconditionError(what);
}

wide_real wide_abs(const wide_complex& z) { return sqrt(optrec::detail::norm2(z)); }

wide_real vector_norm(const WideVector& v) {
  wide_real s(0);
  for (const auto& x : v) s += optrec::detail::norm2(x);
  return sqrt(s);
}

// lambda_min(H) / ||H||_1 with lambda_min from a few inverse iterations.
double estimate_rcond(const WideMatrix& h, const WideMatrix& l) {
  const std::size_t m = h.rows();
  wide_real norm1(0);
  for (std::size_t j = 0; j < m; ++j) {
    wide_real col(0);
    for (std::size_t i = 0; i < m; ++i) col += wide_abs(h(i, j));
    norm1 = std::max(norm1, col);
  }
  WideVector x(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double phase = 2.399963229728653 * static_cast<double>(k);  // golden angle
    x[k] = wide_complex(wide_real(std::cos(phase)), wide_real(std::sin(phase)));
  }
  wide_real lambda_min(0);
  for (int it = 0; it < 8; ++it) {
    const wide_real before = vector_norm(x);
    optrec::detail::forward_solve(l, x);
    optrec::detail::adjoint_solve(l, x);
    const wide_real after = vector_norm(x);
    lambda_min = before / after;
    for (auto& v : x) v /= wide_complex(after);
  }
  return static_cast<double>(lambda_min / norm1);
}

std::shared_ptr<const detail::WideKernel> factor_kernel(const hardy::PointConfiguration& config) {
  auto kernel = std::make_shared<detail::WideKernel>();
  kernel->points = optrec::detail::wide_points(config);
  const std::size_t m = config.size();
  kernel->H = WideMatrix(m, m);
  const wide_complex one(1);
  for (std::size_t j = 0; j < m; ++j) {
    const wide_complex cj = optrec::detail::conj_of(kernel->points[j]);
    for (std::size_t k = 0; k < m; ++k) kernel->H(k, j) = one / (one - cj * kernel->points[k]);
  }
  kernel->L = kernel->H;
  kernel->factored = optrec::detail::cholesky_in_place(kernel->L);
  kernel->rcond = kernel->factored ? estimate_rcond(kernel->H, kernel->L) : 0.0;
  return kernel;
}

std::shared_ptr<const detail::WideGram> make_wide_gram(std::shared_ptr<const detail::WideKernel> kernel,
                                                       WideMatrix G, WideMatrix X) {
  auto gram = std::make_shared<detail::WideGram>();
  gram->kernel = std::move(kernel);
  gram->G = std::move(G);
  gram->X = std::move(X);
  if (gram->kernel->factored) {
    gram->C = optrec::detail::gram_of_columns(gram->X);
    gram->Lc = gram->C;
    gram->c_factored = optrec::detail::cholesky_in_place(gram->Lc);
    if (gram->c_factored) gram->Lc_inv = optrec::detail::lower_inverse(gram->Lc).to_eigen();
  }
  return gram;
}

void check_conditioning(const GramPair& gram) {
  const double rc = gram.rcond();
  if (!(rc >= kRcondFloor)) {
    std::ostringstream os;
    os << "kernel Gramian H is numerically singular (rcond estimate " << rc << " < " << kRcondFloor
       << ")";
    throw IllConditionedError(os.str(), rc);
  }
  if (!gram.wide().c_factored) {
    throw IllConditionedError("G^* H^{-1} G is numerically singular (mu is effectively infinite)", rc);
  }
}

wide_complex horner(const hardy::TaylorSeries& f, const wide_complex& z) {
  const auto& c = f.coeffs();
  wide_complex acc = optrec::detail::widen(c[c.size() - 1]);
  for (Eigen::Index j = c.size() - 2; j >= 0; --j) acc = acc * z + optrec::detail::widen(c[j]);
  return acc;
}

void identify_wide(const GramPair& gram, WideVector y,
                              Eigen::VectorXcd& c_out, Eigen::VectorXcd& d_out,
                              std::shared_ptr<const detail::WideRecovery>& wide_out) {
  check_conditioning(gram);
  const auto& wg = gram.wide();
  const auto& kernel = *wg.kernel;
  optrec::detail::forward_solve(kernel.L, y);  // y <- L^{-1} y
  WideVector c = optrec::detail::adjoint_times(wg.X, y);
  optrec::detail::forward_solve(wg.Lc, c);
  optrec::detail::adjoint_solve(wg.Lc, c);
  WideVector xc = optrec::detail::times(wg.X, c);
  WideVector d(y.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = y[k] - xc[k];
  optrec::detail::adjoint_solve(kernel.L, d);

  auto rec = std::make_shared<detail::WideRecovery>();
  rec->c = std::move(c);
  rec->d = std::move(d);
  c_out = optrec::detail::narrow(rec->c);
  d_out = optrec::detail::narrow(rec->d);
  wide_out = rec;
}

}  // namespace

double GramPair::rcond() const noexcept { return wide_->kernel->rcond; }

Eigen::MatrixXcd GramPair::normal_matrix() const {
  if (!wide_->kernel->factored) {
    throw IllConditionedError("kernel Gramian H is not numerically positive definite", 0.0);
  }
  return wide_->C.to_eigen();
}

GramPair GramPair::leading(std::size_t n_prime) const {
  require(n_prime >= 1 && n_prime <= n_, "leading(n') needs 1 <= n' <= n");
  GramPair out;
  out.G_ = G_.leftCols(static_cast<Eigen::Index>(n_prime));
  out.H_ = H_;
  out.config_ = config_;
  out.n_ = n_prime;
  const std::size_t m = config_.size();
  if (wide_->c_factored) {
    // the Cholesky factor of a leading block is the leading block of the factor
    auto gram = std::make_shared<detail::WideGram>();
    gram->kernel = wide_->kernel;
    gram->G = wide_->G.leading(m, n_prime);
    gram->X = wide_->X.leading(m, n_prime);
    gram->C = wide_->C.leading(n_prime, n_prime);
    gram->Lc = wide_->Lc.leading(n_prime, n_prime);
    gram->c_factored = true;
    // and so is the inverse of a lower-triangular factor
    const auto k = static_cast<Eigen::Index>(n_prime);
    gram->Lc_inv = wide_->Lc_inv.topLeftCorner(k, k);
    out.wide_ = std::move(gram);
  } else {
    out.wide_ = make_wide_gram(wide_->kernel, wide_->G.leading(m, n_prime),
                               wide_->X.leading(m, n_prime));
  }
  return out;
}

GramPair build_gram_pair(const hardy::PointConfiguration& config, std::size_t n) {
  const std::size_t m = config.size();
  require(m >= 1, "at least one sample point");
  require(n >= 1 && n <= m, "basis dimension must satisfy 1 <= n <= m");
  require(!hardy::is_torus(config.scheme),
          "H2 point evaluations need |zeta| < 1; torus configurations are rejected");
  for (Eigen::Index k = 0; k < config.points.size(); ++k) {
    require(std::abs(config.points[k]) < 1.0, "H2 point evaluations need |zeta_k| < 1");
  }

  GramPair gram;
  gram.config_ = config;
  gram.n_ = n;
  gram.G_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  gram.H_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    gram.G_.row(kk) = hardy::monomial_row(config.points[kk], n);
    for (std::size_t j = 0; j < m; ++j) {
      gram.H_(kk, static_cast<Eigen::Index>(j)) =
          hardy::cauchy_kernel(config.points[static_cast<Eigen::Index>(j)], config.points[kk]);
    }
  }

  auto kernel = factor_kernel(config);
  WideMatrix G(m, n);
  for (std::size_t k = 0; k < m; ++k) {
    wide_complex p(1);
    for (std::size_t j = 0; j < n; ++j) {
      G(k, j) = p;
      p *= kernel->points[k];
    }
  }
  WideMatrix X = G;
  if (kernel->factored) optrec::detail::forward_solve(kernel->L, X);
  gram.wide_ = make_wide_gram(std::move(kernel), std::move(G), std::move(X));
  return gram;
}

namespace {

// mu^2 = lambda_max(C^{-1}) with C^{-1} = W^* W, W = Lc^{-1}. The largest
// eigenvalue keeps its relative accuracy however small lambda_min(C) is.
double indicator_from_inverse_factor(const Eigen::MatrixXcd& w) {
  const Eigen::MatrixXcd c_inv = w.adjoint() * w;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(c_inv, Eigen::EigenvaluesOnly);
  const double lambda_max = eig.eigenvalues()[eig.eigenvalues().size() - 1];
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw IllConditionedError("G^* H^{-1} G is numerically singular (mu is effectively infinite)", 0.0);
  }
  // lambda_min(C) <= 1 holds exactly; clamp the rounding excess
  return std::max(1.0, std::sqrt(lambda_max));
}

}  // namespace

double compatibility_indicator(const GramPair& gram) {
  check_conditioning(gram);
  return indicator_from_inverse_factor(gram.wide().Lc_inv);
}

std::vector<double> compatibility_sweep(const GramPair& gram) {
  check_conditioning(gram);
  const Eigen::MatrixXcd& w = gram.wide().Lc_inv;
  std::vector<double> mu;
  mu.reserve(gram.n());
  for (std::size_t k = 1; k <= gram.n(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    mu.push_back(indicator_from_inverse_factor(w.topLeftCorner(kk, kk)));
  }
  return mu;
}

cplx RecoveryElement::operator()(cplx z) const {
  const auto& points = gram_.wide().kernel->points;
  const wide_complex zw = optrec::detail::widen(z);
  const wide_complex one(1);
  wide_complex acc(0);
  for (std::size_t j = wide_->c.size(); j-- > 0;) acc = acc * zw + wide_->c[j];
  for (std::size_t k = 0; k < points.size(); ++k) {
    acc += wide_->d[k] / (one - optrec::detail::conj_of(points[k]) * zw);
  }
  return optrec::detail::narrow(acc);
}

RecoveryElement RecoveryElement::from_coefficients(GramPair gram, Eigen::VectorXcd c,
                                                   Eigen::VectorXcd d) {
  require(static_cast<std::size_t>(c.size()) == gram.n(), "recovery coefficient c has length n");
  require(static_cast<std::size_t>(d.size()) == gram.m(), "recovery coefficient d has length m");
  RecoveryElement rec;
  auto wide = std::make_shared<detail::WideRecovery>();
  wide->c = optrec::detail::widen(c);
  wide->d = optrec::detail::widen(d);
  rec.c_ = std::move(c);
  rec.d_ = std::move(d);
  rec.gram_ = std::move(gram);
  rec.wide_ = std::move(wide);
  return rec;
}

RecoveryElement optimal_identify(const GramPair& gram, const Eigen::VectorXcd& y) {
  require(static_cast<std::size_t>(y.size()) == gram.m(), "data vector y has length m");
  RecoveryElement rec;
  identify_wide(gram, optrec::detail::widen(y), rec.c_, rec.d_, rec.wide_);
  rec.gram_ = gram;
  return rec;
}

RecoveryElement optimal_identify(const GramPair& gram, const hardy::TaylorSeries& truth) {
  const auto& points = gram.wide().kernel->points;
  WideVector y(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) y[k] = horner(truth, points[k]);
  RecoveryElement rec;
  identify_wide(gram, std::move(y), rec.c_, rec.d_, rec.wide_);
  rec.gram_ = gram;
  return rec;
}

Eigen::VectorXcd observe(const hardy::PointConfiguration& config, const hardy::TaylorSeries& f) {
  Eigen::VectorXcd y(config.points.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) y[k] = hardy::eval_series(f, config.points[k]);
  return y;
}

double h2_error(const hardy::TaylorSeries& truth, const RecoveryElement& rec) {
  const auto& wg = rec.gram().wide();
  const auto& kernel = *wg.kernel;
  const auto& c = rec.wide().c;
  const auto& d = rec.wide().d;
  const std::size_t m = d.size();
  const std::size_t n = c.size();

  wide_real truth_sq(0);
  for (Eigen::Index j = 0; j < truth.coeffs().size(); ++j) {
    truth_sq += optrec::detail::norm2(optrec::detail::widen(truth.coeffs()[j]));
  }

  // ||A||^2 = ||c||^2 + <Hd, d> + 2 Re <Gc, d>
  wide_real rec_sq(0);
  for (const auto& cj : c) rec_sq += optrec::detail::norm2(cj);
  const WideVector hd = optrec::detail::times(kernel.H, d);
  const WideVector gc = optrec::detail::times(wg.G, c);
  wide_complex dhd(0);
  wide_complex dgc(0);
  for (std::size_t k = 0; k < m; ++k) {
    const wide_complex dk = optrec::detail::conj_of(d[k]);
    dhd += dk * hd[k];
    dgc += dk * gc[k];
  }
  rec_sq += dhd.real() + 2 * dgc.real();

  // <F, A> = <f_{0:n-1}, c> + sum_k conj(d_k) F(zeta_k)
  wide_complex cross(0);
  for (std::size_t j = 0; j < n && j < truth.size(); ++j) {
    cross += optrec::detail::widen(truth[j]) * optrec::detail::conj_of(c[j]);
  }
  for (std::size_t k = 0; k < m; ++k) {
    cross += optrec::detail::conj_of(d[k]) * horner(truth, kernel.points[k]);
  }

  const wide_real err_sq = truth_sq + rec_sq - 2 * cross.real();
  return err_sq > 0 ? static_cast<double>(sqrt(err_sq)) : 0.0;
}

double equispaced_mu_closed_form(double r, std::size_t m) {
  require(r >= 0.0 && r < 1.0, "closed form needs 0 <= r < 1");
  require(m >= 1, "closed form needs m >= 1");
  return 1.0 / std::sqrt(1.0 - std::pow(r, 2.0 * static_cast<double>(m)));
}

CirculantEig equispaced_circulant_eig(double r, std::size_t m) {
  require(r > 0.0 && r < 1.0, "circulant eigendecomposition needs 0 < r < 1");
  require(m >= 1, "circulant eigendecomposition needs m >= 1");
  const auto mm = static_cast<Eigen::Index>(m);
  CirculantEig out;
  out.U.resize(mm, mm);
  out.values.resize(mm);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index j = 0; j < mm; ++j) {
    for (Eigen::Index k = 0; k < mm; ++k) {
      // reduce the exponent mod m before forming the angle
      const auto e = static_cast<double>((j * k) % mm);
      out.U(j, k) = std::polar(scale, 2.0 * hardy::kPi * e / static_cast<double>(m));
    }
  }
  const double denom = 1.0 - std::pow(r, 2.0 * static_cast<double>(m));
  for (Eigen::Index k = 0; k < mm; ++k) {
    out.values[k] = static_cast<double>(m) * std::pow(r, 2.0 * static_cast<double>(k)) / denom;
  }
  return out;
}

hardy::TaylorSeries interpolate_equispaced(const hardy::TaylorSeries& f, double r, std::size_t m) {
  require(r > 0.0 && r < 1.0, "interpolation radius needs 0 < r < 1");
  require(m >= 1, "interpolation needs m >= 1");
  const double rm = std::pow(r, static_cast<double>(m));
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t l = 0; l < m; ++l) {
    double weight = 1.0;
    cplx acc{};
    for (std::size_t j = l; j < f.size(); j += m) {
      acc += f[j] * weight;
      weight *= rm;
    }
    out[static_cast<Eigen::Index>(l)] = acc;
  }
  return hardy::TaylorSeries(std::move(out));
}

}  // namespace optrec::h2
