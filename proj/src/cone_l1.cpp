#include "optrec/cone_l1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace optrec::cone {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

constexpr double kRankThreshold = 1e-10;
constexpr double kAlpha = 1.6;        // over-relaxation
constexpr double kBalance = 10.0;     // residual-balancing trigger
constexpr double kRhoStep = 2.0;      // residual-balancing factor
constexpr std::size_t kCheckEvery = 10;
constexpr std::size_t kBarrierAfter = 2000;  // ADMM iterations before the barrier fallback

void require(bool condition, const std::string& what) {
  if (!condition) throw PreconditionError(what);
}

double block_inf_norm(const VectorXcd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

struct Certificate {
  VectorXcd lambda;  // scaled to dual feasibility
  double objective;
  double gap;
  double feasibility;
};

Certificate certify(const MatrixXcd& M, const VectorXcd& b, const VectorXcd& a, VectorXcd lambda) {
  const double dual_norm = block_inf_norm(M.adjoint() * lambda);
  if (dual_norm > 1.0) lambda /= dual_norm;
  Certificate c;
  c.objective = a.cwiseAbs().sum();
  c.gap = c.objective - lambda.dot(b).real();
  c.feasibility = (M * a - b).norm();
  c.lambda = std::move(lambda);
  return c;
}

bool accepted(const Certificate& c, double b_norm, const SolverConfig& cfg) {
  return c.feasibility <= cfg.tol_feas * (1.0 + b_norm) && c.gap <= cfg.tol_gap * (1.0 + c.objective);
}

// Newton refinement of the optimality system on a fixed support S:
//   sum_{k in S} t_k w_k M_k = b,   |w_k|^2 = 1,   w = M_S^* lambda,
// with t_k = |a_k|. Square in (t, lambda) after the real embedding; the
// steps are minimum-norm least squares so flat optimal faces do not stall.
struct PolishResult {
  VectorXcd a;
  VectorXcd lambda;
  bool converged = false;
};

PolishResult newton_on_support(const MatrixXcd& M, const VectorXcd& b, const std::vector<Index>& support,
                               VectorXd t, VectorXcd lambda) {
  const Index n = M.rows();
  const Index s = static_cast<Index>(support.size());
  MatrixXcd Ms(n, s);
  for (Index i = 0; i < s; ++i) Ms.col(i) = M.col(support[static_cast<std::size_t>(i)]);

  const double scale = 1.0 + b.norm();
  PolishResult out;
  double prev = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (int iter = 0; iter < 15; ++iter) {
    const VectorXcd w = Ms.adjoint() * lambda;
    const VectorXcd r1 = Ms * t.cwiseProduct(w).eval() - b;
    VectorXd r2(s);
    for (Index k = 0; k < s; ++k) r2[k] = std::norm(w[k]) - 1.0;
    const double res = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
    if (!std::isfinite(res)) return out;
    // done at the rounding floor, or once the quadratic phase stagnates
    if (res <= 1e-15 * scale || (res <= 1e-11 * scale && res > 0.25 * prev)) {
      out.converged = true;
      break;
    }
    stalls = res > 0.5 * prev ? stalls + 1 : 0;
    if (stalls >= 4) return out;
    prev = res;

    // rows: Re r1, Im r1, r2; columns: t, Re lambda, Im lambda
    MatrixXd J = MatrixXd::Zero(2 * n + s, s + 2 * n);
    for (Index k = 0; k < s; ++k) {
      const VectorXcd col = Ms.col(k) * w[k];
      J.block(0, k, n, 1) = col.real();
      J.block(n, k, n, 1) = col.imag();
    }
    const MatrixXcd K = Ms * t.asDiagonal() * Ms.adjoint();  // complex-linear in lambda
    J.block(0, s, n, n) = K.real();
    J.block(0, s + n, n, n) = -K.imag();
    J.block(n, s, n, n) = K.imag();
    J.block(n, s + n, n, n) = K.real();
    for (Index k = 0; k < s; ++k) {
      // d|w_k|^2 = 2 Re(conj(w_k) M_k^* dlambda)
      const Eigen::RowVectorXcd g = 2.0 * std::conj(w[k]) * Ms.col(k).adjoint();
      J.block(2 * n + k, s, 1, n) = g.real();
      J.block(2 * n + k, s + n, 1, n) = -g.imag();
    }
    VectorXd rhs(2 * n + s);
    rhs << r1.real(), r1.imag(), r2;
    // J is square; LU when it is comfortably nonsingular, else minimum norm
    Eigen::PartialPivLU<MatrixXd> lu(J);
    VectorXd step;
    if (lu.rcond() > 1e-10) {
      step = lu.solve(rhs);
    } else {
      step = J.completeOrthogonalDecomposition().solve(rhs);
    }
    if (!step.allFinite()) return out;
    t -= step.head(s);
    lambda -= VectorXcd(step.segment(s, n).cast<cplx>() + cplx(0, 1) * step.tail(n).cast<cplx>());
  }
  if (!out.converged) return out;

  const VectorXcd w = Ms.adjoint() * lambda;
  out.a = VectorXcd::Zero(M.cols());
  for (Index k = 0; k < s; ++k) {
    const double mod = std::abs(w[k]);
    out.a[support[static_cast<std::size_t>(k)]] = mod > 0 ? t[k] * w[k] / mod : cplx(0);
  }
  out.lambda = std::move(lambda);
  // a negative modulus means S carries a spurious index
  if ((t.array() < 0.0).any()) out.converged = false;
  return out;
}

// Polish from an ADMM iterate; the support is adjusted (drop indices whose
// modulus turns negative, add indices whose dual modulus exceeds one) for a
// few rounds. Returns true once an attempt certifies; `best` keeps the
// tightest feasible certificate seen either way.
bool polish(const MatrixXcd& M, const VectorXcd& b, const VectorXcd& z, const VectorXcd& lambda0,
            const SolverConfig& cfg, Certificate& best, VectorXcd& best_a) {
  std::vector<Index> support;
  for (Index k = 0; k < z.size(); ++k)
    if (z[k] != cplx(0)) support.push_back(k);
  if (support.empty()) return false;

  // a generic optimum carries at least n active columns; pad a short support
  // with the columns of largest dual modulus
  const double b_norm = b.norm();
  const double t_floor = 1e-3 * (1.0 + b_norm) / static_cast<double>(M.cols());
  if (static_cast<Index>(support.size()) < M.rows()) {
    const VectorXd w = (M.adjoint() * lambda0).cwiseAbs();
    std::vector<Index> order;
    for (Index k = 0; k < M.cols(); ++k)
      if (z[k] == cplx(0)) order.push_back(k);
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return w[i] > w[j]; });
    const std::size_t need = static_cast<std::size_t>(M.rows()) - support.size();
    support.insert(support.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(need, order.size())));
    std::sort(support.begin(), support.end());
  }

  VectorXcd lambda = lambda0;
  VectorXd t(static_cast<Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i)
    t[static_cast<Index>(i)] = std::max(std::abs(z[support[i]]), t_floor);

  for (int round = 0; round < 4; ++round) {
    PolishResult p = newton_on_support(M, b, support, t, lambda);
    if (p.a.size() == 0) return false;
    const Certificate c = certify(M, b, p.a, p.lambda);
    if (c.gap < best.gap && c.feasibility <= cfg.tol_feas * (1.0 + b_norm)) {
      best = c;
      best_a = p.a;
    }
    if (p.converged && accepted(c, b_norm, cfg)) return true;

    // adjust the support and retry
    const VectorXcd w = M.adjoint() * p.lambda;
    std::vector<Index> next;
    std::vector<double> next_t;
    for (Index k = 0; k < M.cols(); ++k) {
      const double ak = std::abs(p.a[k]);
      if (ak > 0.0 || std::abs(w[k]) > 1.0 + 1e-12) {
        next.push_back(k);
        next_t.push_back(std::max(ak, t_floor));
      }
    }
    if (next == support || next.empty()) return false;
    support = std::move(next);
    t = Eigen::Map<const VectorXd>(next_t.data(), static_cast<Index>(next_t.size()));
    lambda = p.lambda;
  }
  return false;
}

// Log-barrier path on the dual:
//   minimize  -Re <b, lambda> - tau sum_k log(1 - |w_k|^2),   w = M^* lambda,
// over the real embedding of lambda. At a centered point
// a_k = 2 tau w_k / (1 - |w_k|^2) satisfies M a = b up to the gradient, and
// the gap is sum_k 2 tau |w_k| / (1 + |w_k|) <= m tau, so driving tau down
// certifies any requested gap. Starts from lambda = 0 and needs no support
// guess, which makes it the fallback when ADMM identifies the support slowly.
bool barrier_path(const MatrixXcd& M, const VectorXcd& b, const SolverConfig& cfg, Certificate& best,
                  VectorXcd& best_a) {
  const Index n = M.rows();
  const Index m = M.cols();
  const double b_norm = b.norm();
  // rows of the real map x = (Re lambda, Im lambda) -> (Re w_k, Im w_k)
  MatrixXd Bre(m, 2 * n);
  MatrixXd Bim(m, 2 * n);
  Bre << M.real().transpose(), M.imag().transpose();
  Bim << -M.imag().transpose(), M.real().transpose();
  VectorXd g0(2 * n);
  g0 << b.real(), b.imag();

  VectorXd x = VectorXd::Zero(2 * n);
  VectorXd p = Bre * x;
  VectorXd q = Bim * x;
  auto value = [&](const VectorXd& pp, const VectorXd& qq, double tau) {
    double f = 0.0;
    for (Index k = 0; k < m; ++k) {
      const double slack = 1.0 - pp[k] * pp[k] - qq[k] * qq[k];
      if (!(slack > 0.0)) return std::numeric_limits<double>::infinity();
      f -= tau * std::log(slack);
    }
    return f;
  };

  double tau = (1.0 + b_norm) / static_cast<double>(m);
  VectorXcd a(m);
  for (int stage = 0; stage < 40; ++stage) {
    const bool last = static_cast<double>(m) * tau <= 0.5 * cfg.tol_gap;
    for (int step = 0; step < 60; ++step) {
      VectorXd grad = -g0;
      MatrixXd H = MatrixXd::Zero(2 * n, 2 * n);
      for (Index k = 0; k < m; ++k) {
        const double slack = 1.0 - p[k] * p[k] - q[k] * q[k];
        const double c1 = 2.0 * tau / slack;
        const double c2 = 4.0 * tau / (slack * slack);
        a[k] = cplx(c1 * p[k], c1 * q[k]);
        grad += c1 * (p[k] * Bre.row(k) + q[k] * Bim.row(k)).transpose();
        // tau B^T (c1 I + c2 w w^T) B, B = [Bre_k; Bim_k]
        const Eigen::RowVectorXd r = p[k] * Bre.row(k) + q[k] * Bim.row(k);
        H.noalias() += c1 * (Bre.row(k).transpose() * Bre.row(k) + Bim.row(k).transpose() * Bim.row(k));
        H.noalias() += c2 * r.transpose() * r;
      }
      const Eigen::LDLT<MatrixXd> ldlt(H);
      const VectorXd dx = -ldlt.solve(grad);
      if (!dx.allFinite()) return false;
      const double decrement = -grad.dot(dx);
      const bool polish_feasibility = last && grad.norm() > 0.1 * cfg.tol_feas * (1.0 + b_norm);
      if (decrement <= 1e-10 * tau && !polish_feasibility) break;
      if (decrement <= 0.0) break;
      const double f0 = -g0.dot(x) + value(p, q, tau);
      const VectorXd dp = Bre * dx;
      const VectorXd dq = Bim * dx;
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        const VectorXd pn = p + t * dp;
        const VectorXd qn = q + t * dq;
        const double f1 = -g0.dot(x + t * dx) + value(pn, qn, tau);
        if (std::isfinite(f1) && f1 <= f0 - 0.25 * t * decrement) {
          x += t * dx;
          p = pn;
          q = qn;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    for (Index k = 0; k < m; ++k) {
      const double slack = 1.0 - p[k] * p[k] - q[k] * q[k];
      a[k] = cplx(2.0 * tau * p[k] / slack, 2.0 * tau * q[k] / slack);
    }
    if (last) break;
    tau *= 0.1;
  }

  const VectorXcd lambda = x.head(n).cast<cplx>() + cplx(0, 1) * x.tail(n).cast<cplx>();
  const Certificate c = certify(M, b, a, lambda);
  if (c.feasibility <= cfg.tol_feas * (1.0 + b_norm) && c.gap < best.gap) {
    best = c;
    best_a = a;
  }
  if (accepted(c, b_norm, cfg)) return true;

  // the barrier point separates the support clearly; try an exact polish
  const double amax = a.cwiseAbs().maxCoeff();
  VectorXcd z = a;
  for (Index k = 0; k < m; ++k)
    if (std::abs(z[k]) <= 1e-6 * amax) z[k] = 0.0;
  return polish(M, b, z, lambda, cfg, best, best_a);
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  require(tol_feas > 0.0 && std::isfinite(tol_feas), "tol_feas must be positive");
  require(tol_gap > 0.0 && std::isfinite(tol_gap), "tol_gap must be positive");
  require(max_iter > 0, "max_iter must be positive");
  require(rho_admm > 0.0 && std::isfinite(rho_admm), "rho_admm must be positive");
}

L1Solver::L1Solver(MatrixXcd M, SolverConfig config) : M_(std::move(M)), config_(config) {
  config_.validate();
  require(M_.rows() >= 1 && M_.cols() >= 1, "constraint map must be non-empty");
  require(M_.rows() <= M_.cols(), "constraint map must have n <= m");
  require(M_.allFinite(), "constraint map must be finite");
  Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(M_);
  cod.setThreshold(kRankThreshold);
  rank_ = cod.rank();
  pinv_ = cod.pseudoInverse();
  projector_ = MatrixXcd::Identity(M_.cols(), M_.cols()) - pinv_ * M_;
}

L1Solution L1Solver::solve(const VectorXcd& b) const {
  require(b.size() == M_.rows(), "right-hand side length must equal the number of constraints");
  require(b.allFinite(), "right-hand side must be finite");
  const Index m = M_.cols();
  const double b_norm = b.norm();

  L1Solution sol;
  auto finish = [&](const VectorXcd& a, const Certificate& c, std::size_t iters, SolveStatus status) {
    sol.a = a;
    sol.objective = c.objective;
    sol.dual = c.lambda;
    sol.primal_residual = c.feasibility;
    sol.duality_gap = c.gap;
    sol.iterations = iters;
    sol.status = status;
    return sol;
  };

  if (b_norm == 0.0) {
    const VectorXcd zero = VectorXcd::Zero(m);
    return finish(zero, certify(M_, b, zero, VectorXcd::Zero(M_.rows())), 0, SolveStatus::optimal);
  }

  const VectorXcd q = pinv_ * b;
  if ((M_ * q - b).norm() > config_.tol_feas * (1.0 + b_norm)) {
    return finish(q, certify(M_, b, q, VectorXcd::Zero(M_.rows())), 0, SolveStatus::infeasible);
  }

  // unique feasible point: the dual comes from a least-squares fit of the signs
  if (rank_ == m) {
    VectorXcd sign(m);
    for (Index k = 0; k < m; ++k) sign[k] = q[k] == cplx(0) ? cplx(0) : q[k] / std::abs(q[k]);
    const Certificate c = certify(M_, b, q, pinv_.adjoint() * sign);
    return finish(q, c, 0, accepted(c, b_norm, config_) ? SolveStatus::optimal : SolveStatus::max_iter);
  }

  VectorXcd z = VectorXcd::Zero(m);
  VectorXcd u = VectorXcd::Zero(m);
  VectorXcd x(m);
  // rho_admm is relative to the natural scale m / ||q||_1, where 1 / rho is
  // the size of a typical entry of the least-norm point
  double rho = config_.rho_admm * static_cast<double>(m) / q.cwiseAbs().sum();

  Certificate best{VectorXcd::Zero(M_.rows()), q.cwiseAbs().sum(), std::numeric_limits<double>::infinity(),
                   (M_ * q - b).norm()};
  VectorXcd best_a = q;
  std::vector<Index> last_support;
  std::vector<Index> polished_support;
  std::size_t stable_checks = 0;

  for (std::size_t it = 1; it <= config_.max_iter; ++it) {
    x.noalias() = projector_ * (z - u);
    x += q;
    const VectorXcd xh = kAlpha * x + (1.0 - kAlpha) * z;
    const VectorXcd v = xh + u;
    const VectorXcd z_old = z;
    const double thr = 1.0 / rho;
    for (Index k = 0; k < m; ++k) {
      const double mod = std::abs(v[k]);
      z[k] = mod > thr ? v[k] * ((mod - thr) / mod) : cplx(0);
    }
    u += xh - z;

    if (it % kCheckEvery != 0 && it != config_.max_iter) continue;

    const VectorXcd lambda = pinv_.adjoint() * (rho * u);
    const Certificate c = certify(M_, b, x, lambda);
    if (c.gap < best.gap) {
      best = c;
      best_a = x;
    }
    if (accepted(c, b_norm, config_)) {
      // sharpen the accepted pair; polish only ever replaces it by a tighter one
      Certificate pc = c;
      VectorXcd pa = x;
      polish(M_, b, z, lambda, config_, pc, pa);
      return finish(pa, pc, it, SolveStatus::optimal);
    }

    std::vector<Index> support;
    for (Index k = 0; k < m; ++k)
      if (z[k] != cplx(0)) support.push_back(k);
    stable_checks = support == last_support ? stable_checks + 1 : 0;
    last_support = support;
    // a generic optimum has at least n active columns; shorter supports are
    // only tried once they have persisted for a long stretch
    const bool plausible = static_cast<Index>(support.size()) >= M_.rows() || stable_checks >= 10;
    if (stable_checks >= 2 && plausible && support != polished_support) {
      polished_support = support;
      Certificate pc = best;
      VectorXcd pa = best_a;
      if (polish(M_, b, z, lambda, config_, pc, pa)) return finish(pa, pc, it, SolveStatus::optimal);
      if (pc.gap < best.gap) {
        best = pc;
        best_a = pa;
      }
    }

    if (it == std::min(kBarrierAfter, config_.max_iter)) {
      Certificate bc = best;
      VectorXcd ba = best_a;
      if (barrier_path(M_, b, config_, bc, ba)) return finish(ba, bc, it, SolveStatus::optimal);
      if (bc.gap < best.gap) {
        best = bc;
        best_a = ba;
      }
    }

    const double r_norm = (x - z).norm();
    const double s_norm = rho * (z - z_old).norm();
    if (r_norm > kBalance * s_norm) {
      rho *= kRhoStep;
      u /= kRhoStep;
    } else if (s_norm > kBalance * r_norm) {
      rho /= kRhoStep;
      u *= kRhoStep;
    }
  }
  return finish(best_a, best, config_.max_iter, SolveStatus::max_iter);
}

L1Solution solve(const ComplexL1Problem& problem, const SolverConfig& config) {
  require(problem.b.size() == problem.M.rows(), "right-hand side length must equal the number of constraints");
  return L1Solver(problem.M, config).solve(problem.b);
}

CertificateReport check_certificate(const ComplexL1Problem& problem, const L1Solution& solution) {
  require(solution.a.size() == problem.M.cols(), "solution length must equal the number of columns");
  require(solution.dual.size() == problem.M.rows(), "dual length must equal the number of rows");
  CertificateReport report{};
  report.feasibility = (problem.M * solution.a - problem.b).norm();
  const VectorXcd w = problem.M.adjoint() * solution.dual;
  report.block_dual_norm = w.size() == 0 ? 0.0 : w.cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, report.block_dual_norm);
  double primal = 0.0;
  for (Index k = 0; k < solution.a.size(); ++k) primal += std::abs(solution.a[k]);
  cplx pairing(0.0, 0.0);
  for (Index j = 0; j < problem.b.size(); ++j) pairing += problem.b[j] * std::conj(solution.dual[j]);
  report.gap = primal - pairing.real() / scale;
  return report;
}

}  // namespace optrec::cone
