#include "optrec/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "optrec/da_estimate.hpp"
#include "optrec/h2_identify.hpp"
#include "optrec/recovery_oracle.hpp"
#include "parallel.hpp"

namespace optrec::cli {

namespace {

using hardy::cplx;
using hardy::PointConfiguration;
using json = nlohmann::ordered_json;

constexpr double kRoundoff = std::numeric_limits<double>::epsilon();
constexpr double kRelativeSlack = 1e-12;

const std::vector<std::string> kCommands = {"mu-h2", "identify", "mu-da", "estimate", "kappa", "oracle"};

void require(bool condition, const std::string& what) {
  if (!condition) throw PreconditionError(what);
}

bool is_circle_command(const std::string& c) { return c == "mu-h2" || c == "identify"; }
bool is_torus_command(const std::string& c) { return c == "mu-da" || c == "estimate" || c == "kappa"; }

// ---- CSV -------------------------------------------------------------------

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string integer(std::uint64_t v) { return std::to_string(v); }

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

// ---- sweeps ----------------------------------------------------------------

struct Job {
  hardy::PointScheme scheme;
  std::uint64_t seed;
  PointConfiguration config;
};

struct JobOutput {
  std::vector<std::string> rows;
  std::vector<std::string> diagnostics;
  int exit_code = kExitOk;

  void fail(int code, std::string message) {
    exit_code = std::max(exit_code, code);
    diagnostics.push_back(std::move(message));
  }
};

std::vector<std::uint64_t> seed_list(const RunConfig& config) {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < config.seeds; ++i) out.push_back(config.seed + i);
  return out;
}

// Equispaced jobs are seed-independent unless the seed drives a sampled
// model function (`per_seed_equi`).
std::vector<Job> plan_jobs(const RunConfig& config, bool torus, bool per_seed_equi) {
  const std::size_t m = config.resolved_m();
  std::vector<Job> jobs;
  if (config.scheme != Scheme::random) {
    const auto seeds = per_seed_equi ? seed_list(config) : std::vector<std::uint64_t>{config.seed};
    for (const auto s : seeds) {
      jobs.push_back(torus ? Job{hardy::PointScheme::equispaced_torus, s, hardy::equispaced_torus(m)}
                           : Job{hardy::PointScheme::equispaced_circle, s, hardy::equispaced_circle(m, config.r)});
    }
  }
  if (config.scheme != Scheme::equi) {
    for (const auto s : seed_list(config)) {
      jobs.push_back(torus ? Job{hardy::PointScheme::random_torus, s, hardy::random_torus(m, s)}
                           : Job{hardy::PointScheme::random_circle, s, hardy::random_circle(m, config.r, s)});
    }
  }
  return jobs;
}

CommandResult assemble(const std::string& header, std::vector<JobOutput> outputs) {
  CommandResult result;
  result.text = header;
  for (auto& o : outputs) {
    for (const auto& row : o.rows) result.text += row;
    for (auto& d : o.diagnostics) result.diagnostics.push_back(std::move(d));
    result.exit_code = std::max(result.exit_code, o.exit_code);
  }
  return result;
}

template <typename Body>
CommandResult sweep(const RunConfig& config, const std::vector<Job>& jobs, const std::string& header, Body body) {
  std::vector<JobOutput> outputs(jobs.size());
  detail::parallel_for(
      jobs.size(), [&](std::size_t i) { outputs[i] = body(jobs[i]); }, config.threads);
  return assemble(header, std::move(outputs));
}

std::string describe_row(const Job& job, std::size_t n) {
  std::ostringstream os;
  os << hardy::to_string(job.scheme) << " seed " << job.seed << " n " << n;
  return os.str();
}

cone::SolverConfig solver_config(const RunConfig& config) {
  cone::SolverConfig s;
  s.tol_feas = config.tol_feas;
  s.tol_gap = config.tol_gap;
  s.max_iter = config.max_iter;
  s.rho_admm = config.admm_rho;
  return s;
}

hardy::ModelSetParams model_params(const RunConfig& config, std::size_t n) {
  hardy::ModelSetParams p;
  p.n = n;
  p.rho = config.rho;
  p.M = config.M;
  return p;
}

std::size_t model_truncation(const RunConfig& config) {
  return std::max(hardy::default_truncation(config.rho), config.resolved_m() + 1);
}

std::size_t max_n(const std::vector<std::size_t>& ns) { return *std::max_element(ns.begin(), ns.end()); }

// ---- config values -----------------------------------------------------------

std::string key_text(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw PreconditionError("config key '" + key + "' must be a scalar");
}

std::uint64_t to_unsigned(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    require(v.get<std::int64_t>() >= 0, "'" + key + "' must be a nonnegative integer");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  const std::string s = key_text(key, v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  require(ec == std::errc() && ptr == s.data() + s.size() && !s.empty(),
          "'" + key + "' must be a nonnegative integer, got '" + s + "'");
  return out;
}

double to_real(const std::string& key, const json& v) {
  double out = 0.0;
  if (v.is_number()) {
    out = v.get<double>();
  } else {
    const std::string s = key_text(key, v);
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    require(!s.empty() && end == s.c_str() + s.size(), "'" + key + "' must be a real number, got '" + s + "'");
  }
  require(std::isfinite(out), "'" + key + "' must be finite");
  return out;
}

bool to_bool(const std::string& key, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  const std::string s = key_text(key, v);
  require(s == "true" || s == "false", "'" + key + "' must be true or false");
  return s == "true";
}

std::vector<std::size_t> to_n(const std::string& key, const json& v) {
  if (v.is_array()) {
    std::vector<std::size_t> out;
    for (const auto& e : v) out.push_back(static_cast<std::size_t>(to_unsigned(key, e)));
    require(!out.empty(), "'n' list must not be empty");
    return out;
  }
  if (v.is_number()) return {static_cast<std::size_t>(to_unsigned(key, v))};
  return parse_n_spec(key_text(key, v));
}

Scheme to_scheme(const std::string& key, const json& v) {
  const std::string s = key_text(key, v);
  if (s == "equi") return Scheme::equi;
  if (s == "random") return Scheme::random;
  if (s == "both") return Scheme::both;
  throw PreconditionError("'scheme' must be equi, random or both, got '" + s + "'");
}

void apply(RunConfig& c, const std::string& key, const json& v) {
  if (key == "m") c.m = static_cast<std::size_t>(to_unsigned(key, v));
  else if (key == "n") c.n = to_n(key, v);
  else if (key == "r") c.r = to_real(key, v);
  else if (key == "scheme") c.scheme = to_scheme(key, v);
  else if (key == "seed") c.seed = to_unsigned(key, v);
  else if (key == "seeds") c.seeds = static_cast<std::size_t>(to_unsigned(key, v));
  else if (key == "zeta0-angle") c.zeta0_angle = to_real(key, v);
  else if (key == "grid-size") c.grid_size = static_cast<std::size_t>(to_unsigned(key, v));
  else if (key == "tol-feas") c.tol_feas = to_real(key, v);
  else if (key == "tol-gap") c.tol_gap = to_real(key, v);
  else if (key == "admm-rho") c.admm_rho = to_real(key, v);
  else if (key == "max-iter") c.max_iter = static_cast<std::size_t>(to_unsigned(key, v));
  else if (key == "rho") c.rho = to_real(key, v);
  else if (key == "M") c.M = to_real(key, v);
  else if (key == "threads") c.threads = static_cast<std::size_t>(to_unsigned(key, v));
  else if (key == "instances") c.instances = static_cast<std::size_t>(to_unsigned(key, v));
  else if (key == "samples") c.samples = static_cast<std::size_t>(to_unsigned(key, v));
  else if (key == "d") c.d = static_cast<std::size_t>(to_unsigned(key, v));
  else if (key == "epsilon") c.epsilon = to_real(key, v);
  else if (key == "zero-data") c.zero_data = to_bool(key, v);
  else if (key == "out") c.out = key_text(key, v);
  else throw PreconditionError("unknown config key '" + key + "'");
}

const std::vector<std::string> kValueKeys = {"m",        "n",        "r",         "scheme",  "seed",  "seeds",
                                             "zeta0-angle", "grid-size", "tol-feas", "tol-gap", "admm-rho",
                                             "max-iter", "rho",      "M",         "threads", "instances",
                                             "samples",  "d",        "epsilon",   "out"};

const std::map<std::string, std::string> kValueHelp = {
    {"m", "number of sample points (default 64)"},
    {"n", "model dimension: k, a:b or a,b,c (default 1..m)"},
    {"r", "circle radius, 0 <= r < 1 (default 0.5)"},
    {"scheme", "equi, random or both (default both)"},
    {"seed", "first seed (default 1)"},
    {"seeds", "number of random seeds (default 1)"},
    {"zeta0-angle", "evaluation point angle in radians (default pi/m)"},
    {"grid-size", "kappa grid size, >= 8m (default 8m)"},
    {"tol-feas", "solver feasibility tolerance (default 1e-9)"},
    {"tol-gap", "solver relative gap tolerance (default 1e-8)"},
    {"admm-rho", "initial ADMM penalty multiplier (default 1)"},
    {"max-iter", "solver iteration limit (default 50000)"},
    {"rho", "model decay rate, > 1 (default 2)"},
    {"M", "model scale, > 0 (default 1)"},
    {"threads", "worker threads, 0 = all cores (default 0)"},
    {"instances", "oracle: number of instances (default 100)"},
    {"samples", "oracle: Monte-Carlo samples per instance (default 1000)"},
    {"d", "oracle: ambient dimension (with --m and --n)"},
    {"epsilon", "oracle: model set radius (default drawn per instance)"},
    {"out", "output file (default standard output)"},
};

}  // namespace

// ---- RunConfig ----------------------------------------------------------------

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::equi: return "equi";
    case Scheme::random: return "random";
    case Scheme::both: return "both";
  }
  return "both";
}

double RunConfig::resolved_zeta0_angle() const {
  return zeta0_angle.value_or(hardy::kPi / static_cast<double>(resolved_m()));
}

std::size_t RunConfig::resolved_grid_size() const { return grid_size.value_or(8 * resolved_m()); }

std::vector<std::size_t> RunConfig::resolved_n() const {
  if (n) return *n;
  const std::size_t mm = resolved_m();
  std::vector<std::size_t> out;
  if (command == "kappa") {
    out = {1, mm / 8, mm / 4, mm / 2, 3 * mm / 4, 7 * mm / 8, 15 * mm / 16, mm - 1, mm};
    out.erase(std::remove(out.begin(), out.end(), std::size_t{0}), out.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  } else {
    for (std::size_t k = 1; k <= mm; ++k) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> parse_n_spec(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(!s.empty() && ec == std::errc() && ptr == s.data() + s.size(),
            "'n' must be an integer, a range a:b or a list a,b,c; got '" + text + "'");
    require(v >= 1, "'n' values must be at least 1");
    return v;
  };
  std::vector<std::size_t> out;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const std::size_t a = number(text.substr(0, colon));
    const std::size_t b = number(text.substr(colon + 1));
    require(a <= b, "'n' range a:b needs a <= b");
    for (std::size_t k = a; k <= b; ++k) out.push_back(k);
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(number(text.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void validate(const RunConfig& c) {
  require(std::find(kCommands.begin(), kCommands.end(), c.command) != kCommands.end(),
          "unknown command '" + c.command + "'");
  require(c.seeds >= 1, "seeds >= 1");

  if (c.command == "oracle") {
    require(c.instances >= 1, "instances >= 1");
    if (c.d) {
      require(c.m && c.n, "an oracle shape needs --d, --m and a single --n");
      require(c.n->size() == 1, "oracle --n must be a single value");
      require(*c.d <= 64, "oracle dimensions limited to d <= 64");
      require(*c.m >= 1 && *c.m <= *c.d, "oracle shape needs 1 <= m <= d");
      require(c.n->front() <= *c.d, "oracle shape needs n <= d");
    } else {
      require(!c.m && !c.n, "oracle --m/--n need --d");
    }
    if (c.epsilon) require(*c.epsilon >= 0.0, "epsilon >= 0");
    return;
  }

  const std::size_t m = c.resolved_m();
  require(m >= 1, "m >= 1");
  const auto ns = c.resolved_n();
  require(!ns.empty(), "at least one n");
  for (const auto n : ns) require(n >= 1 && n <= m, "every n must satisfy 1 <= n <= m");

  if (is_circle_command(c.command)) {
    require(c.r >= 0.0 && c.r < 1.0, "radius must satisfy 0 <= r < 1");
    require(c.r > 0.0 || m == 1, "radius r = 0 only for m = 1");
  }
  if (c.command == "identify" || c.command == "estimate") model_params(c, 1).validate();
  if (is_torus_command(c.command)) solver_config(c).validate();
  if (c.command == "kappa") {
    require(c.scheme != Scheme::random, "kappa uses the equispaced torus only");
    require(c.resolved_grid_size() >= 8 * m, "grid_size must be at least 8 m");
  }
}

// ---- commands -----------------------------------------------------------------

CommandResult cmd_mu_h2(const RunConfig& config) {
  validate(config);
  const auto ns = config.resolved_n();
  const auto jobs = plan_jobs(config, false, false);
  const std::string header = "experiment,point_scheme,m,n,r,seed,mu,mu_closed_form,rcond,status\n";
  return sweep(config, jobs, header, [&](const Job& job) {
    JobOutput out;
    const std::size_t m = job.config.size();
    const bool equi = job.scheme == hardy::PointScheme::equispaced_circle;
    const h2::GramPair gram = h2::build_gram_pair(job.config, max_n(ns));
    std::vector<double> mus;
    std::string status = "ok";
    try {
      mus = h2::compatibility_sweep(gram);
    } catch (const IllConditionedError& e) {
      status = "ill_conditioned";
      out.fail(kExitConditioning, describe_row(job, max_n(ns)) + ": " + e.what());
    }
    const std::string closed = equi ? real(h2::equispaced_mu_closed_form(config.r, m)) : "";
    for (const auto n : ns) {
      out.rows.push_back(join({"mu-h2", hardy::to_string(job.scheme), integer(m), integer(n), real(config.r),
                               integer(job.seed), mus.empty() ? "" : real(mus[n - 1]), closed,
                               real(gram.rcond()), status}));
    }
    return out;
  });
}

CommandResult cmd_identify(const RunConfig& config) {
  validate(config);
  const auto ns = config.resolved_n();
  const auto jobs = plan_jobs(config, false, true);
  const std::size_t N = model_truncation(config);
  const std::string header = "experiment,point_scheme,m,n,r,seed,mu,h2_error,eps_n,bound,slack,M,rho,N,status\n";
  return sweep(config, jobs, header, [&](const Job& job) {
    JobOutput out;
    const std::size_t m = job.config.size();
    const h2::GramPair gram = h2::build_gram_pair(job.config, max_n(ns));
    const hardy::TaylorSeries truth = hardy::sample_model_function(model_params(config, 1), N, job.seed);
    std::vector<double> mus;
    try {
      mus = h2::compatibility_sweep(gram);
    } catch (const IllConditionedError& e) {
      out.fail(kExitConditioning, describe_row(job, max_n(ns)) + ": " + e.what());
    }
    for (const auto n : ns) {
      std::vector<std::string> row = {"identify", hardy::to_string(job.scheme), integer(m), integer(n),
                                      real(config.r), integer(job.seed)};
      const double eps_n = hardy::tail_norm(truth, n);
      std::string status = "ill_conditioned";
      std::string mu_cell, err_cell, bound_cell, slack_cell;
      if (!mus.empty()) {
        const double mu = mus[n - 1];
        const double err = h2::h2_error(truth, h2::optimal_identify(gram.leading(n), truth));
        const double bound = mu * eps_n;
        // The bound can be attained up to terms far below double resolution
        // (equispaced, n = m), so the comparison allows a relative rounding slack.
        const double slack = kRelativeSlack * bound;
        status = "ok";
        if (!(err <= bound + slack)) {
          status = "bound_violation";
          out.fail(kExitOracle, describe_row(job, n) + ": h2_error " + real(err) + " exceeds bound " + real(bound));
        }
        mu_cell = real(mu);
        err_cell = real(err);
        bound_cell = real(bound);
        slack_cell = real(slack);
      }
      row.insert(row.end(), {mu_cell, err_cell, real(eps_n), bound_cell, slack_cell, real(config.M), real(config.rho),
                             integer(N), status});
      out.rows.push_back(join(row));
    }
    return out;
  });
}

namespace {

struct DaRow {
  std::vector<std::string> cells;
  da::EstimationWeights weights;
  bool optimal = false;
};

DaRow da_row(const std::string& experiment, const Job& job, std::size_t n, cplx zeta0,
             const cone::SolverConfig& solver, JobOutput& out) {
  DaRow r;
  r.weights = da::optimal_weights(job.config, zeta0, n, solver);
  r.optimal = r.weights.solution.status == cone::SolveStatus::optimal;
  if (!r.optimal) {
    out.fail(kExitSolver, describe_row(job, n) + ": weight program status " +
                              cone::to_string(r.weights.solution.status));
  }
  r.cells = {experiment,        hardy::to_string(job.scheme), integer(job.config.size()), integer(n),
             real(zeta0.real()), real(zeta0.imag()),           integer(job.seed),          real(r.weights.mu),
             real(r.weights.certificate.gap)};
  return r;
}

std::vector<std::string> da_tail(const DaRow& r, const cone::SolverConfig& solver, const std::string& status) {
  return {real(r.weights.certificate.feasibility), real(r.weights.monomial_residual), real(solver.tol_feas), real(solver.tol_gap),
          integer(r.weights.solution.iterations), r.optimal ? status : cone::to_string(r.weights.solution.status)};
}

void check_zeta0(const std::vector<Job>& jobs, cplx zeta0, std::size_t n) {
  for (const auto& job : jobs) da::build_estimation_problem(job.config, zeta0, n);
}

}  // namespace

CommandResult cmd_mu_da(const RunConfig& config) {
  validate(config);
  const auto ns = config.resolved_n();
  const auto jobs = plan_jobs(config, true, false);
  const cplx zeta0 = std::polar(1.0, config.resolved_zeta0_angle());
  check_zeta0(jobs, zeta0, 1);
  const cone::SolverConfig solver = solver_config(config);
  const std::string header =
      "experiment,point_scheme,m,n,zeta0_re,zeta0_im,seed,mu,gap,feasibility,monomial_residual,tol_feas,tol_gap,iterations,status\n";
  return sweep(config, jobs, header, [&](const Job& job) {
    JobOutput out;
    for (const auto n : ns) {
      DaRow r = da_row("mu-da", job, n, zeta0, solver, out);
      const auto tail = da_tail(r, solver, "ok");
      r.cells.insert(r.cells.end(), tail.begin(), tail.end());
      out.rows.push_back(join(r.cells));
    }
    return out;
  });
}

CommandResult cmd_estimate(const RunConfig& config) {
  validate(config);
  const auto ns = config.resolved_n();
  const auto jobs = plan_jobs(config, true, true);
  const cplx zeta0 = std::polar(1.0, config.resolved_zeta0_angle());
  check_zeta0(jobs, zeta0, 1);
  const cone::SolverConfig solver = solver_config(config);
  const std::size_t N = model_truncation(config);
  const std::string header =
      "experiment,point_scheme,m,n,zeta0_re,zeta0_im,seed,mu,gap,est_error,bound,eps,slack,M,rho,N,"
      "feasibility,monomial_residual,tol_feas,tol_gap,iterations,status\n";
  return sweep(config, jobs, header, [&](const Job& job) {
    JobOutput out;
    const hardy::TaylorSeries truth = hardy::sample_model_function(model_params(config, 1), N, job.seed);
    Eigen::VectorXcd y(job.config.points.size());
    for (Eigen::Index k = 0; k < y.size(); ++k) y[k] = hardy::eval_series(truth, job.config.points[k]);
    const cplx target = hardy::eval_series(truth, zeta0);
    const double coeff_l1 = truth.coeffs().cwiseAbs().sum();
    for (const auto n : ns) {
      DaRow r = da_row("estimate", job, n, zeta0, solver, out);
      const double err = std::abs(target - da::estimate(r.weights, y));
      const double eps = hardy::tail_l1(truth, n);
      const double bound = r.weights.mu * eps;
      // Residual of the moment equations against the retained polynomial,
      // plus rounding in the two evaluations.
      const double slack = r.weights.monomial_residual * truth.coeffs().head(n).norm() +
                           64.0 * kRoundoff * r.weights.mu * coeff_l1;
      std::string status = "ok";
      if (!(err <= bound + slack)) {
        status = "bound_violation";
        out.fail(kExitOracle, describe_row(job, n) + ": est_error " + real(err) + " exceeds bound " + real(bound));
      }
      r.cells.insert(r.cells.end(), {real(err), real(bound), real(eps), real(slack), real(config.M),
                                     real(config.rho), integer(N)});
      const auto tail = da_tail(r, solver, status);
      r.cells.insert(r.cells.end(), tail.begin(), tail.end());
      out.rows.push_back(join(r.cells));
    }
    return out;
  });
}

CommandResult cmd_kappa(const RunConfig& config) {
  validate(config);
  const std::size_t m = config.resolved_m();
  const std::size_t grid = config.resolved_grid_size();
  const cone::SolverConfig solver = solver_config(config);
  CommandResult result;
  result.text = "experiment,m,n,mu_sup,kappa,reference,ratio,grid_size,max_gap,tol_feas,tol_gap,status\n";
  for (const auto n : config.resolved_n()) {
    std::vector<std::string> row = {"kappa", integer(m), integer(n)};
    try {
      const da::KappaRow k = da::kappa_shape_sweep(m, {n}, grid, solver, config.threads).front();
      row.insert(row.end(), {real(k.mu_sup), real(k.kappa), real(k.reference), k.ratio ? real(*k.ratio) : "",
                             integer(grid), real(k.max_gap), real(solver.tol_feas), real(solver.tol_gap), "ok"});
    } catch (const SolverError& e) {
      const double reference = std::log(static_cast<double>(m) / static_cast<double>(m - n + 1));
      row.insert(row.end(), {"", "", real(reference), "", integer(grid), "", real(solver.tol_feas),
                             real(solver.tol_gap), "not_converged"});
      result.exit_code = std::max<int>(result.exit_code, kExitSolver);
      result.diagnostics.push_back("kappa n " + integer(n) + ": " + e.what());
    }
    result.text += join(row);
  }
  return result;
}

CommandResult cmd_oracle(const RunConfig& config) {
  validate(config);
  oracle::OracleSuiteConfig suite;
  suite.seed = config.seed;
  suite.instances = config.instances;
  suite.samples = config.samples;
  suite.epsilon = config.epsilon;
  suite.zero_data = config.zero_data;
  if (config.d) suite.shape = oracle::InstanceShape{*config.d, *config.m, config.n->front()};

  json doc;
  doc["command"] = "oracle";
  doc["seed"] = config.seed;
  doc["instances"] = config.instances;
  doc["samples"] = config.samples;
  doc["zero_data"] = config.zero_data;
  if (suite.shape) doc["shape"] = {{"d", suite.shape->d}, {"m", suite.shape->m}, {"n", suite.shape->n}};
  doc["epsilon"] = config.epsilon ? json(*config.epsilon) : json(nullptr);

  CommandResult result;
  try {
    const oracle::OracleSuiteReport report = oracle::run_oracle_suite(suite);
    doc["all_passed"] = report.all_passed();
    json checks = json::array();
    for (const auto& c : report.checks) {
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"worst", c.worst}, {"tolerance", c.tolerance},
                        {"cases", c.cases}});
      if (!c.passed) result.diagnostics.push_back("oracle check failed: " + c.name + " worst " + real(c.worst));
    }
    doc["checks"] = checks;
    json instances = json::array();
    for (const auto& s : report.instances) {
      instances.push_back({{"seed", s.seed},
                           {"d", s.shape.d},
                           {"m", s.shape.m},
                           {"n", s.shape.n},
                           {"epsilon", s.epsilon},
                           {"min_distance", s.min_distance},
                           {"mu", s.mu_infinite ? json("inf") : json(s.mu)},
                           {"local_radius", s.mu_infinite ? json("inf") : json(s.radius)}});
    }
    doc["instance_summary"] = instances;
    result.exit_code = report.all_passed() ? kExitOk : kExitOracle;
  } catch (const EmptyFeasibleSetError& e) {
    doc["all_passed"] = false;
    doc["error"] = {{"type", "empty_feasible_set"}, {"message", e.what()}};
    result.exit_code = kExitConfig;
    result.diagnostics.push_back(std::string("empty feasible set: ") + e.what());
  }
  result.text = doc.dump(2) + "\n";
  return result;
}

CommandResult run(const RunConfig& config) {
  if (config.command == "mu-h2") return cmd_mu_h2(config);
  if (config.command == "identify") return cmd_identify(config);
  if (config.command == "mu-da") return cmd_mu_da(config);
  if (config.command == "estimate") return cmd_estimate(config);
  if (config.command == "kappa") return cmd_kappa(config);
  if (config.command == "oracle") return cmd_oracle(config);
  throw PreconditionError("unknown command '" + config.command + "'");
}

// ---- entry point ----------------------------------------------------------------

int main_entry(int argc, const char* const* argv) {
  CLI::App app{"Optimal recovery of transfer functions from frequency samples"};
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, CLI::App*> subcommands;
  std::string config_path;
  bool zero_data = false;
  std::map<std::string, CLI::Option*> config_opts;
  std::map<std::string, CLI::Option*> zero_opts;

  const std::map<std::string, std::string> help = {
      {"mu-h2", "H2 compatibility indicator versus n"},
      {"identify", "H2 identification error of sampled model functions versus n"},
      {"mu-da", "disc-algebra indicator at zeta0 versus n"},
      {"estimate", "disc-algebra estimation error at zeta0 versus n"},
      {"kappa", "grid supremum of the disc-algebra indicator on the equispaced torus"},
      {"oracle", "finite-dimensional recovery invariant suite (JSON)"},
  };
  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    subcommands[name] = sub;
    for (const auto& key : kValueKeys)
      options[name + "/" + key] = sub->add_option("--" + key, values[key], kValueHelp.at(key));
    config_opts[name] = sub->add_option("--config", config_path, "JSON config file (flat, kebab-case keys)");
    zero_opts[name] = sub->add_flag("--zero-data", zero_data, "oracle: instances with y = 0");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  std::string command;
  for (const auto& [name, sub] : subcommands) {
    if (sub->parsed()) command = name;
  }

  CommandResult result;
  RunConfig config;
  config.command = command;
  try {
    if (config_opts[command]->count() > 0) {
      std::ifstream in(config_path);
      require(static_cast<bool>(in), "cannot read config file '" + config_path + "'");
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw PreconditionError("config file '" + config_path + "' is not valid JSON: " + e.what());
      }
      require(doc.is_object(), "config file must hold a flat JSON object");
      for (const auto& [key, v] : doc.items()) apply(config, key, v);
    }
    for (const auto& key : kValueKeys) {
      if (options[command + "/" + key]->count() > 0) apply(config, key, json(values[key]));
    }
    if (zero_opts[command]->count() > 0) config.zero_data = zero_data;
    validate(config);
    result = run(config);
  } catch (const PreconditionError& e) {
    std::cerr << "sysid: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IllConditionedError& e) {
    std::cerr << "sysid: ill-conditioned configuration: " << e.what() << "\n";
    return kExitConditioning;
  } catch (const SolverError& e) {
    std::cerr << "sysid: solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const Error& e) {
    std::cerr << "sysid: " << e.what() << "\n";
    return kExitConfig;
  }

  if (config.out.empty()) {
    std::cout << result.text << std::flush;
  } else {
    std::ofstream file(config.out, std::ios::binary | std::ios::trunc);
    file << result.text;
    if (!file) {
      std::cerr << "sysid: cannot write '" << config.out << "'\n";
      return kExitConfig;
    }
  }
  for (const auto& d : result.diagnostics) std::cerr << "sysid: " << d << "\n";
  return result.exit_code;
}

}  // namespace optrec::cli
