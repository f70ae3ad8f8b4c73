#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

/// The sysid command set: configuration merging, the experiment sweeps and
/// their deterministic CSV/JSON renderings.
namespace optrec::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitConditioning = 3,
  kExitSolver = 4,
  kExitOracle = 5,
};

enum class Scheme { equi, random, both };

/// Parameters of every subcommand. Values come from the defaults, then the
/// JSON config (flat object, kebab-case keys as the flags), then the flags.
struct RunConfig {
  std::string command;
  std::optional<std::size_t> m;       ///< 64 unless set (oracle: random shape)
  std::optional<std::vector<std::size_t>> n;  ///< per-command default when empty
  double r = 0.5;
  Scheme scheme = Scheme::both;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;              ///< random schemes run seed, seed + 1, ...
  std::optional<double> zeta0_angle;  ///< pi / m unless set
  std::optional<std::size_t> grid_size;  ///< 8 m unless set
  double tol_feas = 1e-9;
  double tol_gap = 1e-8;
  double admm_rho = 1.0;
  std::size_t max_iter = 50000;
  double rho = 2.0;                   ///< model decay rate
  double M = 1.0;                     ///< model scale
  std::size_t threads = 0;
  std::size_t instances = 100;
  std::size_t samples = 1000;
  std::optional<std::size_t> d;
  std::optional<double> epsilon;
  bool zero_data = false;
  std::string out;                    ///< empty: standard output

  std::size_t resolved_m() const { return m.value_or(64); }
  double resolved_zeta0_angle() const;
  std::size_t resolved_grid_size() const;
  /// The n values of the sweep; `m` is the configuration size.
  std::vector<std::size_t> resolved_n() const;
};

std::string to_string(Scheme scheme);

/// Parses "5", "a:b" (inclusive) or "a,b,c". Throws PreconditionError.
std::vector<std::size_t> parse_n_spec(const std::string& text);

/// Checks every precondition that does not need a computation. Throws
/// PreconditionError naming the violated condition.
void validate(const RunConfig& config);

struct CommandResult {
  std::string text;         ///< CSV or JSON document
  int exit_code = kExitOk;
  std::vector<std::string> diagnostics;  ///< one line per annotated row
};

CommandResult cmd_mu_h2(const RunConfig& config);
CommandResult cmd_identify(const RunConfig& config);
CommandResult cmd_mu_da(const RunConfig& config);
CommandResult cmd_estimate(const RunConfig& config);
CommandResult cmd_kappa(const RunConfig& config);
CommandResult cmd_oracle(const RunConfig& config);

/// Dispatches on config.command.
CommandResult run(const RunConfig& config);

/// Full command-line entry point: parsing, config merge, dispatch and output.
int main_entry(int argc, const char* const* argv);

}  // namespace optrec::cli
