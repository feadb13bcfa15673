#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ucadmm/admm.hpp"

namespace ucadmm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCap = 2;
inline constexpr int kExitUsage = 64;

struct RunConfig {
  std::string case_path;
  std::optional<std::string> scenario_path;
  std::optional<int> horizon;
  std::optional<double> discount;
  std::optional<std::string> profile_csv;
  Penalties rho;
  double tau = 6.0;
  double theta = 0.8;
  double eps = 1e-3;
  int max_outer = 100;
  int max_inner = 1000;
  int max_total_inner = 0;
  std::size_t workers = 1;
  std::string out_dir = "ucadmm-out";
  std::uint64_t seed = 0;
  bool fixed_on = false;
  bool warm_start = true;
  bool quiet = false;
};

/// Worker count from UCADMM_WORKERS, else 1.
std::size_t default_workers();

/// Config validation and problem assembly; throws ValidationError on bad
/// settings, ParseError on unreadable inputs.
ScheduleProblem load_problem(const RunConfig& cfg, double* warm_threshold = nullptr);
AdmmOptions solver_options(const RunConfig& cfg);

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct DpBenchRow {
  std::size_t generators = 0;
  int horizon = 0;
  int repetitions = 0;
  double median_seconds = 0.0;
  double min_seconds = 0.0;
};

/// Times dp_solve over a batch of random instances; instance streams depend
/// only on (seed, horizon).
DpBenchRow bench_dp(std::size_t generators, int horizon, std::uint64_t seed, int repetitions);
int cmd_bench_dp(std::size_t generators, const std::vector<int>& horizons, std::uint64_t seed,
                 int repetitions, std::ostream& out);

int cmd_check(const std::string& case_path, std::ostream& out, std::ostream& err);

/// Full command line, subcommand first.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ucadmm::cli
