#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "ucadmm/errors.hpp"
#include "ucadmm/grid.hpp"
#include "ucadmm/report_io.hpp"
#include "ucadmm/scenario.hpp"
#include "ucadmm/uc_dp.hpp"

namespace ucadmm::cli {

std::size_t default_workers() {
  if (const char* env = std::getenv("UCADMM_WORKERS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

ScheduleProblem load_problem(const RunConfig& cfg, double* warm_threshold) {
  if (!std::filesystem::exists(cfg.case_path)) {
    throw ValidationError("case file not found: " + cfg.case_path);
  }
  ScenarioFile sc;
  if (cfg.scenario_path) {
    if (!std::filesystem::exists(*cfg.scenario_path)) {
      throw ValidationError("scenario file not found: " + *cfg.scenario_path);
    }
    sc = load_scenario(*cfg.scenario_path);
  }
  const GridCase grid = load_matpower(cfg.case_path);

  const auto profile_path = cfg.profile_csv ? cfg.profile_csv : sc.profile_csv;
  std::optional<int> horizon = cfg.horizon ? cfg.horizon : sc.horizon;
  DemandProfile profile;
  if (profile_path) {
    profile.factors = read_profile_csv(*profile_path);
    if (!horizon) horizon = static_cast<int>(profile.factors.size());
    if (static_cast<int>(profile.factors.size()) != *horizon) {
      throw ValidationError("profile has " + std::to_string(profile.factors.size()) +
                            " factors but the horizon is " + std::to_string(*horizon));
    }
  } else {
    profile = default_profile(horizon.value_or(24));
  }
  if (auto d = cfg.discount ? cfg.discount : sc.discount) profile.discount = *d;
  if (warm_threshold && sc.warm_start_threshold) *warm_threshold = *sc.warm_start_threshold;
  return build_problem(grid, profile, sc.overrides);
}

AdmmOptions solver_options(const RunConfig& cfg) {
  if (!(cfg.rho.rho_pq > 0 && cfg.rho.rho_va > 0 && cfg.rho.rho_uc > 0)) {
    throw ValidationError("penalties must be positive");
  }
  if (cfg.horizon && *cfg.horizon < 1) throw ValidationError("horizon must be at least 1");
  if (cfg.workers < 1) throw ValidationError("workers must be at least 1");
  if (cfg.max_outer < 1 || cfg.max_inner < 1) throw ValidationError("iteration caps must be positive");
  if (cfg.max_total_inner < 0) throw ValidationError("max-total-inner must be non-negative");
  if (!(cfg.tau > 1.0)) throw ValidationError("tau must exceed 1");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) throw ValidationError("theta must lie in (0, 1)");
  if (!(cfg.eps > 0.0)) throw ValidationError("eps must be positive");
  AdmmOptions o;
  o.rho = cfg.rho;
  o.tau = cfg.tau;
  o.theta = cfg.theta;
  o.eps_outer = cfg.eps;
  o.max_outer = cfg.max_outer;
  o.max_inner = cfg.max_inner;
  o.max_total_inner = cfg.max_total_inner;
  o.workers = cfg.workers;
  o.mode = cfg.fixed_on ? UcMode::FixedOn : UcMode::Optimize;
  o.warm_start = cfg.warm_start;
  return o;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::optional<ScheduleProblem> problem;
  AdmmOptions opts;
  try {
    double thr = 1e-3;
    problem.emplace(load_problem(cfg, &thr));
    opts = solver_options(cfg);
    opts.warm_start_threshold = thr;
  } catch (const ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  SolveReport rep;
  try {
    rep = solve(*problem, opts);
    write_report_files(cfg.out_dir, rep, *problem, opts,
                       std::filesystem::path(cfg.case_path).filename().string());
  } catch (const std::exception& e) {
    err << "solve failed: " << e.what() << "\n";
    return kExitError;
  }
  if (!cfg.quiet) {
    out << to_string(rep.status) << ": objective " << format_number(rep.objective) << ", infeasibility "
        << format_number(rep.primal_infeasibility) << ", outer " << rep.outer_iterations << ", inner "
        << rep.total_inner << ", reports in " << cfg.out_dir << "\n";
  }
  return rep.status == SolveStatus::Converged ? kExitOk : kExitCap;
}

namespace {

struct DpInstance {
  StageCost costs;
  UcParams params;
};

std::vector<DpInstance> random_instances(std::size_t n, int horizon, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(horizon) * 0x9E3779B97F4A7C15ull));
  std::uniform_real_distribution<double> cost(-1.0, 1.0);
  std::uniform_int_distribution<int> minud(1, 8);
  std::bernoulli_distribution coin(0.5);
  std::vector<DpInstance> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    DpInstance inst{StageCost(static_cast<std::size_t>(horizon)), {}};
    for (auto& stage : inst.costs.table) {
      for (auto& row : stage) {
        for (auto& c : row) c = cost(rng);
      }
    }
    inst.params.min_up = minud(rng);
    inst.params.min_down = minud(rng);
    inst.params.initial_on = coin(rng);
    std::uniform_int_distribution<int> obligation(0, std::min(horizon, 4));
    if (inst.params.initial_on) {
      inst.params.forced_on = obligation(rng);
    } else {
      inst.params.forced_off = obligation(rng);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

DpBenchRow bench_dp(std::size_t generators, int horizon, std::uint64_t seed, int repetitions) {
  if (horizon < 1 || generators < 1 || repetitions < 1) throw ValidationError("bench-dp: bad sizes");
  const auto instances = random_instances(generators, horizon, seed);
  std::vector<double> times;
  double sink = 0.0;
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& inst : instances) sink += dp_solve(inst.costs, inst.params).cost;
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  if (!std::isfinite(sink)) throw NumericalError("bench-dp: non-finite cost");
  std::sort(times.begin(), times.end());
  DpBenchRow row;
  row.generators = generators;
  row.horizon = horizon;
  row.repetitions = repetitions;
  row.median_seconds = times[times.size() / 2];
  row.min_seconds = times.front();
  return row;
}

int cmd_bench_dp(std::size_t generators, const std::vector<int>& horizons, std::uint64_t seed,
                 int repetitions, std::ostream& out) {
  out << "n_generators,T,repetitions,median_seconds,min_seconds\n";
  for (int T : horizons) {
    const auto row = bench_dp(generators, T, seed, repetitions);
    out << row.generators << ',' << row.horizon << ',' << row.repetitions << ','
        << format_number(row.median_seconds) << ',' << format_number(row.min_seconds) << '\n';
  }
  return kExitOk;
}

int cmd_check(const std::string& case_path, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = read_text_file(case_path);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitError;
  }
  try {
    const auto grid = parse_matpower(text);
    const auto s = summarize(grid);
    out << s.buses << " buses, " << s.generators << " generators, " << s.branches << " branches, "
        << s.reference_buses << " reference bus" << (s.reference_buses == 1 ? "" : "es") << "\n";
    out << "invariants: ok\n";
    out << summary_json(s) << "\n";
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "invalid case: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "parse error: " << e.what() << "\n";
  }
  return kExitError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"UC-ACOPF solver: two-level ADMM with a DP unit-commitment block"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.workers = default_workers();
  auto* solve_cmd = app.add_subcommand("solve", "Solve a multi-period UC-ACOPF instance");
  solve_cmd->add_option("--case", cfg.case_path, "MATPOWER case file")->required();
  std::string scenario, profile;
  solve_cmd->add_option("--scenario", scenario, "Scenario JSON file");
  solve_cmd->add_option("--profile", profile, "Demand factor CSV, one per line");
  int horizon = 0;
  double discount = -1.0;
  solve_cmd->add_option("-T,--horizon", horizon, "Number of periods");
  solve_cmd->add_option("--discount", discount, "Demand discount factor");
  solve_cmd->add_option("--rho-pq", cfg.rho.rho_pq, "Penalty of power rows");
  solve_cmd->add_option("--rho-va", cfg.rho.rho_va, "Penalty of voltage rows");
  solve_cmd->add_option("--rho-uc", cfg.rho.rho_uc, "Penalty of commitment rows");
  solve_cmd->add_option("--tau", cfg.tau, "Outer penalty growth factor");
  solve_cmd->add_option("--theta", cfg.theta, "Outer progress ratio");
  solve_cmd->add_option("--eps", cfg.eps, "Outer tolerance on ||z||_inf");
  solve_cmd->add_option("--max-outer", cfg.max_outer, "Outer iteration cap");
  solve_cmd->add_option("--max-inner", cfg.max_inner, "Inner iterations per outer iteration");
  solve_cmd->add_option("--max-total-inner", cfg.max_total_inner, "Global inner iteration cap (0 = none)");
  solve_cmd->add_option("--workers", cfg.workers, "Worker threads (default $UCADMM_WORKERS or 1)");
  solve_cmd->add_option("-o,--out", cfg.out_dir, "Output directory");
  solve_cmd->add_option("--seed", cfg.seed, "Recorded seed (the solver is deterministic)");
  solve_cmd->add_flag("--fixed-on", cfg.fixed_on, "Fix every unit on; skip the commitment block");
  bool no_warm = false;
  solve_cmd->add_flag("--no-warm-start", no_warm, "Start from all units on");
  solve_cmd->add_flag("-q,--quiet", cfg.quiet, "No summary line");

  std::size_t bench_gens = 1000;
  std::vector<int> bench_T{24, 48, 96, 168};
  std::uint64_t bench_seed = 1;
  int bench_reps = 5;
  auto* bench_cmd = app.add_subcommand("bench-dp", "Time the commitment DP on random instances");
  bench_cmd->add_option("-n,--generators", bench_gens, "Generators per batch");
  bench_cmd->add_option("-T,--horizons", bench_T, "Horizons")->delimiter(',');
  bench_cmd->add_option("--seed", bench_seed, "Instance seed");
  bench_cmd->add_option("--reps", bench_reps, "Repetitions per horizon");

  std::string check_path;
  auto* check_cmd = app.add_subcommand("check", "Parse a case and report invariant checks");
  check_cmd->add_option("case", check_path, "MATPOWER case file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*solve_cmd) {
      if (!scenario.empty()) cfg.scenario_path = scenario;
      if (!profile.empty()) cfg.profile_csv = profile;
      if (solve_cmd->count("--horizon")) cfg.horizon = horizon;
      if (solve_cmd->count("--discount")) cfg.discount = discount;
      cfg.warm_start = !no_warm;
      return cmd_solve(cfg, out, err);
    }
    if (*bench_cmd) return cmd_bench_dp(bench_gens, bench_T, bench_seed, bench_reps, out);
    if (*check_cmd) return cmd_check(check_path, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace ucadmm::cli
