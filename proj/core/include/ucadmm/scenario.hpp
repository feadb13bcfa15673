#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ucadmm/grid.hpp"
#include "ucadmm/table.hpp"

namespace ucadmm {

/// Unit-commitment data for one generator. Ramps are per-unit per period.
struct UcParams {
  int min_up = 2;
  int min_down = 2;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  double startup_ramp = 0.0;
  double shutdown_ramp = 0.0;
  bool initial_on = true;
  int forced_on = 0;   // L: periods 1..L must stay on (initially on only)
  int forced_off = 0;  // F: periods 1..F must stay off (initially off only)
  double op_cost = 0.0;  // charged per period while on
  double startup_cost = 0.0;
  double shutdown_cost = 0.0;

  /// Length of the forced prefix implied by the initial state.
  int forced_prefix() const { return initial_on ? forced_on : forced_off; }
};

/// Optional per-field replacements for UcParams, plus the initial dispatch.
struct UcOverride {
  std::optional<int> min_up, min_down;
  std::optional<double> ramp_up, ramp_down, startup_ramp, shutdown_ramp;
  std::optional<bool> initial_on;
  std::optional<int> forced_on, forced_off;
  std::optional<double> op_cost, startup_cost, shutdown_cost;
  std::optional<double> initial_dispatch;
};

struct UcOverrides {
  UcOverride all;                          // applied to every generator first
  std::map<std::size_t, UcOverride> per_generator;  // keyed by generator index
};

struct DemandProfile {
  std::vector<double> factors;
  double discount = 0.7;
};

/// Time-expanded problem. Period indices are 0-based internally; period t
/// here is period t+1 in the usual 1-based notation.
struct ScheduleProblem {
  GridCase grid;
  int horizon = 0;
  Table2<double> pd;  // horizon x buses
  Table2<double> qd;
  std::vector<UcParams> uc;             // per generator
  std::vector<double> initial_dispatch;  // p_0 per generator

  std::size_t periods() const { return static_cast<std::size_t>(horizon); }
};

ScheduleProblem build_problem(const GridCase& grid, const DemandProfile& profile,
                              const UcOverrides& overrides = {});

/// Deterministic double-peaked diurnal curve in [0.6, 1.0], repeating every
/// 24 periods.
DemandProfile default_profile(int horizon);

/// One positive factor per line; blank lines and '#' comments are skipped.
std::vector<double> read_profile_csv(const std::string& path);

/// Checks the min-up/min-down, initial-prefix and transition logic of an
/// on/off schedule (transitions at period 1 are taken relative to the
/// initial state). Returns the first violation, if any.
std::optional<std::string> uc_violation(const std::vector<std::uint8_t>& on, const UcParams& p);

/// Thresholds a relaxed dispatch (horizon x generators) and repairs each
/// generator's schedule to the nearest feasible one in Hamming distance.
Table2<std::uint8_t> warm_start_uc(const ScheduleProblem& problem, const Table2<double>& dispatch,
                                   double threshold = 1e-3);

/// Scenario file contents (JSON). Missing keys leave defaults in place.
struct ScenarioFile {
  std::optional<int> horizon;
  std::optional<double> discount;
  std::optional<std::string> profile_csv;  // resolved against the scenario directory
  std::optional<double> warm_start_threshold;
  UcOverrides overrides;
};

ScenarioFile parse_scenario(const std::string& json_text, const std::string& base_dir = ".");
ScenarioFile load_scenario(const std::string& path);

}  // namespace ucadmm
