#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ucadmm/scenario.hpp"

namespace ucadmm {

/// L(prev, cur) for every period of one generator.
struct StageCost {
  std::vector<std::array<std::array<double, 2>, 2>> table;  // [t][prev][cur]

  explicit StageCost(std::size_t horizon = 0) : table(horizon) {}
  std::size_t horizon() const { return table.size(); }
  double operator()(std::size_t t, int prev, int cur) const {
    return table[t][static_cast<std::size_t>(prev)][static_cast<std::size_t>(cur)];
  }
};

/// On/su/sd triple; used for binaries, their relaxed duplicates, and the
/// multipliers/artificial variables of the rows tying them together.
struct UcTriple {
  double on = 0.0;
  double su = 0.0;
  double sd = 0.0;
};

/// Augmented-Lagrangian stage cost of one period. `ubar`, `y`, `z` belong to
/// the three duplicate rows u_v - ubar_v + z_v = 0; su/sd are inferred from
/// the (prev, cur) transition.
std::array<std::array<double, 2>, 2> stage_cost_entry(const UcTriple& ubar, const UcTriple& y,
                                                      const UcTriple& z, double rho_uc,
                                                      double op_cost, double su_cost,
                                                      double sd_cost);

struct DpResult {
  std::vector<std::uint8_t> schedule;
  double cost = 0.0;
};

/// Backward induction over stay/switch decisions; O(T) time.
DpResult dp_solve(const StageCost& costs, const UcParams& params);

/// Exhaustive enumeration of all 2^T schedules. T <= 20.
DpResult dp_oracle(const StageCost& costs, const UcParams& params);

/// Memoized cost-to-go and optimal trajectory suffixes, stored explicitly.
/// O(T^2) memory; dp_solve does not build it.
struct DpTable {
  std::vector<std::array<double, 2>> cost;                     // [t][s], size T+1
  std::vector<std::array<std::vector<std::uint8_t>, 2>> traj;  // [t][s] = u_{t..T-1}
  std::vector<std::array<double, 2>> stay_cost;
  std::vector<std::array<double, 2>> switch_cost;
  int free_from = 0;  // first period not covered by the forced prefix
};

DpTable dp_table(const StageCost& costs, const UcParams& params);

/// Total stage cost of a schedule, starting from params.initial_on.
double schedule_cost(const StageCost& costs, const UcParams& params,
                     const std::vector<std::uint8_t>& schedule);

/// u^su, u^sd of a schedule relative to the initial state.
std::vector<UcTriple> infer_transitions(const std::vector<std::uint8_t>& schedule, bool initial_on);

}  // namespace ucadmm
