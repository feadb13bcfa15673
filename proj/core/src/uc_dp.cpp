#include "ucadmm/uc_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ucadmm/errors.hpp"

namespace ucadmm {

namespace {

void check_initial(const UcParams& p, std::size_t horizon) {
  if (p.forced_on > 0 && !p.initial_on) throw ValidationError("forced-on periods require initial_on");
  if (p.forced_off > 0 && p.initial_on) throw ValidationError("forced-off periods require initial off");
  if (p.forced_on < 0 || p.forced_off < 0) throw ValidationError("negative initial obligation");
  if (static_cast<std::size_t>(p.forced_prefix()) > horizon) {
    throw ValidationError("initial obligation exceeds the horizon");
  }
  if (p.min_up < 1 || p.min_down < 1) throw ValidationError("min up/down must be >= 1");
}

std::size_t min_time(const UcParams& p, int new_state) {
  return static_cast<std::size_t>(new_state == 1 ? p.min_up : p.min_down);
}

}  // namespace

std::array<std::array<double, 2>, 2> stage_cost_entry(const UcTriple& ubar, const UcTriple& y,
                                                      const UcTriple& z, double rho_uc,
                                                      double op_cost, double su_cost,
                                                      double sd_cost) {
  std::array<std::array<double, 2>, 2> out{};
  for (int prev = 0; prev < 2; ++prev) {
    for (int cur = 0; cur < 2; ++cur) {
      const double on = cur;
      const double su = std::max(0, cur - prev);
      const double sd = std::max(0, prev - cur);
      double v = op_cost * on + su_cost * su + sd_cost * sd;
      const double r_on = on - ubar.on + z.on;
      const double r_su = su - ubar.su + z.su;
      const double r_sd = sd - ubar.sd + z.sd;
      v += y.on * r_on + 0.5 * rho_uc * r_on * r_on;
      v += y.su * r_su + 0.5 * rho_uc * r_su * r_su;
      v += y.sd * r_sd + 0.5 * rho_uc * r_sd * r_sd;
      out[static_cast<std::size_t>(prev)][static_cast<std::size_t>(cur)] = v;
    }
  }
  return out;
}

DpResult dp_solve(const StageCost& costs, const UcParams& params) {
  const std::size_t horizon = costs.horizon();
  if (horizon == 0) throw ValidationError("dp_solve: empty horizon");
  check_initial(params, horizon);

  const int s0 = params.initial_on ? 1 : 0;
  const std::size_t prefix = static_cast<std::size_t>(params.forced_prefix());

  // cum[s][k] = sum_{t < k} L(t, s, s), so window sums are O(1).
  std::array<std::vector<double>, 2> cum;
  for (int s = 0; s < 2; ++s) {
    auto& c = cum[static_cast<std::size_t>(s)];
    c.assign(horizon + 1, 0.0);
    for (std::size_t t = 0; t < horizon; ++t) c[t + 1] = c[t] + costs(t, s, s);
  }

  std::vector<std::array<double, 2>> cost(horizon + 1, {0.0, 0.0});
  std::vector<std::array<std::uint8_t, 2>> switch_here(horizon, {0, 0});

  for (std::size_t t = horizon; t-- > prefix;) {
    for (int s = 0; s < 2; ++s) {
      const auto si = static_cast<std::size_t>(s);
      const int ns = 1 - s;
      const auto nsi = static_cast<std::size_t>(ns);
      const double stay = costs(t, s, s) + cost[t + 1][si];
      const std::size_t end = std::min(t + min_time(params, ns), horizon);
      const double sw = costs(t, s, ns) + (cum[nsi][end] - cum[nsi][t + 1]) + cost[end][nsi];
      if (stay <= sw) {
        cost[t][si] = stay;
      } else {
        cost[t][si] = sw;
        switch_here[t][si] = 1;
      }
    }
  }

  DpResult out;
  out.schedule.assign(horizon, static_cast<std::uint8_t>(s0));
  out.cost = cost[prefix][static_cast<std::size_t>(s0)];
  for (std::size_t t = 0; t < prefix; ++t) out.cost += costs(t, s0, s0);

  std::size_t t = prefix;
  int s = s0;
  while (t < horizon) {
    if (switch_here[t][static_cast<std::size_t>(s)]) {
      const int ns = 1 - s;
      const std::size_t end = std::min(t + min_time(params, ns), horizon);
      for (std::size_t k = t; k < end; ++k) out.schedule[k] = static_cast<std::uint8_t>(ns);
      t = end;
      s = ns;
    } else {
      out.schedule[t] = static_cast<std::uint8_t>(s);
      ++t;
    }
  }
  return out;
}

DpTable dp_table(const StageCost& costs, const UcParams& params) {
  const std::size_t horizon = costs.horizon();
  if (horizon == 0) throw ValidationError("dp_table: empty horizon");
  check_initial(params, horizon);
  const std::size_t prefix = static_cast<std::size_t>(params.forced_prefix());

  DpTable tab;
  tab.free_from = static_cast<int>(prefix);
  tab.cost.assign(horizon + 1, {0.0, 0.0});
  tab.stay_cost.assign(horizon, {0.0, 0.0});
  tab.switch_cost.assign(horizon, {0.0, 0.0});
  tab.traj.resize(horizon + 1);

  for (std::size_t t = horizon; t-- > prefix;) {
    for (int s = 0; s < 2; ++s) {
      const auto si = static_cast<std::size_t>(s);
      const int ns = 1 - s;
      const auto nsi = static_cast<std::size_t>(ns);

      const double stay = costs(t, s, s) + tab.cost[t + 1][si];
      std::vector<std::uint8_t> stay_traj{static_cast<std::uint8_t>(s)};
      stay_traj.insert(stay_traj.end(), tab.traj[t + 1][si].begin(), tab.traj[t + 1][si].end());

      const std::size_t end = std::min(t + min_time(params, ns), horizon);
      double sw = costs(t, s, ns);
      for (std::size_t k = t + 1; k < end; ++k) sw += costs(k, ns, ns);
      sw += tab.cost[end][nsi];
      std::vector<std::uint8_t> sw_traj(end - t, static_cast<std::uint8_t>(ns));
      sw_traj.insert(sw_traj.end(), tab.traj[end][nsi].begin(), tab.traj[end][nsi].end());

      tab.stay_cost[t][si] = stay;
      tab.switch_cost[t][si] = sw;
      if (stay <= sw) {
        tab.cost[t][si] = stay;
        tab.traj[t][si] = std::move(stay_traj);
      } else {
        tab.cost[t][si] = sw;
        tab.traj[t][si] = std::move(sw_traj);
      }
    }
  }
  return tab;
}

double schedule_cost(const StageCost& costs, const UcParams& params,
                     const std::vector<std::uint8_t>& schedule) {
  double total = 0.0;
  int prev = params.initial_on ? 1 : 0;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    total += costs(t, prev, schedule[t]);
    prev = schedule[t];
  }
  return total;
}

DpResult dp_oracle(const StageCost& costs, const UcParams& params) {
  const std::size_t horizon = costs.horizon();
  if (horizon == 0 || horizon > 20) throw ValidationError("dp_oracle: horizon must be in 1..20");

  DpResult best;
  bool found = false;
  std::vector<std::uint8_t> sched(horizon);
  // Bit (T-1-t) of mask is period t, so increasing masks are lexicographic.
  const std::uint32_t n = 1u << horizon;
  for (std::uint32_t mask = 0; mask < n; ++mask) {
    for (std::size_t t = 0; t < horizon; ++t) {
      sched[t] = static_cast<std::uint8_t>((mask >> (horizon - 1 - t)) & 1u);
    }
    if (uc_violation(sched, params)) continue;
    const double c = schedule_cost(costs, params, sched);
    if (!found || c < best.cost) {
      best.cost = c;
      best.schedule = sched;
      found = true;
    }
  }
  if (!found) throw ValidationError("dp_oracle: no feasible schedule");
  return best;
}

std::vector<UcTriple> infer_transitions(const std::vector<std::uint8_t>& schedule, bool initial_on) {
  std::vector<UcTriple> out(schedule.size());
  int prev = initial_on ? 1 : 0;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    const int cur = schedule[t];
    out[t].on = cur;
    out[t].su = std::max(0, cur - prev);
    out[t].sd = std::max(0, prev - cur);
    prev = cur;
  }
  return out;
}

}  // namespace ucadmm
