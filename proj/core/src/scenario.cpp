#include "ucadmm/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "ucadmm/errors.hpp"
#include "ucadmm/uc_dp.hpp"

namespace ucadmm {

namespace {

void apply(UcParams& p, const UcOverride& o) {
  if (o.min_up) p.min_up = *o.min_up;
  if (o.min_down) p.min_down = *o.min_down;
  if (o.ramp_up) p.ramp_up = *o.ramp_up;
  if (o.ramp_down) p.ramp_down = *o.ramp_down;
  if (o.startup_ramp) p.startup_ramp = *o.startup_ramp;
  if (o.shutdown_ramp) p.shutdown_ramp = *o.shutdown_ramp;
  if (o.initial_on) p.initial_on = *o.initial_on;
  if (o.forced_on) p.forced_on = *o.forced_on;
  if (o.forced_off) p.forced_off = *o.forced_off;
  if (o.op_cost) p.op_cost = *o.op_cost;
  if (o.startup_cost) p.startup_cost = *o.startup_cost;
  if (o.shutdown_cost) p.shutdown_cost = *o.shutdown_cost;
}

void check_params(const UcParams& p, std::size_t g, int horizon) {
  const std::string who = "generator " + std::to_string(g) + ": ";
  if (p.min_up < 1 || p.min_down < 1) throw ValidationError(who + "min up/down must be >= 1");
  if (p.min_up > horizon || p.min_down > horizon) {
    throw ValidationError(who + "min up/down exceeds the horizon");
  }
  if (p.forced_on < 0 || p.forced_off < 0) throw ValidationError(who + "negative initial obligation");
  if (p.forced_on > 0 && !p.initial_on) throw ValidationError(who + "forced-on periods require initial_on");
  if (p.forced_off > 0 && p.initial_on) throw ValidationError(who + "forced-off periods require initial off");
  if (p.forced_on > horizon || p.forced_off > horizon) {
    throw ValidationError(who + "initial obligation exceeds the horizon");
  }
  if (p.ramp_up < 0 || p.ramp_down < 0 || p.startup_ramp < 0 || p.shutdown_ramp < 0) {
    throw ValidationError(who + "ramps must be nonnegative");
  }
}

UcOverride parse_override(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  UcOverride o;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "min_up") o.min_up = v.get<int>();
      else if (key == "min_down") o.min_down = v.get<int>();
      else if (key == "ramp_up") o.ramp_up = v.get<double>();
      else if (key == "ramp_down") o.ramp_down = v.get<double>();
      else if (key == "startup_ramp") o.startup_ramp = v.get<double>();
      else if (key == "shutdown_ramp") o.shutdown_ramp = v.get<double>();
      else if (key == "initial_on") o.initial_on = v.get<bool>();
      else if (key == "forced_on") o.forced_on = v.get<int>();
      else if (key == "forced_off") o.forced_off = v.get<int>();
      else if (key == "op_cost") o.op_cost = v.get<double>();
      else if (key == "startup_cost") o.startup_cost = v.get<double>();
      else if (key == "shutdown_cost") o.shutdown_cost = v.get<double>();
      else if (key == "initial_dispatch") o.initial_dispatch = v.get<double>();
      else throw ParseError(where + ": unknown key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw ParseError(where + ": bad value for '" + key + "'");
    }
  }
  return o;
}

}  // namespace

ScheduleProblem build_problem(const GridCase& grid, const DemandProfile& profile,
                              const UcOverrides& overrides) {
  const int horizon = static_cast<int>(profile.factors.size());
  if (horizon < 1) throw ValidationError("demand profile is empty");
  for (double f : profile.factors) {
    if (!(f > 0.0) || !std::isfinite(f)) throw ValidationError("demand factors must be positive");
  }
  if (!(profile.discount > 0.0)) throw ValidationError("discount must be positive");

  const auto& buses = grid.buses();
  const auto& gens = grid.generators();
  for (const auto& [g, _] : overrides.per_generator) {
    if (g >= gens.size()) {
      throw ValidationError("override for unknown generator " + std::to_string(g));
    }
  }

  ScheduleProblem prob{grid, horizon, {}, {}, {}, {}};
  prob.pd = Table2<double>(prob.periods(), buses.size());
  prob.qd = Table2<double>(prob.periods(), buses.size());
  for (std::size_t t = 0; t < prob.periods(); ++t) {
    const double scale = profile.discount * profile.factors[t];
    for (std::size_t i = 0; i < buses.size(); ++i) {
      prob.pd(t, i) = scale * buses[i].pd;
      prob.qd(t, i) = scale * buses[i].qd;
    }
  }

  double first_demand = 0.0;
  for (std::size_t i = 0; i < buses.size(); ++i) first_demand += prob.pd(0, i);
  double capacity = 0.0;
  for (const auto& g : gens) capacity += g.pmax;

  for (std::size_t g = 0; g < gens.size(); ++g) {
    const auto& gen = gens[g];
    UcParams p;
    p.min_up = std::min(p.min_up, horizon);
    p.min_down = std::min(p.min_down, horizon);
    p.ramp_up = 0.10 * gen.pmax;
    p.ramp_down = 0.10 * gen.pmax;
    p.startup_ramp = std::max(gen.pmin, p.ramp_up);
    p.shutdown_ramp = std::max(gen.pmin, p.ramp_down);
    p.op_cost = gen.c0;
    p.startup_cost = gen.startup_cost;
    p.shutdown_cost = gen.shutdown_cost;

    std::optional<double> p0_override;
    auto apply_all = [&](const UcOverride& o) {
      apply(p, o);
      if (o.initial_dispatch) p0_override = o.initial_dispatch;
    };
    apply_all(overrides.all);
    if (auto it = overrides.per_generator.find(g); it != overrides.per_generator.end()) {
      apply_all(it->second);
    }
    // Capacity-weighted share of the first period's demand.
    double p0 = 0.0;
    if (p.initial_on && capacity > 0.0) {
      p0 = std::clamp(first_demand * gen.pmax / capacity, gen.pmin, gen.pmax);
    }
    if (p0_override) p0 = *p0_override;
    check_params(p, g, horizon);
    prob.uc.push_back(p);
    prob.initial_dispatch.push_back(p0);
  }
  return prob;
}

DemandProfile default_profile(int horizon) {
  if (horizon < 1) throw ValidationError("horizon must be at least 1");
  // Morning and evening peaks over a night trough.
  std::array<double, 24> raw{};
  for (int h = 0; h < 24; ++h) {
    const double m = (h - 9.0) / 2.5;
    const double e = (h - 19.0) / 2.8;
    raw[static_cast<std::size_t>(h)] = 0.75 * std::exp(-0.5 * m * m) + std::exp(-0.5 * e * e) +
                                       0.35 * std::exp(-0.5 * ((h - 14.0) / 4.0) * ((h - 14.0) / 4.0));
  }
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it, hi = *hi_it;

  DemandProfile prof;
  prof.factors.resize(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    const double v = raw[static_cast<std::size_t>(t % 24)];
    prof.factors[static_cast<std::size_t>(t)] = 0.6 + 0.4 * (v - lo) / (hi - lo);
  }
  return prof;
}

std::vector<double> read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open profile '" + path + "'");
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    const auto b = line.find_first_not_of(" \t\r,");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r,");
    const std::string tok = line.substr(b, e - b + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": non-numeric factor '" + tok + "'");
    }
    if (!(v > 0.0)) throw ValidationError(path + ":" + std::to_string(lineno) + ": nonpositive factor");
    out.push_back(v);
  }
  return out;
}

std::optional<std::string> uc_violation(const std::vector<std::uint8_t>& on, const UcParams& p) {
  const int horizon = static_cast<int>(on.size());
  for (auto v : on) {
    if (v > 1) return "non-binary entry";
  }
  for (int t = 0; t < std::min(p.forced_on, horizon); ++t) {
    if (!on[static_cast<std::size_t>(t)]) return "initial on-obligation broken at period " + std::to_string(t + 1);
  }
  for (int t = 0; t < std::min(p.forced_off, horizon); ++t) {
    if (on[static_cast<std::size_t>(t)]) return "initial off-obligation broken at period " + std::to_string(t + 1);
  }
  const auto trans = infer_transitions(on, p.initial_on);
  for (int t = 0; t < horizon; ++t) {
    double su = 0.0, sd = 0.0;
    for (int i = std::max(0, t - p.min_up + 1); i <= t; ++i) su += trans[static_cast<std::size_t>(i)].su;
    for (int i = std::max(0, t - p.min_down + 1); i <= t; ++i) sd += trans[static_cast<std::size_t>(i)].sd;
    const double u = on[static_cast<std::size_t>(t)];
    if (su > u) return "minimum up time violated at period " + std::to_string(t + 1);
    if (sd > 1.0 - u) return "minimum down time violated at period " + std::to_string(t + 1);
  }
  return std::nullopt;
}

Table2<std::uint8_t> warm_start_uc(const ScheduleProblem& problem, const Table2<double>& dispatch,
                                   double threshold) {
  const std::size_t horizon = problem.periods();
  const std::size_t ng = problem.grid.generators().size();
  if (dispatch.rows() != horizon || dispatch.cols() != ng) {
    throw ValidationError("warm start dispatch has the wrong shape");
  }
  Table2<std::uint8_t> out(horizon, ng, 0);
  for (std::size_t g = 0; g < ng; ++g) {
    StageCost hamming(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const int target = dispatch(t, g) > threshold ? 1 : 0;
      for (int prev = 0; prev < 2; ++prev) {
        for (int cur = 0; cur < 2; ++cur) {
          hamming.table[t][static_cast<std::size_t>(prev)][static_cast<std::size_t>(cur)] =
              cur == target ? 0.0 : 1.0;
        }
      }
    }
    const auto repaired = dp_solve(hamming, problem.uc[g]);
    for (std::size_t t = 0; t < horizon; ++t) out(t, g) = repaired.schedule[t];
  }
  return out;
}

ScenarioFile parse_scenario(const std::string& json_text, const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scenario: expected a JSON object");

  ScenarioFile s;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "horizon") {
        s.horizon = v.get<int>();
      } else if (key == "discount") {
        s.discount = v.get<double>();
      } else if (key == "profile_csv") {
        std::filesystem::path p(v.get<std::string>());
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        s.profile_csv = p.string();
      } else if (key == "warm_start_threshold") {
        s.warm_start_threshold = v.get<double>();
      } else if (key == "defaults") {
        s.overrides.all = parse_override(v, "scenario.defaults");
      } else if (key == "generators") {
        if (!v.is_object()) throw ParseError("scenario.generators: expected an object");
        for (const auto& [idx, ov] : v.items()) {
          std::size_t g = 0;
          auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), g);
          if (ec != std::errc() || ptr != idx.data() + idx.size()) {
            throw ParseError("scenario.generators: key '" + idx + "' is not a generator index");
          }
          s.overrides.per_generator[g] = parse_override(ov, "scenario.generators." + idx);
        }
      } else {
        throw ParseError("scenario: unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw ParseError("scenario: bad value for '" + key + "'");
    }
  }
  return s;
}

ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace ucadmm
