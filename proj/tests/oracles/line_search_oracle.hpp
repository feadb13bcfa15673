#pragma once

// Search oracle for the single-line problem
//   min sum_k rho_k/2 (f_k(w_i, w_j, d) - target_k)^2
//   s.t. |S_ij|^2 <= rate^2, |S_ji|^2 <= rate^2, w in its boxes,
// over (w_i, w_j, d = theta_i - theta_j). Flows come from phasors.
// For fixed w the problem in d is one-dimensional: a dense scan, then Brent
// inside the best bracket, with bisection onto the limit when the bracket
// touches it. The outer (w_i, w_j) search is a zooming grid.

#include <array>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "oracles/pi_model.hpp"

namespace oracle {

struct LineTargets {
  PortY y;
  double wi_lo = 0.81, wi_hi = 1.21, wj_lo = 0.81, wj_hi = 1.21;
  double rate = 1.0;
  std::array<double, 6> rho{};     // p_ij, q_ij, p_ji, q_ji, w_i, w_j
  std::array<double, 6> target{};
};

struct LinePoint {
  double wi = 1, wj = 1, d = 0;
  double f = std::numeric_limits<double>::infinity();
};

// largest of the two apparent-power excesses over the limit
inline double line_excess(const LineTargets& lt, double wi, double wj, double d) {
  const auto fl = branch_flows(lt.y, std::sqrt(wi), std::sqrt(wj), d, 0.0);
  const double r2 = lt.rate * lt.rate;
  return std::max(fl.pij * fl.pij + fl.qij * fl.qij, fl.pji * fl.pji + fl.qji * fl.qji) - r2;
}

inline double line_penalty(const LineTargets& lt, double wi, double wj, double d, bool* feasible) {
  const auto fl = branch_flows(lt.y, std::sqrt(wi), std::sqrt(wj), d, 0.0);
  *feasible = line_excess(lt, wi, wj, d) <= 0.0;
  const double v[6] = {fl.pij, fl.qij, fl.pji, fl.qji, wi, wj};
  double s = 0.0;
  for (int k = 0; k < 6; ++k) {
    const double e = v[k] - lt.target[static_cast<std::size_t>(k)];
    s += 0.5 * lt.rho[static_cast<std::size_t>(k)] * e * e;
  }
  return s;
}

inline LinePoint best_angle(const LineTargets& lt, double wi, double wj, double d_lo, double d_hi, int scan = 801) {
  LinePoint best{wi, wj, 0.0};
  const double h = (d_hi - d_lo) / (scan - 1);
  int k_best = -1;
  for (int k = 0; k < scan; ++k) {
    bool ok = false;
    const double f = line_penalty(lt, wi, wj, d_lo + k * h, &ok);
    if (ok && f < best.f) {
      best = {wi, wj, d_lo + k * h, f};
      k_best = k;
    }
  }
  if (k_best < 0) return best;
  auto consider = [&](double d) {
    bool ok = false;
    const double f = line_penalty(lt, wi, wj, d, &ok);
    if (ok && f < best.f) best = {wi, wj, d, f};
  };
  auto excess = [&](double d) { return line_excess(lt, wi, wj, d); };
  auto tol = [](double a, double b) { return std::abs(b - a) < 1e-15; };
  double a = std::max(d_lo, best.d - h), b = std::min(d_hi, best.d + h);
  // pull each bracket end onto the limit if it is infeasible
  if (excess(a) > 0.0) a = boost::math::tools::bisect(excess, a, best.d, tol).second;
  if (excess(b) > 0.0) b = boost::math::tools::bisect(excess, best.d, b, tol).first;
  consider(a);
  consider(b);
  const auto f = [&](double d) {
    bool ok = false;
    return line_penalty(lt, wi, wj, d, &ok);
  };
  consider(boost::math::tools::brent_find_minima(f, a, b, 50).first);
  return best;
}

inline LinePoint grid_search(const LineTargets& lt, double d_lo, double d_hi, int points = 21, int rounds = 12) {
  double lo[2] = {lt.wi_lo, lt.wj_lo};
  double hi[2] = {lt.wi_hi, lt.wj_hi};
  const double box_lo[2] = {lt.wi_lo, lt.wj_lo};
  const double box_hi[2] = {lt.wi_hi, lt.wj_hi};
  LinePoint best;
  for (int round = 0; round < rounds; ++round) {
    double step[2];
    for (int k = 0; k < 2; ++k) step[k] = (hi[k] - lo[k]) / (points - 1);
    for (int a = 0; a < points; ++a) {
      for (int b = 0; b < points; ++b) {
        const auto p = best_angle(lt, lo[0] + a * step[0], lo[1] + b * step[1], d_lo, d_hi);
        if (p.f < best.f) best = p;
      }
    }
    const double at[2] = {best.wi, best.wj};
    for (int k = 0; k < 2; ++k) {
      lo[k] = std::max(box_lo[k], at[k] - 2 * step[k]);
      hi[k] = std::min(box_hi[k], at[k] + 2 * step[k]);
    }
  }
  return best;
}

}  // namespace oracle
