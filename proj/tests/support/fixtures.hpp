#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ucadmm/admm.hpp"
#include "ucadmm/formulation.hpp"
#include "ucadmm/grid.hpp"
#include "ucadmm/scenario.hpp"

#ifndef UCADMM_TEST_DATA_DIR
#define UCADMM_TEST_DATA_DIR "tests/data"
#endif

namespace fixture {

inline std::string data_path(const std::string& name) {
  return std::string(UCADMM_TEST_DATA_DIR) + "/" + name;
}

inline ucadmm::Bus bus(int id, double pd = 0.0, double qd = 0.0, bool ref = false) {
  ucadmm::Bus b;
  b.id = id;
  b.type = ref ? 3 : 1;
  b.is_reference = ref;
  b.pd = pd;
  b.qd = qd;
  b.base_kv = 345.0;
  return b;
}

inline ucadmm::Generator generator(int bus, double pmin, double pmax, double qmin, double qmax,
                                   double c2 = 0.0, double c1 = 0.0, double c0 = 0.0) {
  ucadmm::Generator g;
  g.bus = bus;
  g.pmin = pmin;
  g.pmax = pmax;
  g.qmin = qmin;
  g.qmax = qmax;
  g.c2 = c2;
  g.c1 = c1;
  g.c0 = c0;
  return g;
}

inline ucadmm::Branch branch(int from, int to, double r, double x, double b, double rate) {
  ucadmm::Branch br;
  br.from_bus = from;
  br.to_bus = to;
  br.prim.r = r;
  br.prim.x = x;
  br.prim.b = b;
  br.y = ucadmm::admittance_of(br.prim);
  br.rate_limit = rate;
  br.rate_a_file = rate * 100.0;
  return br;
}

// Flat profile with discount 1, so demand equals the bus data.
inline ucadmm::ScheduleProblem problem(const ucadmm::GridCase& grid, int horizon,
                                       const ucadmm::UcOverrides& overrides = {}) {
  ucadmm::DemandProfile prof;
  prof.factors.assign(static_cast<std::size_t>(horizon), 1.0);
  prof.discount = 1.0;
  return ucadmm::build_problem(grid, prof, overrides);
}

// Two buses, one line, generators at both ends.
inline ucadmm::GridCase two_bus_grid(double rate = 5.0) {
  std::vector<ucadmm::Bus> buses{bus(1, 0.0, 0.0, true), bus(2, 0.8, 0.2)};
  buses[1].gs = 0.01;
  buses[1].bs = 0.02;
  std::vector<ucadmm::Branch> branches{branch(1, 2, 0.01, 0.08, 0.1, rate)};
  std::vector<ucadmm::Generator> gens{generator(1, 0.1, 1.5, -0.5, 0.8, 10.0, 20.0, 5.0),
                                      generator(2, 0.05, 0.6, -0.3, 0.4, 25.0, 30.0, 3.0)};
  return ucadmm::GridCase(100.0, buses, branches, gens);
}

inline ucadmm::GridCase load_case9() { return ucadmm::load_matpower(data_path("case9.m")); }

// Random values in every block, plus random y and z.
inline void randomize(const ucadmm::Layout& L, ucadmm::Variables& v, std::vector<double>& y,
                      std::vector<double>& z, std::mt19937_64& rng, double spread = 1.0) {
  std::uniform_real_distribution<double> U(-spread, spread);
  std::uniform_real_distribution<double> P(0.0, 1.0);
  v = L.make_variables();
  for (auto* blk : {&v.gen, &v.flow, &v.pbar, &v.qbar, &v.fbar}) {
    for (auto& x : *blk) x = U(rng);
  }
  for (auto& x : v.line) x = 0.9 + 0.2 * P(rng);
  for (auto& x : v.wbar) x = 0.9 + 0.2 * P(rng);
  for (auto& x : v.u) x = P(rng) < 0.5 ? 0.0 : 1.0;
  for (auto& x : v.ubar) x = P(rng);
  y.assign(L.size(), 0.0);
  z.assign(L.size(), 0.0);
  for (auto& x : y) x = U(rng);
  for (auto& x : z) x = 0.1 * U(rng);
}

// sum_r y_r (r_r) + rho_r / 2 r_r^2 with r = Ax + Bxbar + z, over every row.
inline double augmented_lagrangian(const ucadmm::Layout& L, const ucadmm::Penalties& rho,
                                   const ucadmm::Variables& v, const std::vector<double>& y,
                                   const std::vector<double>& z) {
  const auto r = ucadmm::residuals(L, v, z);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double p = rho.of(L.row(i).cls);
    s += y[i] * r[i] + 0.5 * p * r[i] * r[i];
  }
  return s;
}

}  // namespace fixture
