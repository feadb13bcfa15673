#include "ucadmm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ucadmm/errors.hpp"

namespace ucadmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double row_value(const CouplingRow& row, const Variables& v) {
  const auto s = row_parts(row, v);
  return s.ax + s.bx;
}

}  // namespace

BoxQp assemble_local_qp(const KernelContext& ctx, const Variables& v,
                        const std::vector<std::uint32_t>& rows, const std::vector<LocalVar>& locals) {
  const auto n = static_cast<Eigen::Index>(locals.size());
  BoxQp qp;
  qp.H = Eigen::MatrixXd::Zero(n, n);
  qp.g = Eigen::VectorXd::Zero(n);
  qp.lo = Eigen::VectorXd::Constant(n, -kInf);
  qp.hi = Eigen::VectorXd::Constant(n, kInf);

  std::vector<std::pair<Eigen::Index, double>> a;
  for (const auto r : rows) {
    const auto& row = ctx.layout.row(r);
    a.clear();
    double c = row.constant + ctx.z[r];
    for (std::size_t k = 0; k < row.n_terms; ++k) {
      const auto& term = row.terms[k];
      Eigen::Index hit = -1;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (locals[static_cast<std::size_t>(j)].block == term.block &&
            locals[static_cast<std::size_t>(j)].index == term.index) {
          hit = j;
          break;
        }
      }
      if (hit >= 0) {
        a.emplace_back(hit, term.coef);
      } else {
        c += term.coef * v.value(term);
      }
    }
    if (a.empty()) continue;
    const double rho = ctx.rho.of(row.cls);
    const double lin = ctx.y[r] + rho * c;
    for (const auto& [i, ai] : a) {
      qp.g[i] += lin * ai;
      for (const auto& [j, aj] : a) qp.H(i, j) += rho * ai * aj;
    }
  }
  return qp;
}

StageCost dp_stage_costs(const KernelContext& ctx, const Variables& v, std::size_t g) {
  const auto& L = ctx.layout;
  const auto& uc = ctx.problem.uc[g];
  StageCost sc(L.periods());
  for (std::size_t t = 0; t < L.periods(); ++t) {
    const auto r0 = L.gen_row(t, g, RowKind::UcOn);
    UcTriple ubar{v.ubar[L.u_index(t, g, 0)], v.ubar[L.u_index(t, g, 1)], v.ubar[L.u_index(t, g, 2)]};
    UcTriple y{ctx.y[r0], ctx.y[r0 + 1], ctx.y[r0 + 2]};
    UcTriple z{ctx.z[r0], ctx.z[r0 + 1], ctx.z[r0 + 2]};
    sc.table[t] = stage_cost_entry(ubar, y, z, ctx.rho.of(L.row(r0).cls), uc.op_cost, uc.startup_cost,
                                   uc.shutdown_cost);
  }
  return sc;
}

BoxQp gen_kernel_qp(const KernelContext& ctx, const Variables& v, std::size_t t, std::size_t g) {
  const auto& L = ctx.layout;
  const auto& gen = ctx.problem.grid.generators()[g];
  std::vector<LocalVar> locals;
  for (int s = 0; s < gen_slot::COUNT; ++s) locals.push_back({Block::Gen, L.gen_index(t, g, s)});
  std::vector<std::uint32_t> rows;
  const auto r0 = L.gen_first_row(t, g);
  for (std::uint32_t k = 0; k < L.gen_row_count(t); ++k) rows.push_back(r0 + k);

  BoxQp qp = assemble_local_qp(ctx, v, rows, locals);
  using namespace gen_slot;
  qp.H(P, P) += 2.0 * gen.c2;
  qp.g[P] += gen.c1;
  qp.lo[P] = std::min(0.0, gen.pmin);
  qp.hi[P] = gen.pmax;
  qp.lo[Q] = std::min(0.0, gen.qmin);
  qp.hi[Q] = std::max(0.0, gen.qmax);
  if (t == 0) {
    qp.lo[PHAT] = qp.hi[PHAT] = ctx.problem.initial_dispatch[g];
  }
  for (int s = S_PL; s <= S_RU; ++s) qp.lo[s] = 0.0;
  return qp;
}

std::array<double, gen_slot::COUNT> gen_kernel(const KernelContext& ctx, const Variables& v,
                                               std::size_t t, std::size_t g, const TronConfig& config) {
  const BoxQp qp = gen_kernel_qp(ctx, v, t, g);
  Eigen::VectorXd x0(gen_slot::COUNT);
  for (int s = 0; s < gen_slot::COUNT; ++s) x0[s] = v.gen[ctx.layout.gen_index(t, g, s)];
  const auto res = solve_box_qp_tron(qp, x0, config);
  std::array<double, gen_slot::COUNT> out{};
  for (int s = 0; s < gen_slot::COUNT; ++s) out[static_cast<std::size_t>(s)] = res.x[s];
  return out;
}

BoxQp ucbar_kernel_qp(const KernelContext& ctx, const Variables& v, std::size_t g) {
  const auto& L = ctx.layout;
  std::vector<LocalVar> locals;
  for (std::size_t t = 0; t < L.periods(); ++t) {
    for (int k = 0; k < 3; ++k) locals.push_back({Block::UBar, L.u_index(t, g, k)});
  }
  BoxQp qp = assemble_local_qp(ctx, v, L.ubar_rows(g), locals);
  qp.lo.setZero();
  qp.hi.setOnes();
  return qp;
}

std::vector<double> ucbar_kernel(const KernelContext& ctx, const Variables& v, std::size_t g,
                                 double tol) {
  const BoxQp qp = ucbar_kernel_qp(ctx, v, g);
  const auto& L = ctx.layout;
  Eigen::VectorXd x0(qp.g.size());
  for (std::size_t t = 0; t < L.periods(); ++t) {
    for (int k = 0; k < 3; ++k) x0[static_cast<Eigen::Index>(t * 3) + k] = v.ubar[L.u_index(t, g, k)];
  }
  const auto res = solve_box_qp_newton(qp, x0, tol);
  return {res.x.data(), res.x.data() + res.x.size()};
}

BusKernelResult bus_kernel(const KernelContext& ctx, const Variables& v, std::size_t t, std::size_t i) {
  const auto& L = ctx.layout;
  const auto& grid = ctx.problem.grid;
  const auto& bus = grid.buses()[i];

  struct Var {
    LocalVar ref;
    double alpha, gamma;  // coefficients in the P and Q balance
    double weight = 0.0, target = 0.0, value = 0.0;
    bool fixed = false;
  };
  std::vector<Var> vars;
  for (auto g : grid.generators_at(i)) {
    vars.push_back({{Block::PBar, L.tg_index(t, g)}, 1.0, 0.0});
    vars.push_back({{Block::QBar, L.tg_index(t, g)}, 0.0, 1.0});
  }
  for (const auto& end : grid.branch_ends_at(i)) {
    const int ps = end.from_side ? flow_slot::PIJ : flow_slot::PJI;
    const int qs = end.from_side ? flow_slot::QIJ : flow_slot::QJI;
    vars.push_back({{Block::FBar, L.flow_index(t, end.branch, ps)}, -1.0, 0.0});
    vars.push_back({{Block::FBar, L.flow_index(t, end.branch, qs)}, 0.0, -1.0});
  }
  const std::size_t w_pos = vars.size();
  vars.push_back({{Block::WBar, L.bus_tindex(t, i)}, -bus.gs, bus.bs});

  for (auto& var : vars) {
    const double cur = v.block(var.ref.block)[var.ref.index];
    var.value = cur;
    double a = 0.0, b = 0.0;
    for (const auto& [r, coef] : L.incidence(var.ref.block, var.ref.index)) {
      const double rho = ctx.rho.of(L.row(r).cls);
      const double c = row_value(L.row(r), v) - coef * cur + ctx.z[r];
      a += rho * coef * coef;
      b += coef * (ctx.y[r] + rho * c);
    }
    var.weight = a;
    if (a > 0.0) {
      var.target = -b / a;
    } else {
      var.fixed = true;
    }
  }

  const double pd = ctx.problem.pd(t, i);
  const double qd = ctx.problem.qd(t, i);
  BusKernelResult out;

  auto solve = [&]() {
    double m11 = 0, m12 = 0, m22 = 0, sp = -pd, sq = -qd;
    bool p_free = false, q_free = false;
    for (const auto& var : vars) {
      if (var.fixed) {
        sp += var.alpha * var.value;
        sq += var.gamma * var.value;
        continue;
      }
      m11 += var.alpha * var.alpha / var.weight;
      m12 += var.alpha * var.gamma / var.weight;
      m22 += var.gamma * var.gamma / var.weight;
      sp += var.alpha * var.target;
      sq += var.gamma * var.target;
      p_free = p_free || var.alpha != 0.0;
      q_free = q_free || var.gamma != 0.0;
    }
    const double scale = std::max({std::abs(pd), std::abs(qd), 1.0});
    double l1 = 0.0, l2 = 0.0;
    if (p_free && q_free) {
      const double det = m11 * m22 - m12 * m12;
      if (!(std::abs(det) > 1e-14 * m11 * m22)) {
        throw NumericalError("bus kernel: singular balance system at bus " + std::to_string(bus.id));
      }
      l1 = (m22 * sp - m12 * sq) / det;
      l2 = (m11 * sq - m12 * sp) / det;
    } else if (p_free) {
      l1 = sp / m11;
      if (std::abs(sq) > 1e-10 * scale) {
        throw NumericalError("bus kernel: reactive balance has no free variable at bus " + std::to_string(bus.id));
      }
    } else if (q_free) {
      l2 = sq / m22;
      if (std::abs(sp) > 1e-10 * scale) {
        throw NumericalError("bus kernel: active balance has no free variable at bus " + std::to_string(bus.id));
      }
    } else if (std::abs(sp) > 1e-10 * scale || std::abs(sq) > 1e-10 * scale) {
      throw NumericalError("bus kernel: demand at bus " + std::to_string(bus.id) + " cannot be met");
    }
    for (auto& var : vars) {
      if (!var.fixed) var.value = var.target - (l1 * var.alpha + l2 * var.gamma) / var.weight;
    }
    out.lambda_p = l1;
    out.lambda_q = l2;
  };

  solve();
  auto& w = vars[w_pos];
  if (!w.fixed) {
    const double lo = bus.vmin * bus.vmin, hi = bus.vmax * bus.vmax;
    if (w.value < lo || w.value > hi) {
      w.value = std::clamp(w.value, lo, hi);
      w.fixed = true;
      out.voltage_clipped = true;
      solve();
    }
  }
  out.values.reserve(vars.size());
  for (const auto& var : vars) out.values.emplace_back(var.ref, var.value);
  return out;
}

}  // namespace ucadmm
