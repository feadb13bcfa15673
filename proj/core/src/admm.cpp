#include "ucadmm/admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <sstream>

#include "ucadmm/errors.hpp"
#include "ucadmm/uc_dp.hpp"

namespace ucadmm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double two_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Table2<std::uint8_t> all_on(const ScheduleProblem& p) {
  return Table2<std::uint8_t>(p.periods(), p.grid.generators().size(), 1);
}

}  // namespace

std::string to_string(SolveStatus s) {
  return s == SolveStatus::Converged ? "converged" : "iteration_cap";
}

double outer_update(std::vector<double>& lambda, double beta, const std::vector<double>& z,
                    double z_now, double z_prev, double tau, double theta, double lambda_lo,
                    double lambda_hi) {
  if (lambda.size() != z.size()) throw ValidationError("outer_update: dimension mismatch");
  for (std::size_t i = 0; i < z.size(); ++i) {
    lambda[i] = std::clamp(lambda[i] + beta * z[i], lambda_lo, lambda_hi);
  }
  if (z_prev >= 0.0 && z_now > theta * z_prev) return tau * beta;
  return beta;
}

AdmmEngine::AdmmEngine(const ScheduleProblem& problem, AdmmOptions options)
    : problem_(problem), opts_(std::move(options)), layout_(problem_) {
  const auto& r = opts_.rho;
  if (!(r.rho_pq > 0.0 && r.rho_va > 0.0 && r.rho_uc > 0.0)) {
    throw ValidationError("penalties must be positive");
  }
  if (!(opts_.tau > 1.0)) throw ValidationError("tau must exceed 1");
  if (!(opts_.theta > 0.0 && opts_.theta < 1.0)) throw ValidationError("theta must lie in (0, 1)");
  pool_ = std::make_unique<WorkerPool>(std::max<std::size_t>(1, opts_.workers));
  timing_.workers = pool_->size();
}

void AdmmEngine::initialize(const Table2<std::uint8_t>& schedule) {
  const auto& L = layout_;
  const std::size_t T = L.periods(), G = L.gens();
  if (schedule.rows() != T || schedule.cols() != G) throw ValidationError("initial schedule has the wrong shape");
  const auto& grid = problem_.grid;
  const auto& gens = grid.generators();
  const auto& buses = grid.buses();
  const auto& branches = grid.branches();

  state_ = AdmmState{};
  auto& v = state_.v;
  v = L.make_variables();
  using namespace gen_slot;

  for (std::size_t g = 0; g < G; ++g) {
    std::vector<std::uint8_t> on(T);
    for (std::size_t t = 0; t < T; ++t) on[t] = schedule(t, g);
    const auto tr = infer_transitions(on, problem_.uc[g].initial_on);
    for (std::size_t t = 0; t < T; ++t) {
      const double u[3] = {tr[t].on, tr[t].su, tr[t].sd};
      for (int k = 0; k < 3; ++k) v.u[L.u_index(t, g, k)] = v.ubar[L.u_index(t, g, k)] = u[k];
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t g = 0; g < G; ++g) {
      const auto& gen = gens[g];
      const double on = v.u[L.u_index(t, g, 0)];
      const double p = on * 0.5 * (gen.pmin + gen.pmax);
      const double q = on * 0.5 * (gen.qmin + gen.qmax);
      v.gen[L.gen_index(t, g, P)] = p;
      v.gen[L.gen_index(t, g, Q)] = q;
      v.pbar[L.tg_index(t, g)] = p;
      v.qbar[L.tg_index(t, g)] = q;
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t g = 0; g < G; ++g) {
      v.gen[L.gen_index(t, g, PHAT)] =
          t == 0 ? problem_.initial_dispatch[g] : v.gen[L.gen_index(t - 1, g, P)];
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < L.buses(); ++i) {
      const double vm = 0.5 * (buses[i].vmin + buses[i].vmax);
      v.wbar[L.bus_tindex(t, i)] = vm * vm;
    }
    for (std::size_t l = 0; l < L.lines(); ++l) {
      const auto& br = branches[l];
      const double wi = v.wbar[L.bus_tindex(t, br.from)], wj = v.wbar[L.bus_tindex(t, br.to)];
      v.line[L.line_index(t, l, line_slot::WI)] = wi;
      v.line[L.line_index(t, l, line_slot::WJ)] = wj;
      const auto f = line_flows(br.y, wi, wj, 0.0, 0.0);
      const double r2 = br.rate_limit * br.rate_limit;
      v.line[L.line_index(t, l, line_slot::S_IJ)] = std::clamp(r2 - f[0] * f[0] - f[1] * f[1], 0.0, r2);
      v.line[L.line_index(t, l, line_slot::S_JI)] = std::clamp(r2 - f[2] * f[2] - f[3] * f[3], 0.0, r2);
      for (int k = 0; k < flow_slot::COUNT; ++k) {
        v.flow[L.flow_index(t, l, k)] = v.fbar[L.flow_index(t, l, k)] = f[static_cast<std::size_t>(k)];
      }
    }
  }
  // Slacks that make the bound and ramp rows hold where possible.
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t g = 0; g < G; ++g) {
      const auto r0 = L.gen_first_row(t, g);
      const std::pair<RowKind, int> slack_of[] = {{RowKind::PLo, S_PL}, {RowKind::PHi, S_PU},
                                                  {RowKind::QLo, S_QL}, {RowKind::QHi, S_QU},
                                                  {RowKind::RampDown, S_RD}, {RowKind::RampUp, S_RU}};
      for (const auto& [kind, slot] : slack_of) {
        const auto& row = L.row(r0 + static_cast<std::uint32_t>(kind));
        const auto idx = L.gen_index(t, g, slot);
        double coef = 0.0;
        for (std::size_t k = 0; k < row.n_terms; ++k) {
          if (row.terms[k].block == Block::Gen && row.terms[k].index == idx) coef = row.terms[k].coef;
        }
        v.gen[idx] = 0.0;
        const auto s = row_parts(row, v);
        v.gen[idx] = std::max(0.0, -(s.ax + s.bx) / coef);
      }
    }
  }

  const std::size_t m = L.size();
  state_.z.assign(m, 0.0);
  state_.y.assign(m, 0.0);
  state_.lambda.assign(m, 0.0);
  state_.mu_ij.assign(T * L.lines(), 0.0);
  state_.mu_ji.assign(T * L.lines(), 0.0);
  const auto& r = opts_.rho;
  state_.beta = opts_.beta0 > 0.0 ? opts_.beta0 : std::max({r.rho_pq, r.rho_va, r.rho_uc});

  prev_bz_.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) prev_bz_[i] = row_parts(L.row(i), v).bx + state_.z[i];
}

SweepStats AdmmEngine::sweep() {
  const auto& L = layout_;
  const std::size_t T = L.periods(), G = L.gens(), NL = L.lines(), NB = L.buses();
  auto& v = state_.v;
  SweepStats stats;
  const KernelContext ctx{problem_, L, opts_.rho, state_.y, state_.z};
  const bool optimize_uc = opts_.mode == UcMode::Optimize;

  auto t0 = Clock::now();
  if (optimize_uc) {
    pool_->parallel_for(G, [&](std::size_t g) {
      const auto sc = dp_stage_costs(ctx, v, g);
      const auto res = dp_solve(sc, problem_.uc[g]);
      const auto tr = infer_transitions(res.schedule, problem_.uc[g].initial_on);
      for (std::size_t t = 0; t < T; ++t) {
        v.u[L.u_index(t, g, 0)] = tr[t].on;
        v.u[L.u_index(t, g, 1)] = tr[t].su;
        v.u[L.u_index(t, g, 2)] = tr[t].sd;
      }
    });
  }
  timing_.uc_dp += seconds_since(t0);

  t0 = Clock::now();
  std::vector<std::uint8_t> flags(T * NL, 0);
  pool_->parallel_for(T * G + T * NL, [&](std::size_t k) {
    if (k < T * G) {
      const std::size_t t = k / G, g = k % G;
      const auto x = gen_kernel(ctx, v, t, g, opts_.gen_tron);
      for (int s = 0; s < gen_slot::COUNT; ++s) v.gen[L.gen_index(t, g, s)] = x[static_cast<std::size_t>(s)];
      return;
    }
    const std::size_t j = k - T * G;
    const std::size_t t = j / NL, l = j % NL;
    const auto lp = line_problem(ctx, v, t, l, state_.mu_ij[j], state_.mu_ji[j]);
    std::array<double, line_slot::COUNT> x0{};
    for (int s = 0; s < line_slot::COUNT; ++s) x0[static_cast<std::size_t>(s)] = v.line[L.line_index(t, l, s)];
    const auto res = solve_line(lp, x0, opts_.line);
    for (int s = 0; s < line_slot::COUNT; ++s) v.line[L.line_index(t, l, s)] = res.x[static_cast<std::size_t>(s)];
    for (int s = 0; s < flow_slot::COUNT; ++s) v.flow[L.flow_index(t, l, s)] = res.flows[static_cast<std::size_t>(s)];
    state_.mu_ij[j] = res.mu_ij;
    state_.mu_ji[j] = res.mu_ji;
    flags[j] = res.violation_flag ? 1 : 0;
  });
  for (auto f : flags) stats.line_flags += f;
  timing_.opf_x += seconds_since(t0);

  t0 = Clock::now();
  if (optimize_uc) {
    pool_->parallel_for(G, [&](std::size_t g) {
      const auto x = ucbar_kernel(ctx, v, g, opts_.ucbar_tol);
      for (std::size_t t = 0; t < T; ++t) {
        for (int k = 0; k < 3; ++k) v.ubar[L.u_index(t, g, k)] = x[t * 3 + static_cast<std::size_t>(k)];
      }
    });
  }
  timing_.uc_bar += seconds_since(t0);

  t0 = Clock::now();
  pool_->parallel_for(T * NB, [&](std::size_t k) {
    const std::size_t t = k / NB, i = k % NB;
    const auto res = bus_kernel(ctx, v, t, i);
    for (const auto& [ref, value] : res.values) v.block(ref.block)[ref.index] = value;
  });
  timing_.bus += seconds_since(t0);

  t0 = Clock::now();
  const std::size_t m = L.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = L.row(i);
    const auto s = row_parts(row, v);
    const double r = s.ax + s.bx;
    const double rho = opts_.rho.of(row.cls);
    state_.z[i] = z_update(state_.lambda[i], state_.y[i], rho, state_.beta, r);
    state_.y[i] = y_update(state_.y[i], rho, r, state_.z[i]);
    stats.primal = std::max(stats.primal, std::abs(r + state_.z[i]));
    const double bz = s.bx + state_.z[i];
    stats.dual = std::max(stats.dual, std::abs(bz - prev_bz_[i]));
    prev_bz_[i] = bz;
  }
  for (const auto* blk : {&v.gen, &v.line, &v.flow}) stats.x_norm = std::max(stats.x_norm, inf_norm(*blk));
  timing_.multipliers += seconds_since(t0);
  return stats;
}

SolveReport AdmmEngine::run() {
  const auto t_start = Clock::now();
  SolveReport rep;
  rep.rho = opts_.rho;
  rep.rows = layout_.size();
  std::deque<double> window;  // primal residuals of the last divergence_window sweeps
  double z_prev = -1.0;
  bool converged = false;
  bool capped = false;

  for (int k = 0; k < opts_.max_outer && !converged && !capped; ++k) {
    int inner = 0;
    for (; inner < opts_.max_inner; ++inner) {
      if (opts_.max_total_inner > 0 && rep.total_inner >= opts_.max_total_inner) {
        capped = true;
        break;
      }
      SweepStats st;
      try {
        st = sweep();
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << "outer iteration " << k + 1 << ", inner iteration " << inner + 1 << ": " << e.what();
        throw SolveError(os.str());
      }
      ++rep.total_inner;
      rep.line_flags = st.line_flags;
      if (!std::isfinite(st.primal) || !std::isfinite(st.dual)) {
        std::ostringstream os;
        os << "non-finite residual at outer iteration " << k + 1 << ", inner iteration " << inner + 1;
        throw SolveError(os.str());
      }
      if (opts_.keep_history) {
        HistoryRow h;
        h.outer = k + 1;
        h.inner = inner + 1;
        h.total = rep.total_inner;
        h.primal = st.primal;
        h.dual = st.dual;
        h.infeasibility = primal_infeasibility(layout_, state_.v);
        h.z_inf = inf_norm(state_.z);
        h.beta = state_.beta;
        h.objective = objective(problem_, layout_, state_.v);
        rep.history.push_back(h);
      }
      if (opts_.divergence_window > 0) {
        if (static_cast<int>(window.size()) == opts_.divergence_window) {
          const double base = std::max(window.front(), opts_.divergence_floor);
          if (st.primal > opts_.divergence_factor * base) {
            std::ostringstream os;
            os << "divergence: primal residual " << st.primal << " at total inner iteration "
               << rep.total_inner << " exceeds " << opts_.divergence_factor << " x " << base << " from "
               << opts_.divergence_window << " iterations earlier (outer " << k + 1 << ", beta "
               << state_.beta << ")";
            throw SolveError(os.str());
          }
          window.pop_front();
        }
        window.push_back(st.primal);
      }
      const double ptol = opts_.inner_primal_tol * std::max(1.0, st.x_norm);
      if (st.primal <= ptol && st.dual <= opts_.inner_dual_tol) {
        ++inner;
        break;
      }
    }
    if (inner == 0 && capped) break;
    rep.inner_per_outer.push_back(inner);
    ++rep.outer_iterations;
    const double z_now = inf_norm(state_.z);
    rep.z_inf_history.push_back(z_now);
    rep.z_two_history.push_back(two_norm(state_.z));
    rep.beta_history.push_back(state_.beta);
    if (z_now <= opts_.eps_outer) {
      converged = true;
      break;
    }
    if (capped) break;
    state_.beta = outer_update(state_.lambda, state_.beta, state_.z, z_now, z_prev, opts_.tau,
                               opts_.theta, opts_.lambda_lo, opts_.lambda_hi);
    z_prev = z_now;
  }

  const auto& L = layout_;
  const auto& v = state_.v;
  const std::size_t T = L.periods(), G = L.gens(), NB = L.buses();
  rep.status = converged ? SolveStatus::Converged : SolveStatus::IterationCap;
  rep.objective = objective(problem_, L, v);
  rep.primal_infeasibility = primal_infeasibility(L, v);
  rep.z_inf = inf_norm(state_.z);
  rep.z_two = two_norm(state_.z);
  rep.final_beta = state_.beta;
  rep.schedule = Table2<std::uint8_t>(T, G, 0);
  rep.dispatch_p = Table2<double>(T, G, 0.0);
  rep.dispatch_q = Table2<double>(T, G, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t g = 0; g < G; ++g) {
      rep.schedule(t, g) = v.u[L.u_index(t, g, 0)] > 0.5 ? 1 : 0;
      rep.dispatch_p(t, g) = v.gen[L.gen_index(t, g, gen_slot::P)];
      rep.dispatch_q(t, g) = v.gen[L.gen_index(t, g, gen_slot::Q)];
    }
  }
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<std::uint8_t> on(T);
    for (std::size_t t = 0; t < T; ++t) on[t] = rep.schedule(t, g);
    if (auto err = uc_violation(on, problem_.uc[g])) {
      rep.uc_violations.push_back("generator " + std::to_string(g) + ": " + *err);
    }
  }
  rep.ramp_violation = coupling_violation(problem_, rep.schedule, rep.dispatch_p, rep.dispatch_q);

  // Voltages from the consensus copies; angles by walking a spanning tree
  // from the reference bus through the line-local angle differences.
  const auto& grid = problem_.grid;
  rep.voltage = Table2<double>(T, NB, 0.0);
  rep.angle = Table2<double>(T, NB, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < NB; ++i) rep.voltage(t, i) = std::sqrt(std::max(0.0, v.wbar[L.bus_tindex(t, i)]));
    std::vector<std::uint8_t> seen(NB, 0);
    std::vector<std::size_t> queue{grid.reference_bus()};
    seen[grid.reference_bus()] = 1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::size_t a = queue[qi];
      for (const auto& end : grid.branch_ends_at(a)) {
        const auto& br = grid.branches()[end.branch];
        const std::size_t b = end.from_side ? br.to : br.from;
        if (seen[b]) continue;
        const double d = v.line[L.line_index(t, end.branch, line_slot::TI)] -
                         v.line[L.line_index(t, end.branch, line_slot::TJ)];
        rep.angle(t, b) = end.from_side ? rep.angle(t, a) - d : rep.angle(t, a) + d;
        seen[b] = 1;
        queue.push_back(b);
      }
    }
  }

  rep.warm_start_inner = warm_inner_;
  timing_.warm_start = warm_seconds_;
  timing_.total = seconds_since(t_start) + warm_seconds_;
  rep.timing = timing_;
  return rep;
}

ScheduleProblem relaxed_problem(const ScheduleProblem& problem) {
  auto gens = problem.grid.generators();
  for (auto& g : gens) {
    g.pmin = std::min(g.pmin, 0.0);
    g.qmin = std::min(g.qmin, 0.0);
  }
  GridCase grid(problem.grid.base_mva(), problem.grid.buses(), problem.grid.branches(), std::move(gens));
  ScheduleProblem out{std::move(grid), problem.horizon, problem.pd, problem.qd, problem.uc,
                      problem.initial_dispatch};
  return out;
}

double coupling_violation(const ScheduleProblem& problem, const Table2<std::uint8_t>& schedule,
                          const Table2<double>& p, const Table2<double>& q) {
  const auto& gens = problem.grid.generators();
  double worst = 0.0;
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const auto& gen = gens[g];
    const auto& uc = problem.uc[g];
    int prev_on = uc.initial_on ? 1 : 0;
    double prev_p = problem.initial_dispatch[g];
    for (std::size_t t = 0; t < problem.periods(); ++t) {
      const int on = schedule(t, g);
      const int su = std::max(0, on - prev_on), sd = std::max(0, prev_on - on);
      const double pt = p(t, g), qt = q(t, g);
      worst = std::max({worst, gen.pmin * on - pt, pt - gen.pmax * on, gen.qmin * on - qt, qt - gen.qmax * on});
      const double dp = pt - prev_p;
      worst = std::max(worst, dp - (uc.ramp_up * prev_on + uc.startup_ramp * su));
      worst = std::max(worst, -dp - (uc.ramp_down * on + uc.shutdown_ramp * sd));
      prev_on = on;
      prev_p = pt;
    }
  }
  return worst;
}

SolveReport solve(const ScheduleProblem& problem, const AdmmOptions& options) {
  const auto t0 = Clock::now();
  Table2<std::uint8_t> schedule;
  double warm = 0.0;
  int warm_inner = 0;
  if (options.mode == UcMode::FixedOn) {
    schedule = all_on(problem);
  } else if (options.initial_schedule) {
    schedule = *options.initial_schedule;
  } else if (options.warm_start) {
    AdmmOptions relaxed = options;
    relaxed.mode = UcMode::FixedOn;
    relaxed.max_total_inner = options.warm_start_budget;
    relaxed.keep_history = false;
    relaxed.initial_schedule.reset();
    const auto rp = relaxed_problem(problem);
    AdmmEngine eng(rp, relaxed);
    eng.initialize(all_on(rp));
    const auto rep = eng.run();
    schedule = warm_start_uc(problem, rep.dispatch_p, options.warm_start_threshold);
    warm = seconds_since(t0);
    warm_inner = rep.total_inner;
  } else {
    schedule = all_on(problem);
  }
  AdmmEngine engine(problem, options);
  engine.initialize(schedule);
  engine.set_warm_start_info(warm, warm_inner);
  return engine.run();
}

}  // namespace ucadmm
