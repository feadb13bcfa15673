#include "ucadmm/formulation.hpp"

#include <algorithm>
#include <cmath>

#include "ucadmm/errors.hpp"

namespace ucadmm {

std::string_view row_kind_name(RowKind k) {
  switch (k) {
    case RowKind::UcOn: return "uc-on";
    case RowKind::UcSu: return "uc-su";
    case RowKind::UcSd: return "uc-sd";
    case RowKind::PLo: return "p-lo";
    case RowKind::PHi: return "p-hi";
    case RowKind::QLo: return "q-lo";
    case RowKind::QHi: return "q-hi";
    case RowKind::RampDown: return "ramp-dn";
    case RowKind::RampUp: return "ramp-up";
    case RowKind::GenP: return "gen-p";
    case RowKind::GenQ: return "gen-q";
    case RowKind::RampCopy: return "ramp-copy";
    case RowKind::FlowPij: return "flow-pij";
    case RowKind::FlowQij: return "flow-qij";
    case RowKind::FlowPji: return "flow-pji";
    case RowKind::FlowQji: return "flow-qji";
    case RowKind::VoltI: return "volt-i";
    case RowKind::VoltJ: return "volt-j";
  }
  return "?";
}

std::vector<double>& Variables::block(Block b) {
  return const_cast<std::vector<double>&>(std::as_const(*this).block(b));
}

const std::vector<double>& Variables::block(Block b) const {
  switch (b) {
    case Block::U: return u;
    case Block::Gen: return gen;
    case Block::Flow: return flow;
    case Block::LineV: return line;
    case Block::UBar: return ubar;
    case Block::PBar: return pbar;
    case Block::QBar: return qbar;
    case Block::FBar: return fbar;
    case Block::WBar: return wbar;
  }
  throw std::logic_error("bad block");
}

namespace {

struct RowBuilder {
  CouplingRow row;
  RowBuilder(RowKind k, PenaltyClass c, std::size_t t, std::size_t e) {
    row.kind = k;
    row.cls = c;
    row.t = static_cast<std::uint32_t>(t);
    row.elem = static_cast<std::uint32_t>(e);
  }
  RowBuilder& add(Block b, std::uint32_t idx, double coef) {
    if (coef == 0.0) return *this;
    row.terms.at(row.n_terms++) = Term{b, idx, coef};
    return *this;
  }
  RowBuilder& constant(double c) {
    row.constant += c;
    return *this;
  }
};

}  // namespace

Layout::Layout(const ScheduleProblem& problem)
    : T_(problem.periods()),
      G_(problem.grid.generators().size()),
      L_(problem.grid.branches().size()),
      B_(problem.grid.buses().size()),
      gen_row0_(T_, G_, 0),
      line_row0_(T_, L_, 0),
      ubar_rows_(G_),
      inc_p_(T_ * G_),
      inc_q_(T_ * G_),
      inc_f_(T_ * L_ * flow_slot::COUNT),
      inc_w_(T_ * B_) {
  const auto& gens = problem.grid.generators();
  const auto& branches = problem.grid.branches();
  using namespace gen_slot;

  for (std::size_t t = 0; t < T_; ++t) {
    for (std::size_t g = 0; g < G_; ++g) {
      const auto& gen = gens[g];
      const auto& uc = problem.uc[g];
      gen_row0_(t, g) = static_cast<std::uint32_t>(rows_.size());
      auto gi = [&](int s) { return gen_index(t, g, s); };
      const auto ub_on = u_index(t, g, 0), ub_su = u_index(t, g, 1), ub_sd = u_index(t, g, 2);

      for (int k = 0; k < 3; ++k) {
        RowBuilder rb(static_cast<RowKind>(k), PenaltyClass::Uc, t, g);
        rb.add(Block::U, u_index(t, g, k), 1.0).add(Block::UBar, u_index(t, g, k), -1.0);
        rows_.push_back(rb.row);
      }
      rows_.push_back(RowBuilder(RowKind::PLo, PenaltyClass::Uc, t, g)
                          .add(Block::Gen, gi(P), 1.0)
                          .add(Block::Gen, gi(S_PL), -1.0)
                          .add(Block::UBar, ub_on, -gen.pmin)
                          .row);
      rows_.push_back(RowBuilder(RowKind::PHi, PenaltyClass::Uc, t, g)
                          .add(Block::Gen, gi(P), 1.0)
                          .add(Block::Gen, gi(S_PU), 1.0)
                          .add(Block::UBar, ub_on, -gen.pmax)
                          .row);
      rows_.push_back(RowBuilder(RowKind::QLo, PenaltyClass::Uc, t, g)
                          .add(Block::Gen, gi(Q), 1.0)
                          .add(Block::Gen, gi(S_QL), -1.0)
                          .add(Block::UBar, ub_on, -gen.qmin)
                          .row);
      rows_.push_back(RowBuilder(RowKind::QHi, PenaltyClass::Uc, t, g)
                          .add(Block::Gen, gi(Q), 1.0)
                          .add(Block::Gen, gi(S_QU), 1.0)
                          .add(Block::UBar, ub_on, -gen.qmax)
                          .row);
      // p - p_prev >= -R^D on_t - S^D sd_t
      rows_.push_back(RowBuilder(RowKind::RampDown, PenaltyClass::Uc, t, g)
                          .add(Block::Gen, gi(P), 1.0)
                          .add(Block::Gen, gi(PHAT), -1.0)
                          .add(Block::Gen, gi(S_RD), -1.0)
                          .add(Block::UBar, ub_on, uc.ramp_down)
                          .add(Block::UBar, ub_sd, uc.shutdown_ramp)
                          .row);
      // p - p_prev <= R^U on_{t-1} + S^U su_t
      RowBuilder up(RowKind::RampUp, PenaltyClass::Uc, t, g);
      up.add(Block::Gen, gi(P), 1.0).add(Block::Gen, gi(PHAT), -1.0).add(Block::Gen, gi(S_RU), 1.0);
      if (t == 0) {
        up.constant(uc.initial_on ? -uc.ramp_up : 0.0);
      } else {
        up.add(Block::UBar, u_index(t - 1, g, 0), -uc.ramp_up);
      }
      up.add(Block::UBar, ub_su, -uc.startup_ramp);
      rows_.push_back(up.row);

      rows_.push_back(RowBuilder(RowKind::GenP, PenaltyClass::Pq, t, g)
                          .add(Block::Gen, gi(P), 1.0)
                          .add(Block::PBar, tg_index(t, g), -1.0)
                          .row);
      rows_.push_back(RowBuilder(RowKind::GenQ, PenaltyClass::Pq, t, g)
                          .add(Block::Gen, gi(Q), 1.0)
                          .add(Block::QBar, tg_index(t, g), -1.0)
                          .row);
      if (t > 0) {
        rows_.push_back(RowBuilder(RowKind::RampCopy, PenaltyClass::Pq, t, g)
                            .add(Block::Gen, gi(PHAT), 1.0)
                            .add(Block::PBar, tg_index(t - 1, g), -1.0)
                            .row);
      }
    }
    for (std::size_t l = 0; l < L_; ++l) {
      line_row0_(t, l) = static_cast<std::uint32_t>(rows_.size());
      for (int k = 0; k < flow_slot::COUNT; ++k) {
        rows_.push_back(RowBuilder(static_cast<RowKind>(static_cast<int>(RowKind::FlowPij) + k),
                                   PenaltyClass::Pq, t, l)
                            .add(Block::Flow, flow_index(t, l, k), 1.0)
                            .add(Block::FBar, flow_index(t, l, k), -1.0)
                            .row);
      }
      rows_.push_back(RowBuilder(RowKind::VoltI, PenaltyClass::Va, t, l)
                          .add(Block::LineV, line_index(t, l, line_slot::WI), 1.0)
                          .add(Block::WBar, bus_tindex(t, branches[l].from), -1.0)
                          .row);
      rows_.push_back(RowBuilder(RowKind::VoltJ, PenaltyClass::Va, t, l)
                          .add(Block::LineV, line_index(t, l, line_slot::WJ), 1.0)
                          .add(Block::WBar, bus_tindex(t, branches[l].to), -1.0)
                          .row);
    }
  }

  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& row = rows_[r];
    const auto ri = static_cast<std::uint32_t>(r);
    for (std::size_t k = 0; k < row.n_terms; ++k) {
      const auto& term = row.terms[k];
      switch (term.block) {
        case Block::UBar: {
          const std::size_t g = (term.index / 3) % G_;
          auto& list = ubar_rows_[g];
          if (list.empty() || list.back() != ri) list.push_back(ri);
          break;
        }
        case Block::PBar: inc_p_[term.index].emplace_back(ri, term.coef); break;
        case Block::QBar: inc_q_[term.index].emplace_back(ri, term.coef); break;
        case Block::FBar: inc_f_[term.index].emplace_back(ri, term.coef); break;
        case Block::WBar: inc_w_[term.index].emplace_back(ri, term.coef); break;
        default: break;
      }
    }
  }
}

const std::vector<std::pair<std::uint32_t, double>>& Layout::incidence(Block b,
                                                                       std::uint32_t index) const {
  switch (b) {
    case Block::PBar: return inc_p_.at(index);
    case Block::QBar: return inc_q_.at(index);
    case Block::FBar: return inc_f_.at(index);
    case Block::WBar: return inc_w_.at(index);
    default: throw std::logic_error("incidence: not a bar OPF block");
  }
}

Variables Layout::make_variables() const {
  Variables v;
  v.u.assign(T_ * G_ * 3, 0.0);
  v.gen.assign(T_ * G_ * gen_slot::COUNT, 0.0);
  v.flow.assign(T_ * L_ * flow_slot::COUNT, 0.0);
  v.line.assign(T_ * L_ * line_slot::COUNT, 0.0);
  v.ubar.assign(T_ * G_ * 3, 0.0);
  v.pbar.assign(T_ * G_, 0.0);
  v.qbar.assign(T_ * G_, 0.0);
  v.fbar.assign(T_ * L_ * flow_slot::COUNT, 0.0);
  v.wbar.assign(T_ * B_, 0.0);
  return v;
}

RowSplit row_parts(const CouplingRow& row, const Variables& v) {
  RowSplit s;
  s.bx = row.constant;
  for (std::size_t k = 0; k < row.n_terms; ++k) {
    const auto& term = row.terms[k];
    const double c = term.coef * v.value(term);
    if (is_bar(term.block)) {
      s.bx += c;
    } else {
      s.ax += c;
    }
  }
  return s;
}

std::vector<double> residuals(const Layout& layout, const Variables& v, const std::vector<double>& z) {
  if (z.size() != layout.size()) throw ValidationError("residuals: z has the wrong dimension");
  std::vector<double> r(layout.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto s = row_parts(layout.row(i), v);
    r[i] = s.ax + s.bx + z[i];
  }
  return r;
}

double primal_infeasibility(const Layout& layout, const Variables& v) {
  double m = 0.0;
  for (const auto& row : layout.rows()) {
    const auto s = row_parts(row, v);
    m = std::max(m, std::abs(s.ax + s.bx));
  }
  return m;
}

double objective(const ScheduleProblem& problem, const Layout& layout, const Variables& v) {
  const auto& gens = problem.grid.generators();
  double total = 0.0;
  for (std::size_t t = 0; t < layout.periods(); ++t) {
    for (std::size_t g = 0; g < layout.gens(); ++g) {
      const double p = v.gen[layout.gen_index(t, g, gen_slot::P)];
      const auto& uc = problem.uc[g];
      total += gens[g].c2 * p * p + gens[g].c1 * p;
      total += uc.op_cost * v.u[layout.u_index(t, g, 0)] + uc.startup_cost * v.u[layout.u_index(t, g, 1)] +
               uc.shutdown_cost * v.u[layout.u_index(t, g, 2)];
    }
  }
  return total;
}

std::pair<double, double> cross_products(double wi, double wj, double ti, double tj) {
  const double m = std::sqrt(wi * wj);
  const double d = ti - tj;
  return {m * std::cos(d), m * std::sin(d)};
}

std::array<double, 4> line_flows(const TwoPortAdmittance& y, double wi, double wj, double ti,
                                 double tj) {
  const auto [wr, wim] = cross_products(wi, wj, ti, tj);
  return {
      y.gii * wi + y.gij * wr + y.bij * wim,
      -y.bii * wi - y.bij * wr + y.gij * wim,
      y.gjj * wj + y.gji * wr - y.bji * wim,
      -y.bjj * wj - y.bji * wr - y.gji * wim,
  };
}

}  // namespace ucadmm
