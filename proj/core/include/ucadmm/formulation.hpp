#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "ucadmm/scenario.hpp"
#include "ucadmm/table.hpp"

namespace ucadmm {

// Slots of the per-(t,g) generator block of x.
namespace gen_slot {
inline constexpr int P = 0, Q = 1, PHAT = 2, S_PL = 3, S_PU = 4, S_QL = 5, S_QU = 6, S_RD = 7,
                     S_RU = 8;
inline constexpr int COUNT = 9;
}  // namespace gen_slot

// Slots of the per-(t,l) line block: voltages plus the two thermal slacks.
namespace line_slot {
inline constexpr int WI = 0, WJ = 1, TI = 2, TJ = 3, S_IJ = 4, S_JI = 5;
inline constexpr int COUNT = 6;
}  // namespace line_slot

// Derived line flows, same order for the bus-side copies.
namespace flow_slot {
inline constexpr int PIJ = 0, QIJ = 1, PJI = 2, QJI = 3;
inline constexpr int COUNT = 4;
}  // namespace flow_slot

enum class Block : std::uint8_t {
  U,      // binaries on/su/sd, 3 per (t,g)
  Gen,    // 9 per (t,g)
  Flow,   // 4 per (t,l), functions of the line voltages
  LineV,  // 6 per (t,l)
  UBar,   // 3 per (t,g)
  PBar,   // 1 per (t,g)
  QBar,   // 1 per (t,g)
  FBar,   // 4 per (t,l)
  WBar,   // 1 per (t,i)
};

inline bool is_bar(Block b) { return b >= Block::UBar; }

enum class RowKind : std::uint8_t {
  UcOn, UcSu, UcSd,
  PLo, PHi, QLo, QHi,
  RampDown, RampUp,
  GenP, GenQ,
  RampCopy,
  FlowPij, FlowQij, FlowPji, FlowQji,
  VoltI, VoltJ,
};

std::string_view row_kind_name(RowKind k);

enum class PenaltyClass : std::uint8_t { Pq, Va, Uc };

struct Penalties {
  double rho_pq = 5e3;
  double rho_va = 1e4;
  double rho_uc = 1e4;

  double of(PenaltyClass c) const {
    switch (c) {
      case PenaltyClass::Pq: return rho_pq;
      case PenaltyClass::Va: return rho_va;
      case PenaltyClass::Uc: return rho_uc;
    }
    return rho_pq;
  }
};

struct Term {
  Block block = Block::Gen;
  std::uint32_t index = 0;  // flat index into the block's storage
  double coef = 0.0;
};

/// One coupling row: sum(coef * value) + constant (+ z) = 0.
struct CouplingRow {
  RowKind kind = RowKind::UcOn;
  PenaltyClass cls = PenaltyClass::Pq;
  std::uint32_t t = 0;
  std::uint32_t elem = 0;  // generator or branch index
  double constant = 0.0;   // treated as part of the bar side
  std::uint8_t n_terms = 0;
  std::array<Term, 5> terms{};
};

/// All primal blocks, stored flat. Index helpers are on Layout.
struct Variables {
  std::vector<double> u, gen, flow, line;
  std::vector<double> ubar, pbar, qbar, fbar, wbar;

  std::vector<double>& block(Block b);
  const std::vector<double>& block(Block b) const;
  double value(const Term& term) const { return block(term.block)[term.index]; }
};

class Layout {
 public:
  explicit Layout(const ScheduleProblem& problem);

  std::size_t periods() const { return T_; }
  std::size_t gens() const { return G_; }
  std::size_t lines() const { return L_; }
  std::size_t buses() const { return B_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<CouplingRow>& rows() const { return rows_; }
  const CouplingRow& row(std::size_t r) const { return rows_[r]; }

  // Flat indices.
  std::uint32_t u_index(std::size_t t, std::size_t g, int k) const {
    return static_cast<std::uint32_t>((t * G_ + g) * 3 + static_cast<std::size_t>(k));
  }
  std::uint32_t gen_index(std::size_t t, std::size_t g, int slot) const {
    return static_cast<std::uint32_t>((t * G_ + g) * gen_slot::COUNT + static_cast<std::size_t>(slot));
  }
  std::uint32_t tg_index(std::size_t t, std::size_t g) const {
    return static_cast<std::uint32_t>(t * G_ + g);
  }
  std::uint32_t flow_index(std::size_t t, std::size_t l, int slot) const {
    return static_cast<std::uint32_t>((t * L_ + l) * flow_slot::COUNT + static_cast<std::size_t>(slot));
  }
  std::uint32_t line_index(std::size_t t, std::size_t l, int slot) const {
    return static_cast<std::uint32_t>((t * L_ + l) * line_slot::COUNT + static_cast<std::size_t>(slot));
  }
  std::uint32_t bus_tindex(std::size_t t, std::size_t i) const {
    return static_cast<std::uint32_t>(t * B_ + i);
  }

  /// Rows of the (t,g) generator block are contiguous: UcOn..GenQ, and
  /// RampCopy for t >= 1.
  std::uint32_t gen_first_row(std::size_t t, std::size_t g) const { return gen_row0_(t, g); }
  std::uint32_t gen_row_count(std::size_t t) const { return t == 0 ? 11u : 12u; }
  std::uint32_t gen_row(std::size_t t, std::size_t g, RowKind k) const {
    return gen_row0_(t, g) + static_cast<std::uint32_t>(k);
  }
  /// Rows of the (t,l) line block: FlowPij..VoltJ.
  std::uint32_t line_first_row(std::size_t t, std::size_t l) const { return line_row0_(t, l); }

  /// Rows with a term in the ubar entries of generator g, ascending.
  const std::vector<std::uint32_t>& ubar_rows(std::size_t g) const { return ubar_rows_[g]; }
  /// (row, coefficient) pairs of one bar-side OPF variable.
  const std::vector<std::pair<std::uint32_t, double>>& incidence(Block b, std::uint32_t index) const;

  Variables make_variables() const;

 private:
  std::size_t T_, G_, L_, B_;
  std::vector<CouplingRow> rows_;
  Table2<std::uint32_t> gen_row0_, line_row0_;
  std::vector<std::vector<std::uint32_t>> ubar_rows_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> inc_p_, inc_q_, inc_f_, inc_w_;
};

struct RowSplit {
  double ax = 0.0;  // x-side part
  double bx = 0.0;  // bar-side part plus constant
};

RowSplit row_parts(const CouplingRow& row, const Variables& v);

/// r = Ax + Bxbar + z, one entry per row.
std::vector<double> residuals(const Layout& layout, const Variables& v, const std::vector<double>& z);

/// max_r |Ax + Bxbar|; z excluded.
double primal_infeasibility(const Layout& layout, const Variables& v);

/// Generation cost plus on/start-up/shut-down cost of the x-side blocks.
double objective(const ScheduleProblem& problem, const Layout& layout, const Variables& v);

/// p_ij, q_ij, p_ji, q_ji of the pi model at the given squared magnitudes and
/// angles.
std::array<double, 4> line_flows(const TwoPortAdmittance& y, double wi, double wj, double ti,
                                 double tj);

/// (w^R_ij, w^I_ij) of a line in terms of squared magnitudes and angles.
std::pair<double, double> cross_products(double wi, double wj, double ti, double tj);

}  // namespace ucadmm
