#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ucadmm {

// All electrical quantities below are per-unit on GridCase::base_mva unless
// a field name says otherwise.

struct Bus {
  int id = 0;
  int type = 1;  // MATPOWER bus type, 3 = reference
  double base_kv = 0.0;
  double pd = 0.0;  // base-case demand
  double qd = 0.0;
  double gs = 0.0;  // shunt conductance, consumed at |V| = 1
  double bs = 0.0;  // shunt susceptance, injected at |V| = 1
  double vmin = 0.9;
  double vmax = 1.1;
  bool is_reference = false;
};

/// Two-port admittance entries of the pi model. `ii`/`jj` are the self terms
/// at the from/to ends, `ij`/`ji` the transfer terms.
struct TwoPortAdmittance {
  double gii = 0, gij = 0, gji = 0, gjj = 0;
  double bii = 0, bij = 0, bji = 0, bjj = 0;
};

struct BranchPrimitives {
  double r = 0.0;
  double x = 0.0;
  double b = 0.0;          // total line charging
  double tap = 1.0;        // 0 in the file means 1
  double shift_deg = 0.0;  // phase shift, degrees
};

struct Branch {
  int from_bus = 0;  // bus ids as in the file
  int to_bus = 0;
  std::size_t from = 0;  // indices into GridCase::buses
  std::size_t to = 0;
  BranchPrimitives prim;
  TwoPortAdmittance y;
  double rate_limit = 0.0;  // apparent-power limit
  double rate_a_file = 0.0;  // rateA as written (MVA), 0 = unlimited
  double angmin_deg = -360.0;
  double angmax_deg = 360.0;
};

struct Generator {
  int bus = 0;           // bus id
  std::size_t bus_index = 0;
  double pmin = 0.0, pmax = 0.0;
  double qmin = 0.0, qmax = 0.0;
  // Cost f(p) = c2 p^2 + c1 p + c0 in $/h with p per-unit.
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;
  double startup_cost = 0.0;
  double shutdown_cost = 0.0;
};

/// One end of a branch as seen from a bus.
struct BranchEnd {
  std::size_t branch = 0;
  bool from_side = true;
};

/// Immutable, validated network model.
class GridCase {
 public:
  GridCase(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches,
           std::vector<Generator> generators);

  double base_mva() const { return base_mva_; }
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<Generator>& generators() const { return generators_; }

  /// G_i: generator indices located at bus index i.
  const std::vector<std::size_t>& generators_at(std::size_t bus) const { return gens_at_bus_[bus]; }
  /// B_i: branch ends incident to bus index i.
  const std::vector<BranchEnd>& branch_ends_at(std::size_t bus) const { return ends_at_bus_[bus]; }

  std::size_t bus_index(int id) const;
  std::size_t reference_bus() const { return reference_; }

 private:
  double base_mva_;
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::vector<Generator> generators_;
  std::vector<std::vector<std::size_t>> gens_at_bus_;
  std::vector<std::vector<BranchEnd>> ends_at_bus_;
  std::vector<std::pair<int, std::size_t>> id_index_;  // sorted by id
  std::size_t reference_ = 0;
};

struct ParseOptions {
  /// rateA = 0 becomes this multiple of base MVA.
  double unlimited_rate_factor = 10.0;
};

/// Parses MATPOWER `.m` text. Throws ParseError on syntax problems and
/// ValidationError on invariant violations.
GridCase parse_matpower(std::string_view text, const ParseOptions& opts = {});
GridCase load_matpower(const std::string& path, const ParseOptions& opts = {});

/// Writes a MATPOWER case carrying every field the parser reads.
std::string serialize_matpower(const GridCase& grid);

/// Invariant violations, one message each; empty when the parts form a valid
/// case. GridCase's constructor throws ValidationError listing all of them.
std::vector<std::string> find_violations(double base_mva, const std::vector<Bus>& buses,
                                         const std::vector<Branch>& branches,
                                         const std::vector<Generator>& generators);

/// Standard pi-model entries. Throws NumericalError("degenerate branch") when
/// r = x = 0.
TwoPortAdmittance admittance_of(const BranchPrimitives& prim);

struct CaseSummary {
  std::size_t buses = 0;
  std::size_t branches = 0;
  std::size_t generators = 0;
  std::size_t reference_buses = 0;
  double base_mva = 0.0;
};

CaseSummary summarize(const GridCase& grid);
std::string summary_json(const CaseSummary& s);

}  // namespace ucadmm
