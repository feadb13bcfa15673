#include "ucadmm/grid.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "ucadmm/errors.hpp"

namespace ucadmm {

namespace {

using Matrix = std::vector<std::vector<double>>;

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '\n') {
      in_comment = false;
      out.push_back(c);
    } else if (c == '%') {
      in_comment = true;
    } else if (!in_comment) {
      out.push_back(c);
    }
  }
  return out;
}

double parse_number(std::string_view tok, const std::string& block, std::size_t row,
                    std::size_t col) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    if (tok == "Inf" || tok == "inf") return HUGE_VAL;
    if (tok == "-Inf" || tok == "-inf") return -HUGE_VAL;
    std::ostringstream msg;
    msg << block << " row " << row + 1 << ", column " << col + 1 << ": non-numeric entry '"
        << tok << "'";
    throw ParseError(msg.str());
  }
  return v;
}

Matrix read_block(const std::string& text, const std::string& name) {
  const std::regex head("mpc\\." + name + "\\s*=\\s*\\[");
  std::smatch m;
  if (!std::regex_search(text, m, head)) throw ParseError("missing mpc." + name);
  const std::size_t begin = static_cast<std::size_t>(m.position(0) + m.length(0));
  const std::size_t end = text.find(']', begin);
  if (end == std::string::npos) throw ParseError("unterminated mpc." + name);

  const std::string block = "mpc." + name;
  Matrix rows;
  std::vector<double> row;
  std::string tok;
  auto flush_tok = [&] {
    if (!tok.empty()) {
      row.push_back(parse_number(tok, block, rows.size(), row.size()));
      tok.clear();
    }
  };
  auto flush_row = [&] {
    flush_tok();
    if (!row.empty()) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = begin; i < end; ++i) {
    const char c = text[i];
    if (c == ';' || c == '\n') {
      flush_row();
    } else if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      flush_tok();
    } else if (c == '.' && i + 2 < end && text[i + 1] == '.' && text[i + 2] == '.') {
      // MATPOWER line continuation
      flush_tok();
      while (i < end && text[i] != '\n') ++i;
    } else {
      tok.push_back(c);
    }
  }
  flush_row();
  return rows;
}

double read_scalar(const std::string& text, const std::string& name) {
  const std::regex re("mpc\\." + name + "\\s*=\\s*([^;\\s]+)");
  std::smatch m;
  if (!std::regex_search(text, m, re)) throw ParseError("missing mpc." + name);
  return parse_number(m[1].str(), "mpc." + name, 0, 0);
}

void require_columns(const Matrix& rows, std::size_t n, const std::string& block) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() < n) {
      std::ostringstream msg;
      msg << "mpc." << block << " row " << r + 1 << ": expected at least " << n
          << " columns, found " << rows[r].size();
      throw ParseError(msg.str());
    }
  }
}

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

TwoPortAdmittance admittance_of(const BranchPrimitives& prim) {
  using cd = std::complex<double>;
  if (prim.r == 0.0 && prim.x == 0.0) throw NumericalError("degenerate branch");
  const double tap_mag = prim.tap == 0.0 ? 1.0 : prim.tap;
  if (!(tap_mag > 0.0)) throw NumericalError("degenerate branch: nonpositive tap");
  const double shift = prim.shift_deg * std::numbers::pi / 180.0;

  const cd ys = 1.0 / cd(prim.r, prim.x);
  const cd tap = std::polar(tap_mag, shift);
  const cd ytt = ys + cd(0.0, prim.b / 2.0);
  const cd yff = ytt / (tap_mag * tap_mag);
  const cd yft = -ys / std::conj(tap);
  const cd ytf = -ys / tap;

  TwoPortAdmittance y;
  y.gii = yff.real();
  y.bii = yff.imag();
  y.gij = yft.real();
  y.bij = yft.imag();
  y.gji = ytf.real();
  y.bji = ytf.imag();
  y.gjj = ytt.real();
  y.bjj = ytt.imag();
  return y;
}

std::vector<std::string> find_violations(double base_mva, const std::vector<Bus>& buses,
                                         const std::vector<Branch>& branches,
                                         const std::vector<Generator>& generators) {
  std::vector<std::string> out;
  if (!(base_mva > 0.0) || !std::isfinite(base_mva)) out.push_back("baseMVA must be positive");

  std::vector<int> ids;
  std::size_t refs = 0;
  for (const auto& b : buses) {
    ids.push_back(b.id);
    if (b.is_reference) ++refs;
    if (!finite_all({b.pd, b.qd, b.gs, b.bs, b.vmin, b.vmax, b.base_kv})) {
      out.push_back("bus " + std::to_string(b.id) + ": non-finite field");
    }
    if (!(b.vmin > 0.0)) out.push_back("bus " + std::to_string(b.id) + ": Vmin must be positive");
    if (b.vmin > b.vmax) out.push_back("bus " + std::to_string(b.id) + ": Vmin > Vmax");
  }
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == ids[i - 1]) out.push_back("duplicate bus id " + std::to_string(ids[i]));
  }
  if (refs == 0) {
    out.push_back("no reference bus");
  } else if (refs > 1) {
    out.push_back(std::to_string(refs) + " reference buses (expected exactly 1)");
  }
  auto exists = [&](int id) { return std::binary_search(ids.begin(), ids.end(), id); };

  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto& br = branches[k];
    const std::string name = "branch " + std::to_string(k + 1);
    if (!exists(br.from_bus)) out.push_back(name + ": unknown from bus " + std::to_string(br.from_bus));
    if (!exists(br.to_bus)) out.push_back(name + ": unknown to bus " + std::to_string(br.to_bus));
    if (br.from_bus == br.to_bus) out.push_back(name + ": from bus equals to bus");
    if (!(br.rate_limit > 0.0)) out.push_back(name + ": rate limit must be positive");
    const auto& y = br.y;
    if (!finite_all({y.gii, y.gij, y.gji, y.gjj, y.bii, y.bij, y.bji, y.bjj, br.rate_limit})) {
      out.push_back(name + ": non-finite admittance");
    }
  }
  for (std::size_t k = 0; k < generators.size(); ++k) {
    const auto& g = generators[k];
    const std::string name = "generator " + std::to_string(k + 1);
    if (!exists(g.bus)) out.push_back(name + ": unknown bus " + std::to_string(g.bus));
    if (g.pmin > g.pmax) out.push_back(name + ": Pmin > Pmax");
    if (g.qmin > g.qmax) out.push_back(name + ": Qmin > Qmax");
    if (g.c2 < 0.0) out.push_back(name + ": negative quadratic cost");
    if (!finite_all({g.pmin, g.pmax, g.qmin, g.qmax, g.c2, g.c1, g.c0, g.startup_cost,
                     g.shutdown_cost})) {
      out.push_back(name + ": non-finite field");
    }
  }
  return out;
}

GridCase::GridCase(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches,
                   std::vector<Generator> generators)
    : base_mva_(base_mva),
      buses_(std::move(buses)),
      branches_(std::move(branches)),
      generators_(std::move(generators)) {
  const auto violations = find_violations(base_mva_, buses_, branches_, generators_);
  if (!violations.empty()) {
    std::string msg = "invalid case: ";
    for (std::size_t i = 0; i < violations.size(); ++i) {
      if (i) msg += "; ";
      msg += violations[i];
    }
    throw ValidationError(msg);
  }

  for (std::size_t i = 0; i < buses_.size(); ++i) {
    id_index_.emplace_back(buses_[i].id, i);
    if (buses_[i].is_reference) reference_ = i;
  }
  std::sort(id_index_.begin(), id_index_.end());

  gens_at_bus_.assign(buses_.size(), {});
  ends_at_bus_.assign(buses_.size(), {});
  for (std::size_t g = 0; g < generators_.size(); ++g) {
    auto& gen = generators_[g];
    gen.bus_index = bus_index(gen.bus);
    gens_at_bus_[gen.bus_index].push_back(g);
  }
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    auto& br = branches_[k];
    br.from = bus_index(br.from_bus);
    br.to = bus_index(br.to_bus);
    ends_at_bus_[br.from].push_back({k, true});
    ends_at_bus_[br.to].push_back({k, false});
  }
}

std::size_t GridCase::bus_index(int id) const {
  auto it = std::lower_bound(id_index_.begin(), id_index_.end(), std::make_pair(id, std::size_t{0}));
  if (it == id_index_.end() || it->first != id) {
    throw ValidationError("unknown bus id " + std::to_string(id));
  }
  return it->second;
}

GridCase parse_matpower(std::string_view raw, const ParseOptions& opts) {
  const std::string text = strip_comments(raw);

  const Matrix bus_rows = read_block(text, "bus");
  const Matrix gen_rows = read_block(text, "gen");
  const Matrix branch_rows = read_block(text, "branch");
  const Matrix cost_rows = read_block(text, "gencost");
  const double base = read_scalar(text, "baseMVA");
  if (!(base > 0.0)) throw ValidationError("baseMVA must be positive");

  require_columns(bus_rows, 13, "bus");
  require_columns(gen_rows, 10, "gen");
  require_columns(branch_rows, 11, "branch");
  require_columns(cost_rows, 4, "gencost");

  std::vector<Bus> buses;
  for (const auto& r : bus_rows) {
    Bus b;
    b.id = static_cast<int>(r[0]);
    b.type = static_cast<int>(r[1]);
    b.pd = r[2] / base;
    b.qd = r[3] / base;
    b.gs = r[4] / base;
    b.bs = r[5] / base;
    b.base_kv = r[9];
    b.vmax = r[11];
    b.vmin = r[12];
    b.is_reference = b.type == 3;
    buses.push_back(b);
  }

  if (cost_rows.size() < gen_rows.size()) {
    throw ParseError("mpc.gencost has fewer rows than mpc.gen");
  }
  std::vector<Generator> gens;
  for (std::size_t k = 0; k < gen_rows.size(); ++k) {
    const auto& r = gen_rows[k];
    const auto& c = cost_rows[k];
    if (r[7] <= 0.0) continue;  // out of service
    Generator g;
    g.bus = static_cast<int>(r[0]);
    g.qmax = r[3] / base;
    g.qmin = r[4] / base;
    g.pmax = r[8] / base;
    g.pmin = r[9] / base;

    const int model = static_cast<int>(c[0]);
    if (model != 2) {
      throw ParseError("mpc.gencost row " + std::to_string(k + 1) +
                       ": only polynomial cost (model 2) is supported");
    }
    const int n = static_cast<int>(c[3]);
    if (n > 3) {
      throw ParseError("mpc.gencost row " + std::to_string(k + 1) +
                       ": polynomial degree > 2 is not supported");
    }
    if (n < 0 || c.size() < static_cast<std::size_t>(4 + n)) {
      throw ParseError("mpc.gencost row " + std::to_string(k + 1) + ": missing coefficients");
    }
    // Coefficients are listed highest order first.
    std::array<double, 3> coef{0.0, 0.0, 0.0};  // c0, c1, c2
    for (int j = 0; j < n; ++j) coef[static_cast<std::size_t>(n - 1 - j)] = c[4 + static_cast<std::size_t>(j)];
    g.c2 = coef[2] * base * base;
    g.c1 = coef[1] * base;
    g.c0 = coef[0];
    g.startup_cost = c[1];
    g.shutdown_cost = c[2];
    gens.push_back(g);
  }

  std::vector<Branch> branches;
  for (std::size_t k = 0; k < branch_rows.size(); ++k) {
    const auto& r = branch_rows[k];
    if (r[10] <= 0.0) continue;
    Branch br;
    br.from_bus = static_cast<int>(r[0]);
    br.to_bus = static_cast<int>(r[1]);
    br.prim.r = r[2];
    br.prim.x = r[3];
    br.prim.b = r[4];
    br.prim.tap = r[8] == 0.0 ? 1.0 : r[8];
    br.prim.shift_deg = r[9];
    br.rate_a_file = r[5];
    br.rate_limit = (r[5] > 0.0 ? r[5] : opts.unlimited_rate_factor * base) / base;
    if (r.size() >= 13) {
      br.angmin_deg = r[11];
      br.angmax_deg = r[12];
    }
    try {
      br.y = admittance_of(br.prim);
    } catch (const NumericalError& e) {
      throw ValidationError("branch " + std::to_string(k + 1) + ": " + e.what());
    }
    branches.push_back(br);
  }

  return GridCase(base, std::move(buses), std::move(branches), std::move(gens));
}

GridCase load_matpower(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_matpower(ss.str(), opts);
}

std::string serialize_matpower(const GridCase& grid) {
  const double base = grid.base_mva();
  std::ostringstream o;
  o.precision(17);
  o << "function mpc = serialized_case\n";
  o << "mpc.version = '2';\n";
  o << "mpc.baseMVA = " << base << ";\n\n";
  o << "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  o << "mpc.bus = [\n";
  for (const auto& b : grid.buses()) {
    o << '\t' << b.id << '\t' << b.type << '\t' << b.pd * base << '\t' << b.qd * base << '\t'
      << b.gs * base << '\t' << b.bs * base << "\t1\t1\t0\t" << b.base_kv << "\t1\t" << b.vmax
      << '\t' << b.vmin << ";\n";
  }
  o << "];\n\n";
  o << "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
  o << "mpc.gen = [\n";
  for (const auto& g : grid.generators()) {
    o << '\t' << g.bus << "\t0\t0\t" << g.qmax * base << '\t' << g.qmin * base << "\t1\t" << base
      << "\t1\t" << g.pmax * base << '\t' << g.pmin * base << ";\n";
  }
  o << "];\n\n";
  o << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n";
  o << "mpc.branch = [\n";
  for (const auto& br : grid.branches()) {
    o << '\t' << br.from_bus << '\t' << br.to_bus << '\t' << br.prim.r << '\t' << br.prim.x << '\t'
      << br.prim.b << '\t' << br.rate_a_file << "\t0\t0\t" << br.prim.tap << '\t'
      << br.prim.shift_deg << "\t1\t" << br.angmin_deg << '\t' << br.angmax_deg << ";\n";
  }
  o << "];\n\n";
  o << "mpc.gencost = [\n";
  for (const auto& g : grid.generators()) {
    o << "\t2\t" << g.startup_cost << '\t' << g.shutdown_cost << "\t3\t" << g.c2 / (base * base)
      << '\t' << g.c1 / base << '\t' << g.c0 << ";\n";
  }
  o << "];\n";
  return o.str();
}

CaseSummary summarize(const GridCase& grid) {
  CaseSummary s;
  s.buses = grid.buses().size();
  s.branches = grid.branches().size();
  s.generators = grid.generators().size();
  s.reference_buses = static_cast<std::size_t>(
      std::count_if(grid.buses().begin(), grid.buses().end(), [](const Bus& b) { return b.is_reference; }));
  s.base_mva = grid.base_mva();
  return s;
}

std::string summary_json(const CaseSummary& s) {
  nlohmann::ordered_json j;
  j["buses"] = s.buses;
  j["branches"] = s.branches;
  j["generators"] = s.generators;
  j["reference_buses"] = s.reference_buses;
  j["base_mva"] = s.base_mva;
  return j.dump(2);
}

}  // namespace ucadmm
