#include "ucadmm/report_io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ucadmm/errors.hpp"

namespace ucadmm {

using ojson = nlohmann::ordered_json;

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

ojson table_json(const Table2<double>& t) {
  ojson out = ojson::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    ojson row = ojson::array();
    for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
    out.push_back(row);
  }
  return out;
}

}  // namespace

std::string report_json(const SolveReport& rep, const ScheduleProblem& problem,
                        const AdmmOptions& options, const std::string& case_label) {
  const double base = problem.grid.base_mva();
  ojson j;
  j["case"] = case_label;
  j["status"] = to_string(rep.status);
  j["objective"] = rep.objective;
  j["primal_infeasibility"] = rep.primal_infeasibility;
  j["z_inf"] = rep.z_inf;
  j["z_two"] = rep.z_two;
  j["iterations"] = {{"outer", rep.outer_iterations},
                     {"total_inner", rep.total_inner},
                     {"warm_start_inner", rep.warm_start_inner},
                     {"inner_per_outer", rep.inner_per_outer}};
  j["z_inf_history"] = rep.z_inf_history;
  j["z_two_history"] = rep.z_two_history;
  j["beta_history"] = rep.beta_history;
  j["final_beta"] = rep.final_beta;
  j["problem"] = {{"horizon", problem.horizon},
                  {"buses", problem.grid.buses().size()},
                  {"branches", problem.grid.branches().size()},
                  {"generators", problem.grid.generators().size()},
                  {"coupling_rows", rep.rows},
                  {"base_mva", base}};
  j["parameters"] = {{"rho_pq", rep.rho.rho_pq},
                     {"rho_va", rep.rho.rho_va},
                     {"rho_uc", rep.rho.rho_uc},
                     {"tau", options.tau},
                     {"theta", options.theta},
                     {"eps_outer", options.eps_outer},
                     {"max_outer", options.max_outer},
                     {"max_inner", options.max_inner},
                     {"max_total_inner", options.max_total_inner},
                     {"uc_mode", options.mode == UcMode::Optimize ? "optimize" : "fixed_on"}};
  j["uc_feasible"] = rep.uc_violations.empty();
  j["uc_violations"] = rep.uc_violations;
  j["coupling_violation"] = rep.ramp_violation;
  j["line_flags"] = rep.line_flags;

  ojson sched = ojson::array();
  for (std::size_t t = 0; t < rep.schedule.rows(); ++t) {
    ojson row = ojson::array();
    for (std::size_t g = 0; g < rep.schedule.cols(); ++g) row.push_back(static_cast<int>(rep.schedule(t, g)));
    sched.push_back(row);
  }
  j["schedule"] = sched;
  Table2<double> p_mw = rep.dispatch_p, q_mvar = rep.dispatch_q;
  for (auto& x : p_mw.data()) x *= base;
  for (auto& x : q_mvar.data()) x *= base;
  j["dispatch_mw"] = table_json(p_mw);
  j["dispatch_mvar"] = table_json(q_mvar);
  j["voltage_pu"] = table_json(rep.voltage);
  j["angle_rad"] = table_json(rep.angle);

  const auto& tm = rep.timing;
  j["timing"] = {{"seconds_total", tm.total},
                 {"seconds_warm_start", tm.warm_start},
                 {"seconds_uc_dp", tm.uc_dp},
                 {"seconds_opf_x", tm.opf_x},
                 {"seconds_uc_bar", tm.uc_bar},
                 {"seconds_bus", tm.bus},
                 {"seconds_multipliers", tm.multipliers},
                 {"workers", tm.workers}};
  return j.dump(2) + "\n";
}

std::string history_csv(const SolveReport& rep) {
  std::ostringstream os;
  os << "outer,inner,total,primal,dual,infeasibility,z_inf,beta,objective\n";
  for (const auto& h : rep.history) {
    os << h.outer << ',' << h.inner << ',' << h.total << ',' << format_number(h.primal) << ','
       << format_number(h.dual) << ',' << format_number(h.infeasibility) << ',' << format_number(h.z_inf)
       << ',' << format_number(h.beta) << ',' << format_number(h.objective) << '\n';
  }
  return os.str();
}

std::string schedule_csv(const SolveReport& rep) {
  std::ostringstream os;
  os << "period";
  for (std::size_t g = 0; g < rep.schedule.cols(); ++g) os << ",g" << g + 1;
  os << '\n';
  for (std::size_t t = 0; t < rep.schedule.rows(); ++t) {
    os << t + 1;
    for (std::size_t g = 0; g < rep.schedule.cols(); ++g) os << ',' << static_cast<int>(rep.schedule(t, g));
    os << '\n';
  }
  return os.str();
}

std::string dispatch_csv(const SolveReport& rep, const ScheduleProblem& problem) {
  const double base = problem.grid.base_mva();
  const auto& gens = problem.grid.generators();
  std::ostringstream os;
  os << "period,generator,bus,on,p_mw,q_mvar\n";
  for (std::size_t t = 0; t < rep.dispatch_p.rows(); ++t) {
    for (std::size_t g = 0; g < rep.dispatch_p.cols(); ++g) {
      os << t + 1 << ',' << g + 1 << ',' << gens[g].bus << ',' << static_cast<int>(rep.schedule(t, g)) << ','
         << format_number(rep.dispatch_p(t, g) * base) << ',' << format_number(rep.dispatch_q(t, g) * base)
         << '\n';
    }
  }
  return os.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("write failed: " + path);
}

void write_report_files(const std::string& dir, const SolveReport& rep, const ScheduleProblem& problem,
                        const AdmmOptions& options, const std::string& case_label) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  write_text_file((d / "report.json").string(), report_json(rep, problem, options, case_label));
  write_text_file((d / "history.csv").string(), history_csv(rep));
  write_text_file((d / "schedule.csv").string(), schedule_csv(rep));
  write_text_file((d / "dispatch.csv").string(), dispatch_csv(rep, problem));
}

CsvTable parse_csv(const std::string& text) {
  CsvTable out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (out.header.empty()) {
      out.header = split(line);
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != out.header.size()) {
      throw ParseError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(out.header.size()) +
                       " cells, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
        throw ParseError("csv line " + std::to_string(lineno) + ": non-numeric cell '" + c + "'");
      }
      row.push_back(v);
    }
    out.rows.push_back(std::move(row));
  }
  if (out.header.empty()) throw ParseError("csv: missing header");
  return out;
}

std::string report_without_timing(const std::string& report_text) {
  ojson j;
  try {
    j = ojson::parse(report_text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("report: not a JSON object");
  j.erase("timing");
  return j.dump();
}

}  // namespace ucadmm
