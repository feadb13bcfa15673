#pragma once

#include <string>
#include <vector>

#include "ucadmm/admm.hpp"

namespace ucadmm {

/// Shortest round-trip decimal form of a double.
std::string format_number(double x);

/// report.json. Every wall-clock quantity (and the worker count) sits under
/// the "timing" key.
std::string report_json(const SolveReport& rep, const ScheduleProblem& problem,
                        const AdmmOptions& options, const std::string& case_label);

/// One row per inner iteration.
std::string history_csv(const SolveReport& rep);

/// period x generator matrix of binaries.
std::string schedule_csv(const SolveReport& rep);

/// Long format: period, generator, bus, on, p_mw, q_mvar.
std::string dispatch_csv(const SolveReport& rep, const ScheduleProblem& problem);

/// Writes report.json, history.csv, schedule.csv and dispatch.csv into dir
/// (created if missing).
void write_report_files(const std::string& dir, const SolveReport& rep, const ScheduleProblem& problem,
                        const AdmmOptions& options, const std::string& case_label);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Numeric CSV with a header line. Throws ParseError on ragged rows or
/// non-numeric cells.
CsvTable parse_csv(const std::string& text);

/// The report with the "timing" object removed, re-serialized canonically.
/// Throws ParseError when the text is not a JSON object.
std::string report_without_timing(const std::string& report_text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ucadmm
