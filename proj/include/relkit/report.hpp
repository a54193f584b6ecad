#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "relkit/errors.hpp"
#include "relkit/eval.hpp"

namespace relkit {

// ---------------------------------------------------------------------------
// Exact 1-decimal rendering
//
// Percentages are ratios of integer counts, so display rounding is done in
// integer arithmetic: no float detours, half always rounds up.

/// round-half-up of 100*num/den, in tenths of a percent.
inline long percent_tenths(long num, long den) {
  if (den <= 0) return 0;
  const long long scaled = 1000LL * num;
  return static_cast<long>((2 * scaled + den) / (2LL * den));
}

inline std::string format_tenths(long tenths) {
  std::string sign = tenths < 0 ? "-" : "";
  if (tenths < 0) tenths = -tenths;
  return sign + std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

inline std::string accuracy_display(const EvalCell& cell) {
  return format_tenths(percent_tenths(cell.confusion.tp + cell.confusion.tn, cell.n));
}

// ---------------------------------------------------------------------------
// Report serialization

inline json to_json(const EvalCell& cell) {
  json j;
  j["task"] = cell.task;
  j["shots"] = cell.shots;
  j["n"] = cell.n;
  j["confusion"] = {{"tp", cell.confusion.tp},
                    {"fp", cell.confusion.fp},
                    {"tn", cell.confusion.tn},
                    {"fn", cell.confusion.fn}};
  j["parse_failures"] = cell.parse_failures;
  j["accuracy"] = cell.accuracy_percent();
  auto rp = cell.recall_positive_percent();
  auto rn = cell.recall_negative_percent();
  j["recall_positive"] = rp ? json(*rp) : json(nullptr);
  j["recall_negative"] = rn ? json(*rn) : json(nullptr);
  return j;
}

inline json to_json(const EvalReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells) cells.push_back(to_json(c));
  return json{{"metadata",
               {{"seed", report.metadata.seed},
                {"model", report.metadata.model},
                {"timestamp", report.metadata.timestamp},
                {"config_digest", report.metadata.config_digest}}},
              {"cells", std::move(cells)}};
}

/// Counts are authoritative on load; derived fields are recomputed, not read.
inline EvalReport report_from_json(const json& j) {
  EvalReport report;
  const json& meta = j.at("metadata");
  report.metadata.seed = meta.value("seed", 0ULL);
  report.metadata.model = meta.value("model", "");
  report.metadata.timestamp = meta.value("timestamp", "");
  report.metadata.config_digest = meta.value("config_digest", "");
  for (const auto& item : j.at("cells")) {
    EvalCell cell;
    cell.task = item.at("task").get<std::string>();
    cell.shots = item.at("shots").get<int>();
    cell.n = item.at("n").get<long>();
    const json& c = item.at("confusion");
    cell.confusion = {c.at("tp").get<long>(), c.at("fp").get<long>(), c.at("tn").get<long>(),
                      c.at("fn").get<long>()};
    cell.parse_failures = item.value("parse_failures", 0L);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

/// Loads one report or an array of reports from a file.
inline std::vector<EvalReport> load_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetIoError("cannot open report file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DatasetIoError("cannot parse report file " + path + ": " + e.what());
  }
  std::vector<EvalReport> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(report_from_json(item));
  } else {
    out.push_back(report_from_json(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

/// Accuracy grid: one row per (model, shot), one column per task, accuracies
/// at one decimal, "--" where a cell is absent.
inline std::string render_markdown(const std::vector<EvalReport>& reports) {
  std::vector<std::string> tasks;
  for (const auto& r : reports)
    for (const auto& c : r.cells)
      if (std::find(tasks.begin(), tasks.end(), c.task) == tasks.end()) tasks.push_back(c.task);

  std::ostringstream out;
  out << "| model | shot |";
  for (const auto& t : tasks) out << " " << t << " |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < tasks.size(); ++i) out << "---|";
  out << "\n";
  for (const auto& r : reports) {
    std::set<int> shot_values;
    for (const auto& c : r.cells) shot_values.insert(c.shots);
    for (int shots : shot_values) {
      out << "| " << r.metadata.model << " | " << shots << " |";
      for (const auto& t : tasks) {
        const EvalCell* cell = r.find_cell(t, shots);
        out << " " << (cell ? accuracy_display(*cell) : "--") << " |";
      }
      out << "\n";
    }
  }
  return out.str();
}

inline std::string render_markdown(const EvalReport& report) {
  return render_markdown(std::vector<EvalReport>{report});
}

inline std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Lossless flat CSV; counts reconstruct every derived value.
inline std::string render_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "model,seed,config_digest,timestamp,task,shots,n,tp,fp,tn,fn,parse_failures,"
         "accuracy,recall_positive,recall_negative\n";
  for (const auto& c : report.cells) {
    out << csv_field(report.metadata.model) << ',' << report.metadata.seed << ','
        << csv_field(report.metadata.config_digest) << ',' << csv_field(report.metadata.timestamp)
        << ',' << csv_field(c.task) << ',' << c.shots << ',' << c.n << ',' << c.confusion.tp
        << ',' << c.confusion.fp << ',' << c.confusion.tn << ',' << c.confusion.fn << ','
        << c.parse_failures << ',' << json(c.accuracy_percent()).dump() << ',';
    auto rp = c.recall_positive_percent();
    auto rn = c.recall_negative_percent();
    out << (rp ? json(*rp).dump() : "") << ',' << (rn ? json(*rn).dump() : "") << '\n';
  }
  return out.str();
}

enum class ReportFormat { Markdown, Csv, Json };

inline ReportFormat report_format_from_string(const std::string& s) {
  if (s == "md" || s == "markdown") return ReportFormat::Markdown;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw ConfigError("unknown report format: " + s);
}

inline std::string render_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown: return render_markdown(report);
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Json: return to_json(report).dump(2) + "\n";
  }
  return render_markdown(report);
}

// ---------------------------------------------------------------------------
// Run comparison

struct DeltaCell {
  std::string task;
  int shots = 0;
  long base_tenths = 0;
  long other_tenths = 0;
  long delta_tenths = 0;
};

struct DeltaTable {
  std::vector<DeltaCell> cells;
};

/// Per-cell accuracy deltas (other - base) over the overlapping cells, taken
/// on the displayed 1-decimal values so the delta matches what a reader of
/// the two tables would compute.
inline DeltaTable compare_runs(const EvalReport& base, const EvalReport& other) {
  DeltaTable table;
  for (const auto& cell : base.cells) {
    const EvalCell* match = other.find_cell(cell.task, cell.shots);
    if (!match) continue;
    DeltaCell d;
    d.task = cell.task;
    d.shots = cell.shots;
    d.base_tenths = percent_tenths(cell.confusion.tp + cell.confusion.tn, cell.n);
    d.other_tenths = percent_tenths(match->confusion.tp + match->confusion.tn, match->n);
    d.delta_tenths = d.other_tenths - d.base_tenths;
    table.cells.push_back(std::move(d));
  }
  if (table.cells.empty()) throw NoOverlapError();
  return table;
}

inline std::string format_delta(long delta_tenths) {
  if (delta_tenths == 0) return "0.0";
  return (delta_tenths > 0 ? "+" : "") + format_tenths(delta_tenths);
}

inline std::string render_delta_markdown(const DeltaTable& table) {
  std::ostringstream out;
  out << "| task | shot | base | other | delta |\n|---|---|---|---|---|\n";
  for (const auto& d : table.cells) {
    out << "| " << d.task << " | " << d.shots << " | " << format_tenths(d.base_tenths) << " | "
        << format_tenths(d.other_tenths) << " | " << format_delta(d.delta_tenths) << " |\n";
  }
  return out.str();
}

}  // namespace relkit
