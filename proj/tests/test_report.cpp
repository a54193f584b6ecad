#include <gtest/gtest.h>

#include <sstream>

#include "relkit/report.hpp"
#include "test_util.hpp"

using namespace relkit;

namespace {

EvalCell cell_of(const std::string& task, int shots, long tp, long fp, long tn, long fn,
                 long failures = 0) {
  EvalCell c;
  c.task = task;
  c.shots = shots;
  c.confusion = {tp, fp, tn, fn};
  c.n = tp + fp + tn + fn;
  c.parse_failures = failures;
  return c;
}

EvalReport report_of(const std::string& model, std::vector<EvalCell> cells) {
  EvalReport r;
  r.metadata.model = model;
  r.metadata.seed = 1;
  r.metadata.timestamp = "2026-01-01T00:00:00Z";
  r.metadata.config_digest = "deadbeef";
  r.cells = std::move(cells);
  return r;
}

/// Pulls one accuracy cell out of a rendered markdown grid.
std::string markdown_cell(const std::string& markdown, const std::string& model, int shot,
                          const std::string& task) {
  std::istringstream in(markdown);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::string> columns;
  {
    std::istringstream header(line);
    std::string col;
    while (std::getline(header, col, '|')) {
      col.erase(0, col.find_first_not_of(' '));
      col.erase(col.find_last_not_of(' ') + 1);
      columns.push_back(col);
    }
  }
  std::getline(in, line);  // separator
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cellv;
    while (std::getline(row, cellv, '|')) {
      cellv.erase(0, cellv.find_first_not_of(' '));
      cellv.erase(cellv.find_last_not_of(' ') + 1);
      cells.push_back(cellv);
    }
    if (cells.size() < 3) continue;
    if (cells[1] == model && cells[2] == std::to_string(shot)) {
      for (std::size_t i = 3; i < columns.size() && i < cells.size(); ++i)
        if (columns[i] == task) return cells[i];
    }
  }
  return "<missing>";
}

}  // namespace

TEST(PercentTenths, HalfAlwaysRoundsUp) {
  EXPECT_EQ(percent_tenths(977, 1000), 977);   // 97.7 exactly
  EXPECT_EQ(percent_tenths(293, 300), 977);    // 97.666... -> 97.7
  EXPECT_EQ(percent_tenths(1, 2000), 1);       // 0.05 -> 0.1 (half up)
  EXPECT_EQ(percent_tenths(1, 3), 333);        // 33.333... -> 33.3
  EXPECT_EQ(percent_tenths(2, 3), 667);        // 66.666... -> 66.7
  EXPECT_EQ(percent_tenths(0, 10), 0);
  EXPECT_EQ(percent_tenths(10, 10), 1000);
  EXPECT_EQ(format_tenths(977), "97.7");
  EXPECT_EQ(format_tenths(1000), "100.0");
  EXPECT_EQ(format_tenths(0), "0.0");
  EXPECT_EQ(format_tenths(-21), "-2.1");
}

TEST(RenderMarkdown, PublishedFixtureReproducesEveryCell) {
  const auto reports = load_reports(std::string(RELKIT_SOURCE_DIR) + "/tests/data/published_accuracies.json");
  ASSERT_EQ(reports.size(), 4u);
  const auto markdown = render_markdown(reports);

  EXPECT_EQ(markdown_cell(markdown, "Ours-7B", 0, "wiki"), "97.7");
  EXPECT_EQ(markdown_cell(markdown, "LLaVA 1.5-7B", 0, "recipe"), "32.2");

  const std::vector<std::string> tasks{"lv_cr",    "lv_cv",    "lv_dt",    "wiki",
                                       "recipe",   "textvqa",  "tdiuc",    "lv_cr_ho",
                                       "lv_cv_ho", "lv_dt_ho", "chartqa",  "infographics"};
  struct Row {
    const char* model;
    int shot;
    std::vector<const char*> values;
  };
  const std::vector<Row> expected{
      {"LLaVA 1.5-7B", 0, {"70.8", "74.3", "69.7", "49.3", "32.2", "70.0", "68.7", "73.9",
                           "75.4", "70.0", "75.1", "70.9"}},
      {"Ours-7B", 0, {"91.9", "93.5", "96.0", "97.7", "88.3", "97.1", "89.3", "92.2", "93.1",
                      "94.1", "94.6", "80.8"}},
      {"Ours-7B", 2, {"92.4", "93.4", "96.7", "93.7", "88.2", "96.5", "89.3", "92.0", "92.8",
                      "94.5", "94.8", "82.3"}},
      {"LLaVA 1.5-13B", 0, {"63.0", "70.6", "78.4", "49.0", "29.6", "55.9", "68.0", "72.5",
                            "74.0", "80.9", "53.1", "65.4"}},
      {"Ours-13B", 0, {"93.7", "94.7", "97.0", "98.3", "88.6", "96.3", "89.7", "93.6", "93.6",
                       "95.0", "91.8", "79.7"}},
      {"Ours-13B", 2, {"93.6", "94.6", "97.0", "95.3", "89.3", "96.4", "88.3", "93.7", "93.3",
                       "95.2", "93.0", "79.1"}},
  };
  for (const auto& row : expected) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      EXPECT_EQ(markdown_cell(markdown, row.model, row.shot, tasks[i]), row.values[i])
          << row.model << "/" << row.shot << "/" << tasks[i];
    }
  }
}

TEST(RenderMarkdown, AbsentCellsRenderAsDashes) {
  auto a = report_of("m", {cell_of("wiki", 0, 5, 0, 5, 0), cell_of("recipe", 0, 4, 1, 4, 1)});
  auto b = report_of("m2", {cell_of("wiki", 0, 3, 2, 3, 2)});  // no recipe cell
  const auto markdown = render_markdown({a, b});
  EXPECT_EQ(markdown_cell(markdown, "m2", 0, "recipe"), "--");
  EXPECT_EQ(markdown_cell(markdown, "m2", 0, "wiki"), "60.0");
}

TEST(ReportJson, LosslessRoundTrip) {
  auto report = report_of("model-x", {cell_of("wiki", 0, 293, 7, 0, 0, 2),
                                      cell_of("wiki", 2, 100, 50, 100, 50)});
  auto j = to_json(report);
  auto loaded = report_from_json(j);
  EXPECT_EQ(loaded.metadata.model, "model-x");
  EXPECT_EQ(loaded.metadata.timestamp, "2026-01-01T00:00:00Z");
  ASSERT_EQ(loaded.cells.size(), 2u);
  EXPECT_EQ(loaded.cells[0].confusion.tp, 293);
  EXPECT_EQ(loaded.cells[0].parse_failures, 2);
  EXPECT_EQ(loaded.cells[1].n, 300);
  EXPECT_EQ(to_json(loaded), j);  // no information lost
}

TEST(ReportCsv, CountsReconstructDerivedValues) {
  auto report = report_of("model-x", {cell_of("wiki", 0, 7, 1, 1, 1)});
  const auto csv = render_csv(report);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header,
            "model,seed,config_digest,timestamp,task,shots,n,tp,fp,tn,fn,parse_failures,"
            "accuracy,recall_positive,recall_negative");
  std::vector<std::string> fields;
  std::istringstream row_in(row);
  std::string f;
  while (std::getline(row_in, f, ',')) fields.push_back(f);
  ASSERT_EQ(fields.size(), 15u);
  EXPECT_EQ(fields[6], "10");  // n
  EXPECT_EQ(fields[7], "7");   // tp
  const long tp = std::stol(fields[7]), fp = std::stol(fields[8]), tn = std::stol(fields[9]),
             fn = std::stol(fields[10]);
  EXPECT_DOUBLE_EQ(100.0 * (tp + tn) / (tp + fp + tn + fn), std::stod(fields[12]));
  EXPECT_DOUBLE_EQ(100.0 * tp / (tp + fn), std::stod(fields[13]));
}

TEST(ReportCsv, FieldsWithCommasAreQuoted) {
  auto report = report_of("model, with comma", {cell_of("task\"x", 0, 1, 0, 1, 0)});
  const auto csv = render_csv(report);
  EXPECT_NE(csv.find("\"model, with comma\""), std::string::npos);
  EXPECT_NE(csv.find("\"task\"\"x\""), std::string::npos);
}

TEST(ReportJson, LoadReportsHandlesSingleObjectAndArray) {
  testutil::TempDir dir("loadrep");
  auto report = report_of("solo", {cell_of("wiki", 0, 1, 0, 1, 0)});
  testutil::write_file(dir.file("one.json"), to_json(report).dump());
  auto single = load_reports(dir.file("one.json"));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].metadata.model, "solo");
  testutil::write_file(dir.file("many.json"),
                       json::array({to_json(report), to_json(report)}).dump());
  EXPECT_EQ(load_reports(dir.file("many.json")).size(), 2u);
  testutil::write_file(dir.file("broken.json"), "{not json");
  EXPECT_THROW(load_reports(dir.file("broken.json")), DatasetIoError);
}

TEST(CompareRuns, IdenticalReportsGiveZeroDeltas) {
  auto report = report_of("m", {cell_of("wiki", 0, 5, 5, 5, 5), cell_of("wiki", 2, 9, 1, 9, 1)});
  auto deltas = compare_runs(report, report);
  ASSERT_EQ(deltas.cells.size(), 2u);
  for (const auto& d : deltas.cells) {
    EXPECT_EQ(d.delta_tenths, 0);
    EXPECT_EQ(format_delta(d.delta_tenths), "0.0");
  }
}

TEST(CompareRuns, HandBuiltDeltaIsTwentyOnePointOne) {
  // 50.0% -> 71.1%: delta +21.1
  auto base = report_of("m", {cell_of("wiki", 0, 500, 500, 0, 0)});
  auto other = report_of("m", {cell_of("wiki", 0, 711, 289, 0, 0)});
  auto deltas = compare_runs(base, other);
  ASSERT_EQ(deltas.cells.size(), 1u);
  EXPECT_EQ(deltas.cells[0].delta_tenths, 211);
  EXPECT_EQ(format_delta(deltas.cells[0].delta_tenths), "+21.1");
  auto reversed = compare_runs(other, base);
  EXPECT_EQ(format_delta(reversed.cells[0].delta_tenths), "-21.1");
  const auto markdown = render_delta_markdown(deltas);
  EXPECT_NE(markdown.find("+21.1"), std::string::npos);
}

TEST(CompareRuns, DisjointCellsThrowNoOverlap) {
  auto a = report_of("m", {cell_of("wiki", 0, 1, 0, 1, 0)});
  auto b = report_of("m", {cell_of("recipe", 2, 1, 0, 1, 0)});
  EXPECT_THROW(compare_runs(a, b), NoOverlapError);
}

TEST(RenderReport, FormatsDispatch) {
  auto report = report_of("m", {cell_of("wiki", 0, 5, 0, 5, 0)});
  EXPECT_NE(render_report(report, ReportFormat::Markdown).find("| model |"), std::string::npos);
  EXPECT_NE(render_report(report, ReportFormat::Csv).find("model,seed"), std::string::npos);
  EXPECT_NO_THROW(json::parse(render_report(report, ReportFormat::Json)));
}
