#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "relkit/augment.hpp"
#include "relkit/config.hpp"
#include "relkit/core.hpp"
#include "relkit/eval.hpp"
#include "relkit/http_backend.hpp"
#include "relkit/pair_builder.hpp"
#include "relkit/report.hpp"
#include "relkit/similarity.hpp"
#include "relkit/source_record.hpp"

namespace relkit {

namespace fs = std::filesystem;

inline std::string utc_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// build: collect -> extract/format -> augment -> pair -> convert

struct BuildTaskResult {
  std::string task;
  std::string strategy;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t train = 0;
  std::size_t test = 0;
  std::string dataset_path;
};

namespace detail {

/// Fills missing reasoning fields through the augmentation backend; cached by
/// request digest so reruns are free.
inline void fill_missing_reasoning(std::vector<SourceRecord>& records, ChatBackend& backend,
                                   AugmentationCache* cache) {
  std::vector<AugmentationRequest> requests;
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.field("reasoning") || !r.qa_series || r.qa_series->empty()) continue;
    AugmentationRequest req;
    req.kind = AugmentationKind::ReasoningJustification;
    req.image = r.image;
    req.question = r.qa_series->back().question;
    req.answer = r.qa_series->back().answer;
    requests.push_back(std::move(req));
    indices.push_back(i);
  }
  if (requests.empty()) return;
  auto texts = augment(requests, backend, cache);
  for (std::size_t k = 0; k < indices.size(); ++k)
    records[indices[k]].fields["reasoning"] = texts[k];
}

}  // namespace detail

inline std::vector<BuildTaskResult> run_build(const ProjectConfig& config,
                                              const std::vector<std::string>& task_filter = {}) {
  for (const auto& name : task_filter)
    if (!config.find_task(name)) throw ConfigError("unknown task in filter: " + name);

  fs::create_directories(fs::path(config.output_dir) / "datasets");
  fs::create_directories(fs::path(config.output_dir) / "cache");

  std::unique_ptr<ChatBackend> aug_backend;
  std::optional<AugmentationCache> aug_cache;
  if (config.augmentation_backend) {
    aug_backend = make_backend(*config.augmentation_backend);
    aug_cache.emplace((fs::path(config.output_dir) / "cache" / "augmentations.jsonl").string());
  }

  auto build_one = [&](const TaskSpec& spec) {
    auto src = config.sources.find(spec.name);
    if (src == config.sources.end()) throw ConfigError("no source manifest for task: " + spec.name);

    auto records = load_manifest(src->second);

    const auto strategy = strategy_from_string(spec.strategy);
    if ((strategy == PairingStrategy::SimilarImageSwap ||
         strategy == PairingStrategy::SimilarTextSwap) &&
        aug_backend)
      detail::fill_missing_reasoning(records, *aug_backend, &*aug_cache);

    std::optional<SimilarityTable> sim;
    if (auto it = config.similarity_tables.find(spec.name); it != config.similarity_tables.end())
      sim = SimilarityTable::load(it->second);

    auto samples = build_positives(records, spec);
    const std::size_t positives = samples.size();
    auto negatives = build_negatives(records, spec, sim ? &*sim : nullptr, config.seed,
                                     config.build_options);
    const std::size_t negative_count = negatives.size();
    samples.insert(samples.end(), std::make_move_iterator(negatives.begin()),
                   std::make_move_iterator(negatives.end()));

    if (auto h = config.holdouts.find(spec.name); h != config.holdouts.end())
      samples = split_holdout(samples, category_predicate(h->second.category), h->second.suffix);

    BuildTaskResult result;
    result.task = spec.name;
    result.strategy = spec.strategy;
    result.positives = positives;
    result.negatives = negative_count;
    for (const auto& s : samples) (s.split == Split::Train ? result.train : result.test)++;
    result.dataset_path =
        (fs::path(config.output_dir) / "datasets" / (spec.name + ".jsonl")).string();
    save_dataset(samples, result.dataset_path);
    return result;
  };

  std::vector<BuildTaskResult> results;
  for (const auto& spec : config.tasks) {
    if (!task_filter.empty() &&
        std::find(task_filter.begin(), task_filter.end(), spec.name) == task_filter.end())
      continue;
    try {
      results.push_back(build_one(spec));
    } catch (const ConfigError&) {
      throw;
    } catch (const BackendError& e) {
      throw AugmentationError("task " + spec.name + ": " + e.what());
    } catch (const Error& e) {
      throw Error("task " + spec.name + ": " + e.what());
    }
  }

  // Achieved counts are reported, never forced to match any target size.
  json manifest;
  manifest["seed"] = config.seed;
  manifest["config_digest"] = config.config_digest;
  json tasks = json::object();
  for (const auto& r : results) {
    tasks[r.task] = {{"strategy", r.strategy}, {"positives", r.positives},
                     {"negatives", r.negatives}, {"train", r.train},
                     {"test", r.test},           {"dataset", r.dataset_path}};
  }
  manifest["tasks"] = std::move(tasks);
  std::ofstream out(fs::path(config.output_dir) / "build_manifest.json",
                    std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << '\n';
  return results;
}

// ---------------------------------------------------------------------------
// eval

struct EvalCommandOptions {
  std::vector<std::string> tasks;  // empty = every task with test samples
  std::vector<int> shots{0};
  SelectorMode mode = SelectorMode::BalancedRandom;
  Label first_label = Label::Relevant;
  std::string run_name;            // empty = derived from config digest
  std::string timestamp;           // empty = wall clock; pin it for reproducible outputs
};

struct EvalCommandResult {
  EvalReport report;
  std::string markdown;
  std::vector<std::pair<std::string, int>> failed_cells;
  std::string predictions_path;
  std::vector<std::string> report_paths;
};

inline std::vector<RelevancySample> load_built_datasets(const ProjectConfig& config) {
  std::vector<RelevancySample> all;
  for (const auto& spec : config.tasks) {
    const fs::path path = fs::path(config.output_dir) / "datasets" / (spec.name + ".jsonl");
    if (!fs::exists(path)) continue;
    auto samples = load_dataset(path.string());
    all.insert(all.end(), std::make_move_iterator(samples.begin()),
               std::make_move_iterator(samples.end()));
  }
  return all;
}

inline EvalCommandResult run_eval_command(const ProjectConfig& config,
                                          const EvalCommandOptions& options) {
  auto dataset = load_built_datasets(config);
  if (dataset.empty())
    throw ConfigError("no built datasets under " + config.output_dir + "; run build first");

  RunConfig run_cfg;
  run_cfg.tasks = options.tasks;
  if (run_cfg.tasks.empty()) {
    std::set<std::string> with_test;
    for (const auto& s : dataset)
      if (s.split == Split::Test) with_test.insert(s.task);
    run_cfg.tasks.assign(with_test.begin(), with_test.end());
  }
  if (run_cfg.tasks.empty()) throw ConfigError("no test samples in built datasets");
  run_cfg.shots = options.shots;
  run_cfg.selector_mode = options.mode;
  run_cfg.first_label = options.first_label;
  run_cfg.budget = config.budget;
  run_cfg.seed = config.seed;
  run_cfg.max_parallel_requests = config.backend.max_parallel_requests;

  std::string run_name = options.run_name;
  if (run_name.empty()) {
    std::uint64_t h = fnv1a64(config.config_digest);
    for (const auto& t : run_cfg.tasks) h = fnv1a64(t, h);
    for (int s : run_cfg.shots) h = fnv1a64(static_cast<std::uint64_t>(s), h);
    h = fnv1a64(to_string(run_cfg.selector_mode), h);
    run_name = "run-" + hex64(h).substr(0, 8);
  }

  fs::create_directories(fs::path(config.output_dir) / "predictions");
  fs::create_directories(fs::path(config.output_dir) / "reports");
  fs::create_directories(fs::path(config.output_dir) / "logs");

  const std::string predictions_path =
      (fs::path(config.output_dir) / "predictions" / (run_name + ".jsonl")).string();

  // Resume guard: a named run may only continue under the configuration that
  // started it, otherwise stale predictions would silently mix in.
  const fs::path meta_path =
      fs::path(config.output_dir) / "predictions" / (run_name + ".meta.json");
  json run_meta{{"config_digest", config.config_digest},
                {"seed", config.seed},
                {"tasks", run_cfg.tasks},
                {"shots", run_cfg.shots},
                {"mode", to_string(run_cfg.selector_mode)},
                {"first_label", to_string(run_cfg.first_label)}};
  if (fs::exists(meta_path)) {
    std::ifstream meta_in(meta_path);
    json existing = json::parse(meta_in, nullptr, false);
    if (existing != run_meta)
      throw ConfigError("run '" + run_name +
                        "' already has predictions from a different configuration; pick a new "
                        "--run-name or remove " +
                        predictions_path);
  } else {
    std::ofstream meta_out(meta_path, std::ios::binary | std::ios::trunc);
    meta_out << run_meta.dump(2) << '\n';
  }

  PredictionStore store(predictions_path);

  AuditLog audit((fs::path(config.output_dir) / "logs" / (run_name + ".audit.jsonl")).string());
  auto backend = make_backend(config.backend, &audit);

  const auto specs = config.task_specs();
  EvalRun run = run_eval_collect(dataset, specs, run_cfg, *backend,
                                 config.make_token_counter(), &store);

  ReportMetadata metadata;
  metadata.seed = config.seed;
  metadata.model = config.backend.model_name;
  metadata.timestamp = options.timestamp.empty() ? utc_timestamp_now() : options.timestamp;
  metadata.config_digest = config.config_digest;

  EvalCommandResult result;
  result.report = build_report(run.outcomes, truth_map(dataset), metadata, run.failed_cells);
  result.markdown = render_markdown(result.report);
  result.failed_cells = run.failed_cells;
  result.predictions_path = predictions_path;
  for (const auto& [ext, format] :
       std::vector<std::pair<std::string, ReportFormat>>{{".md", ReportFormat::Markdown},
                                                         {".csv", ReportFormat::Csv},
                                                         {".json", ReportFormat::Json}}) {
    const std::string path =
        (fs::path(config.output_dir) / "reports" / (run_name + ext)).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << render_report(result.report, format);
    result.report_paths.push_back(path);
  }
  return result;
}

// ---------------------------------------------------------------------------
// report (offline: no backend is ever queried)

inline std::vector<EvalOutcome> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedPredictionsError(path, "cannot open");
  std::vector<EvalOutcome> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(outcome_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw MalformedPredictionsError(path, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw MalformedPredictionsError(path, "no predictions");
  return out;
}

struct ReportCommandResult {
  std::vector<EvalReport> reports;
  std::string rendered;
};

inline ReportCommandResult run_report_command(const ProjectConfig& config,
                                              const std::vector<std::string>& prediction_paths,
                                              ReportFormat format = ReportFormat::Markdown) {
  if (prediction_paths.empty()) throw ConfigError("report needs at least one predictions file");
  const auto truth = truth_map(load_built_datasets(config));

  ReportCommandResult result;
  for (const auto& path : prediction_paths) {
    auto outcomes = load_predictions(path);
    ReportMetadata metadata;
    metadata.seed = config.seed;
    metadata.model = fs::path(path).stem().string();
    metadata.config_digest = config.config_digest;
    try {
      result.reports.push_back(build_report(outcomes, truth, metadata));
    } catch (const UnknownSampleError& e) {
      throw MalformedPredictionsError(path, e.what());
    }
  }

  if (result.reports.size() == 1) {
    result.rendered = render_report(result.reports.front(), format);
  } else if (format == ReportFormat::Markdown) {
    result.rendered = render_markdown(result.reports) + "\n" +
                      render_delta_markdown(compare_runs(result.reports[0], result.reports[1]));
  } else if (format == ReportFormat::Csv) {
    for (const auto& r : result.reports) result.rendered += render_csv(r);
  } else {
    json arr = json::array();
    for (const auto& r : result.reports) arr.push_back(to_json(r));
    result.rendered = arr.dump(2) + "\n";
  }
  return result;
}

// ---------------------------------------------------------------------------
// validate (dataset lint)

struct ValidateResult {
  std::size_t files = 0;
  std::size_t samples = 0;
  std::vector<std::string> warnings;
};

/// Lints built datasets: every sample must pass validation (load_dataset
/// enforces that); train/test source-record overlap within a task is legal
/// but worth surfacing, so it warns.
inline ValidateResult run_validate(const ProjectConfig& config,
                                   std::vector<std::string> paths = {}) {
  if (paths.empty()) {
    for (const auto& spec : config.tasks) {
      const fs::path p = fs::path(config.output_dir) / "datasets" / (spec.name + ".jsonl");
      if (fs::exists(p)) paths.push_back(p.string());
    }
  }
  ValidateResult result;
  for (const auto& path : paths) {
    auto samples = load_dataset(path);
    result.files++;
    result.samples += samples.size();
    std::map<std::string, std::set<std::string>> train_records, test_records;
    for (const auto& s : samples)
      (s.split == Split::Train ? train_records : test_records)[s.task].insert(
          s.provenance.source_record_id);
    for (const auto& [task, test_ids] : test_records) {
      for (const auto& [train_task, train_ids] : train_records) {
        if (train_task != task) continue;
        for (const auto& id : test_ids)
          if (train_ids.count(id))
            result.warnings.push_back(path + ": task " + task + ": source record " + id +
                                      " appears in both train and test splits");
      }
    }
  }
  return result;
}

}  // namespace relkit
