#pragma once

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "relkit/backend.hpp"
#include "relkit/core.hpp"
#include "relkit/digest.hpp"
#include "relkit/errors.hpp"
#include "relkit/prompt.hpp"

namespace relkit {

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  // Inference always prompts with the task's fixed hand-crafted instruction,
  // never one from the training pool.
  enum class InstructionSource { EvalHandcrafted };

  std::vector<std::string> tasks;
  std::vector<int> shots{0};
  SelectorMode selector_mode = SelectorMode::BalancedRandom;
  Label first_label = Label::Relevant;
  TokenBudget budget;
  std::uint64_t seed = 0;
  InstructionSource instruction_source = InstructionSource::EvalHandcrafted;
  int max_parallel_requests = 1;
  double cell_failure_tolerance = 0.05;  // abort a cell past this failure rate
};

inline void validate_run_config(const RunConfig& cfg) {
  if (cfg.tasks.empty()) throw ValidationError("run config: tasks empty");
  for (int s : cfg.shots)
    if (s < 0) throw ValidationError("run config: shots must be >= 0");
  if (cfg.max_parallel_requests < 1)
    throw ValidationError("run config: max_parallel_requests must be >= 1");
  validate_budget(cfg.budget);
}

// ---------------------------------------------------------------------------
// Metrics

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;
};

/// One (task, shots) cell. Counts are the source of truth; every percentage
/// is derived, full precision, and only rounded at render time.
struct EvalCell {
  std::string task;
  int shots = 0;
  ConfusionCounts confusion;
  long n = 0;
  long parse_failures = 0;

  long n_pos() const { return confusion.tp + confusion.fn; }
  long n_neg() const { return confusion.tn + confusion.fp; }

  double accuracy_percent() const {
    return n == 0 ? 0.0 : 100.0 * static_cast<double>(confusion.tp + confusion.tn) / n;
  }
  std::optional<double> recall_positive_percent() const {
    if (n_pos() == 0) return std::nullopt;
    return 100.0 * static_cast<double>(confusion.tp) / n_pos();
  }
  std::optional<double> recall_negative_percent() const {
    if (n_neg() == 0) return std::nullopt;
    return 100.0 * static_cast<double>(confusion.tn) / n_neg();
  }
};

struct ReportMetadata {
  std::uint64_t seed = 0;
  std::string model;
  std::string timestamp;
  std::string config_digest;
};

struct EvalReport {
  ReportMetadata metadata;
  std::vector<EvalCell> cells;  // insertion order defines render order

  const EvalCell* find_cell(const std::string& task, int shots) const {
    for (const auto& c : cells)
      if (c.task == task && c.shots == shots) return &c;
    return nullptr;
  }
};

/// Confusion counts for one cell. Parse failures count against the true
/// class: a failed prediction on a relevant sample is a miss (fn), on a
/// not-relevant sample a false alarm (fp). tp+fp+tn+fn always equals n.
inline EvalCell compute_metrics(const std::vector<Prediction>& predictions,
                                const std::unordered_map<std::string, Label>& truth) {
  EvalCell cell;
  for (const auto& p : predictions) {
    auto it = truth.find(p.sample_id);
    if (it == truth.end()) throw UnknownSampleError(p.sample_id);
    const Label actual = it->second;
    ++cell.n;
    if (!p.parsed.ok()) ++cell.parse_failures;
    const bool predicted_relevant = p.parsed.ok() && *p.parsed.label == Label::Relevant;
    const bool correct = p.parsed.ok() && *p.parsed.label == actual;
    if (actual == Label::Relevant) {
      correct ? ++cell.confusion.tp : ++cell.confusion.fn;
    } else {
      (p.parsed.ok() && !predicted_relevant) ? ++cell.confusion.tn : ++cell.confusion.fp;
    }
  }
  return cell;
}

// ---------------------------------------------------------------------------
// Prediction persistence (resume + audit)

struct EvalOutcome {
  std::string task;
  int shots = 0;
  Prediction prediction;
  bool transport_failed = false;
};

inline json to_json(const EvalOutcome& o) {
  json j;
  j["task"] = o.task;
  j["shots"] = o.shots;
  j["sample_id"] = o.prediction.sample_id;
  j["raw_text"] = o.prediction.raw_text;
  if (o.prediction.parsed.ok()) {
    j["parsed"] = to_string(*o.prediction.parsed.label);
  } else {
    j["parsed"] = nullptr;
    j["failure_reason"] = o.prediction.parsed.failure_reason;
  }
  j["latency_ms"] = o.prediction.latency_ms;
  j["budget_used"] = to_string(o.prediction.budget_used);
  return j;
}

inline EvalOutcome outcome_from_json(const json& j) {
  EvalOutcome o;
  o.task = j.at("task").get<std::string>();
  o.shots = j.at("shots").get<int>();
  o.prediction.sample_id = j.at("sample_id").get<std::string>();
  o.prediction.raw_text = j.at("raw_text").get<std::string>();
  if (j.contains("parsed") && !j.at("parsed").is_null()) {
    o.prediction.parsed.label = label_from_string(j.at("parsed").get<std::string>());
  } else {
    o.prediction.parsed.failure_reason = j.value("failure_reason", "unknown");
  }
  o.prediction.latency_ms = j.value("latency_ms", 0.0);
  o.prediction.budget_used = budget_use_from_string(j.value("budget_used", "normal"));
  o.transport_failed = o.prediction.parsed.failure_reason.rfind("transport", 0) == 0;
  return o;
}

/// Line-delimited prediction sink keyed by (task, shots, sample_id). Loading
/// an existing file turns a rerun into a resume.
class PredictionStore {
 public:
  PredictionStore() = default;

  explicit PredictionStore(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;  // torn tail line from an interrupted run
      EvalOutcome o = outcome_from_json(j);
      completed_[key(o.task, o.shots, o.prediction.sample_id)] = o;
    }
  }

  std::optional<EvalOutcome> lookup(const std::string& task, int shots,
                                    const std::string& sample_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = completed_.find(key(task, shots, sample_id));
    if (it == completed_.end()) return std::nullopt;
    return it->second;
  }

  void append(const EvalOutcome& o) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!completed_.emplace(key(o.task, o.shots, o.prediction.sample_id), o).second) return;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    out << to_json(o).dump() << '\n';
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return completed_.size();
  }

 private:
  static std::string key(const std::string& task, int shots, const std::string& id) {
    return task + "\x1f" + std::to_string(shots) + "\x1f" + id;
  }

  std::string path_;
  std::unordered_map<std::string, EvalOutcome> completed_;
  mutable std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Evaluation loop

struct EvalRun {
  std::vector<EvalOutcome> outcomes;
  std::vector<std::pair<std::string, int>> failed_cells;
};

namespace detail {

inline EvalOutcome evaluate_one(const RelevancySample& sample, const std::string& task, int shots,
                                const TaskSpec& spec, const std::vector<RelevancySample>& pool,
                                const RunConfig& cfg, ChatBackend& backend,
                                const TokenCounter& tokenizer) {
  EvalOutcome out;
  out.task = task;
  out.shots = shots;
  out.prediction.sample_id = sample.id;
  try {
    ContextSelectorConfig selector;
    selector.mode = cfg.selector_mode;
    selector.shots = shots;
    selector.first_label = cfg.first_label;
    // reproducible yet uncorrelated across samples and shot counts
    selector.seed = derive_seed(cfg.seed, sample.id, static_cast<std::uint64_t>(shots));
    const auto contexts = shots > 0 ? select_context(pool, sample, selector)
                                    : std::vector<RelevancySample>{};
    const auto prompt = assemble(spec.eval_instruction, contexts, sample, cfg.budget, tokenizer);
    out.prediction.budget_used = prompt.budget_used;
    const auto started = std::chrono::steady_clock::now();
    out.prediction.raw_text = backend.complete(prompt, sample.id);
    out.prediction.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    out.prediction.parsed = parse_label(out.prediction.raw_text);
  } catch (const BudgetExceededError& e) {
    out.prediction.parsed = {std::nullopt, std::string("budget_exceeded: ") + e.what()};
  } catch (const BackendError& e) {
    out.prediction.parsed = {std::nullopt, std::string("transport: ") + e.what()};
    out.transport_failed = true;
  }
  return out;
}

}  // namespace detail

/// Full evaluation loop: every test sample of every requested task at every
/// shot count, fanned out up to max_parallel_requests in flight. Completed
/// predictions land in `store` as they arrive; cells already present there
/// are not re-queried. Cells whose transport-failure rate exceeds the
/// tolerance are reported in failed_cells.
inline EvalRun run_eval_collect(const std::vector<RelevancySample>& dataset,
                                const std::map<std::string, TaskSpec>& specs,
                                const RunConfig& cfg, ChatBackend& backend,
                                const TokenCounter& tokenizer, PredictionStore* store = nullptr) {
  validate_run_config(cfg);
  EvalRun run;
  for (const auto& task : cfg.tasks) {
    auto spec_it = specs.find(task);
    if (spec_it == specs.end()) throw ConfigError("no task spec for task: " + task);
    const TaskSpec& spec = spec_it->second;

    std::vector<RelevancySample> test_samples;
    std::vector<RelevancySample> pool;
    for (const auto& s : dataset) {
      if (s.task != task) continue;
      (s.split == Split::Test ? test_samples : pool).push_back(s);
    }
    if (test_samples.empty()) throw ValidationError("no test samples for task: " + task);

    for (int shots : cfg.shots) {
      std::vector<EvalOutcome> cell(test_samples.size());
      std::atomic<std::size_t> next{0};
      std::exception_ptr failure;
      std::mutex failure_mutex;

      auto worker = [&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= test_samples.size()) return;
          {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (failure) return;
          }
          try {
            if (store) {
              if (auto prior = store->lookup(task, shots, test_samples[i].id)) {
                cell[i] = *prior;
                continue;
              }
            }
            cell[i] = detail::evaluate_one(test_samples[i], task, shots, spec, pool, cfg, backend,
                                           tokenizer);
            if (store) store->append(cell[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      };

      const std::size_t threads =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.max_parallel_requests),
                                test_samples.size());
      if (threads <= 1) {
        worker();
      } else {
        std::vector<std::thread> workers;
        for (std::size_t t = 0; t < threads; ++t) workers.emplace_back(worker);
        for (auto& w : workers) w.join();
      }
      if (failure) std::rethrow_exception(failure);

      std::size_t transport_failures = 0;
      for (const auto& o : cell)
        if (o.transport_failed) ++transport_failures;
      if (static_cast<double>(transport_failures) >
          cfg.cell_failure_tolerance * static_cast<double>(cell.size())) {
        run.failed_cells.emplace_back(task, shots);
      }
      for (auto& o : cell) run.outcomes.push_back(std::move(o));
    }
  }
  return run;
}

inline std::vector<EvalOutcome> run_eval(const std::vector<RelevancySample>& dataset,
                                         const std::map<std::string, TaskSpec>& specs,
                                         const RunConfig& cfg, ChatBackend& backend,
                                         const TokenCounter& tokenizer,
                                         PredictionStore* store = nullptr) {
  EvalRun run = run_eval_collect(dataset, specs, cfg, backend, tokenizer, store);
  if (!run.failed_cells.empty()) {
    std::string detail;
    for (const auto& [task, shots] : run.failed_cells)
      detail += " (" + task + ", " + std::to_string(shots) + ")";
    throw CellFailedError("cells exceeded failure tolerance:" + detail);
  }
  return run.outcomes;
}

/// Groups outcomes into report cells: tasks in first-seen order, shot counts
/// ascending within a task. Excluded cells (e.g. failed ones) are skipped.
inline EvalReport build_report(const std::vector<EvalOutcome>& outcomes,
                               const std::unordered_map<std::string, Label>& truth,
                               ReportMetadata metadata,
                               const std::vector<std::pair<std::string, int>>& exclude = {}) {
  EvalReport report;
  report.metadata = std::move(metadata);
  std::vector<std::string> task_order;
  std::map<std::string, std::set<int>> shots_by_task;
  std::map<std::pair<std::string, int>, std::vector<Prediction>> grouped;
  for (const auto& o : outcomes) {
    auto key = std::make_pair(o.task, o.shots);
    if (std::find(exclude.begin(), exclude.end(), key) != exclude.end()) continue;
    if (!shots_by_task.count(o.task)) task_order.push_back(o.task);
    shots_by_task[o.task].insert(o.shots);
    grouped[key].push_back(o.prediction);
  }
  for (const auto& task : task_order) {
    for (int shots : shots_by_task[task]) {
      EvalCell cell = compute_metrics(grouped[{task, shots}], truth);
      cell.task = task;
      cell.shots = shots;
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

inline std::unordered_map<std::string, Label> truth_map(
    const std::vector<RelevancySample>& samples) {
  std::unordered_map<std::string, Label> truth;
  for (const auto& s : samples) truth.emplace(s.id, s.label);
  return truth;
}

}  // namespace relkit
