#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relkit/augment.hpp"
#include "relkit/config.hpp"
#include "relkit/pipeline.hpp"

namespace {

// 0 success, 1 usage/config, 2 pipeline, 3 backend
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPipeline = 2;
constexpr int kExitBackend = 3;

void log(const std::string& message) { std::cerr << "[relkit] " << message << "\n"; }

std::vector<int> parse_shots(const std::string& csv) {
  std::vector<int> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw relkit::ConfigError("bad shot count: " + item);
    }
  }
  if (out.empty()) throw relkit::ConfigError("no shot counts given");
  return out;
}

std::vector<std::string> parse_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_build(const relkit::ProjectConfig& config, const std::string& task_csv,
              int gen_instructions) {
  auto results = relkit::run_build(config, parse_csv(task_csv));
  for (const auto& r : results) {
    log("built " + r.task + ": " + std::to_string(r.positives) + " positives, " +
        std::to_string(r.negatives) + " negatives (" + std::to_string(r.train) + " train / " +
        std::to_string(r.test) + " test) -> " + r.dataset_path);
  }
  if (gen_instructions > 0) {
    if (!config.augmentation_backend)
      throw relkit::ConfigError("--gen-instructions needs augmentation_backend in config");
    auto backend = relkit::make_backend(*config.augmentation_backend);
    relkit::AugmentationCache cache(
        (std::filesystem::path(config.output_dir) / "cache" / "augmentations.jsonl").string());
    for (auto spec : config.tasks) {
      relkit::augment_instruction_pool(spec, gen_instructions, *backend, &cache);
      log("task " + spec.name + ": instruction pool now has " +
          std::to_string(spec.train_instruction_pool.size()) + " entries");
    }
  }
  return kExitOk;
}

int cmd_eval(const relkit::ProjectConfig& config, const relkit::EvalCommandOptions& options) {
  auto result = relkit::run_eval_command(config, options);
  std::cout << result.markdown;
  log("predictions: " + result.predictions_path);
  for (const auto& p : result.report_paths) log("report: " + p);
  if (!result.failed_cells.empty()) {
    for (const auto& [task, shots] : result.failed_cells)
      log("cell failed (too many transport errors): " + task + " @ " + std::to_string(shots) +
          "-shot");
    return kExitBackend;
  }
  return kExitOk;
}

int cmd_report(const relkit::ProjectConfig& config, const std::vector<std::string>& predictions,
               const std::string& format, const std::string& out_path) {
  auto result =
      relkit::run_report_command(config, predictions, relkit::report_format_from_string(format));
  if (out_path.empty()) {
    std::cout << result.rendered;
  } else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw relkit::ConfigError("cannot write " + out_path);
    out << result.rendered;
    log("wrote " + out_path);
  }
  return kExitOk;
}

int cmd_validate(const relkit::ProjectConfig& config, const std::vector<std::string>& paths) {
  auto result = relkit::run_validate(config, paths);
  log("validated " + std::to_string(result.samples) + " samples in " +
      std::to_string(result.files) + " file(s)");
  for (const auto& w : result.warnings) log("warning: " + w);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relkit: build image-text relevancy datasets, assemble few-shot multimodal "
               "prompts, evaluate chat-completions backends, and render reports"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path, "project config file (JSON)")->required();

  auto* build = app.add_subcommand("build", "construct datasets from source manifests");
  std::string build_tasks;
  int gen_instructions = 0;
  build->add_option("--task", build_tasks, "only build these tasks (comma-separated)");
  build->add_option("--gen-instructions", gen_instructions,
                    "generate N training-instruction variants per task");

  auto* eval = app.add_subcommand("eval", "evaluate a backend on built datasets");
  std::string eval_tasks, shots_csv = "0", mode = "random", first_label = "relevant";
  std::string run_name, timestamp;
  eval->add_option("--tasks", eval_tasks, "tasks to evaluate (comma-separated; default: all)");
  eval->add_option("--shots", shots_csv, "shot counts, e.g. 0,2,4");
  eval->add_option("--mode", mode, "context selection: random | semantic");
  eval->add_option("--first-label", first_label, "first context label: relevant | not_relevant");
  eval->add_option("--run-name", run_name, "name for prediction/report files");
  eval->add_option("--timestamp", timestamp,
                   "pin the report timestamp (reruns become byte-identical)");

  auto* report = app.add_subcommand("report", "render or compare prediction files");
  std::vector<std::string> prediction_paths;
  std::string format = "md", out_path;
  report->add_option("predictions", prediction_paths, "prediction files (one, or two to compare)")
      ->required();
  report->add_option("--format", format, "md | csv | json");
  report->add_option("--out", out_path, "write to file instead of stdout");

  auto* validate = app.add_subcommand("validate", "lint dataset files");
  std::vector<std::string> validate_paths;
  validate->add_option("datasets", validate_paths, "dataset files (default: built datasets)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto config = relkit::load_config(config_path);
    if (build->parsed()) return cmd_build(config, build_tasks, gen_instructions);
    if (eval->parsed()) {
      relkit::EvalCommandOptions options;
      options.tasks = parse_csv(eval_tasks);
      options.shots = parse_shots(shots_csv);
      try {
        options.mode = relkit::selector_mode_from_string(mode);
        options.first_label = relkit::label_from_string(first_label);
      } catch (const relkit::ValidationError& e) {
        throw relkit::ConfigError(e.what());
      }
      options.run_name = run_name;
      options.timestamp = timestamp;
      return cmd_eval(config, options);
    }
    if (report->parsed()) return cmd_report(config, prediction_paths, format, out_path);
    if (validate->parsed()) return cmd_validate(config, validate_paths);
  } catch (const relkit::ConfigError& e) {
    log(std::string("config error: ") + e.what());
    return kExitUsage;
  } catch (const relkit::CellFailedError& e) {
    log(std::string("backend error: ") + e.what());
    return kExitBackend;
  } catch (const relkit::BackendError& e) {
    log(std::string("backend error: ") + e.what());
    return kExitBackend;
  } catch (const relkit::Error& e) {
    log(std::string("error: ") + e.what());
    return kExitPipeline;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kExitPipeline;
  }
  return kExitUsage;
}
