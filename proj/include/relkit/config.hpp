#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "relkit/backend.hpp"
#include "relkit/core.hpp"
#include "relkit/digest.hpp"
#include "relkit/errors.hpp"
#include "relkit/instructions.hpp"
#include "relkit/pair_builder.hpp"
#include "relkit/prompt.hpp"

namespace relkit {

struct HoldoutRule {
  std::string category;
  std::string suffix = "_ho";
};

/// Token counter selection: the default heuristic with a tunable inflation
/// factor, or an exact vocabulary-file counter when tokenizer tables for the
/// target model are at hand.
struct TokenizerConfig {
  std::optional<std::string> vocab_file;
  double inflation = 1.3;
};

/// Declarative project configuration: one file drives build, eval and report.
/// Flags override fields; ${VAR} in string values interpolates environment
/// variables (unset variables become empty), so secrets stay out of the file.
struct ProjectConfig {
  std::vector<TaskSpec> tasks;
  std::map<std::string, std::string> sources;            // task -> manifest path
  std::map<std::string, std::string> similarity_tables;  // task -> table path
  std::map<std::string, HoldoutRule> holdouts;           // task -> holdout rule
  TokenBudget budget;
  TokenizerConfig tokenizer;
  BackendConfig backend;
  std::optional<BackendConfig> augmentation_backend;
  BuildOptions build_options;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::string config_digest;  // digest of the sanitized config, secrets excluded

  TokenCounter make_token_counter() const {
    if (tokenizer.vocab_file) return vocab_token_counter(*tokenizer.vocab_file);
    return heuristic_token_counter(tokenizer.inflation);
  }

  const TaskSpec* find_task(const std::string& name) const {
    for (const auto& t : tasks)
      if (t.name == name) return &t;
    return nullptr;
  }

  std::map<std::string, TaskSpec> task_specs() const {
    std::map<std::string, TaskSpec> out;
    for (const auto& t : tasks) {
      out.emplace(t.name, t);
      // hold-out tasks evaluate with the parent task's instruction
      auto h = holdouts.find(t.name);
      if (h != holdouts.end()) {
        TaskSpec ho = t;
        ho.name = t.name + h->second.suffix;
        out.emplace(ho.name, std::move(ho));
      }
    }
    return out;
  }
};

namespace detail {

inline std::string interpolate_env(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '$' && i + 1 < text.size() && text[i + 1] == '{') {
      auto end = text.find('}', i + 2);
      if (end != std::string::npos) {
        const std::string var = text.substr(i + 2, end - i - 2);
        const char* value = std::getenv(var.c_str());
        if (value) out += value;
        i = end + 1;
        continue;
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

inline BackendConfig backend_from_json(const json& j) {
  BackendConfig cfg;
  cfg.endpoint_url = j.at("endpoint_url").get<std::string>();
  cfg.model_name = j.value("model_name", std::string("unknown"));
  const std::string token = j.value("auth_token", std::string(""));
  if (!token.empty()) cfg.auth_token = token;
  cfg.timeout_s = j.value("timeout_s", 30.0);
  cfg.max_retries = j.value("max_retries", 2);
  cfg.max_parallel_requests = j.value("max_parallel_requests", 1);
  cfg.temperature = j.value("temperature", 0.0);
  cfg.max_tokens = j.value("max_tokens", 10);
  cfg.retry_backoff_ms = j.value("retry_backoff_ms", 250);
  validate_backend_config(cfg);
  return cfg;
}

inline json sanitized_backend_json(const json& j) {
  json copy = j;
  copy.erase("auth_token");
  return copy;
}

}  // namespace detail

inline ProjectConfig parse_config(const std::string& raw_text) {
  json j;
  try {
    j = json::parse(detail::interpolate_env(raw_text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  ProjectConfig cfg;
  try {
    cfg.seed = j.value("seed", 0ULL);
    cfg.output_dir = j.value("output_dir", std::string("out"));
    if (j.contains("budget")) {
      const json& b = j.at("budget");
      cfg.budget.limit = b.value("limit", 4096);
      cfg.budget.fallback_limit = b.value("fallback_limit", 5120);
      cfg.budget.image_cost = b.value("image_cost", 576);
    }
    validate_budget(cfg.budget);
    if (j.contains("tokenizer")) {
      const json& t = j.at("tokenizer");
      if (t.contains("vocab_file") && !t.at("vocab_file").is_null())
        cfg.tokenizer.vocab_file = t.at("vocab_file").get<std::string>();
      cfg.tokenizer.inflation = t.value("inflation", 1.3);
      if (cfg.tokenizer.inflation <= 0) throw ValidationError("tokenizer.inflation must be > 0");
    }
    if (j.contains("backend")) cfg.backend = detail::backend_from_json(j.at("backend"));
    if (j.contains("augmentation_backend"))
      cfg.augmentation_backend = detail::backend_from_json(j.at("augmentation_backend"));
    if (j.contains("build_options")) {
      const json& b = j.at("build_options");
      cfg.build_options.strict_same_class_negatives =
          b.value("strict_same_class_negatives", false);
      if (b.contains("similarity_threshold") && !b.at("similarity_threshold").is_null())
        cfg.build_options.similarity_threshold = b.at("similarity_threshold").get<double>();
    }
    for (const auto& item : j.value("tasks", json::array())) {
      std::string name = item.is_string() ? item.get<std::string>()
                                          : item.at("name").get<std::string>();
      TaskSpec spec = default_task_spec(name);
      if (item.is_object()) {
        if (item.contains("strategy")) spec.strategy = item.at("strategy").get<std::string>();
        if (item.contains("text_format"))
          spec.text_format = text_format_from_string(item.at("text_format").get<std::string>());
        if (item.contains("eval_instruction"))
          spec.eval_instruction = item.at("eval_instruction").get<std::string>();
        if (item.contains("train_instruction_pool"))
          spec.train_instruction_pool =
              item.at("train_instruction_pool").get<std::vector<std::string>>();
      }
      strategy_from_string(spec.strategy);  // reject unknown names early
      validate_task_spec(spec);
      cfg.tasks.push_back(std::move(spec));
    }
    if (j.contains("sources"))
      cfg.sources = j.at("sources").get<std::map<std::string, std::string>>();
    if (j.contains("similarity_tables"))
      cfg.similarity_tables = j.at("similarity_tables").get<std::map<std::string, std::string>>();
    const json holdouts = j.value("holdouts", json::object());
    for (const auto& [task, rule] : holdouts.items()) {
      HoldoutRule h;
      if (rule.is_string()) {
        h.category = rule.get<std::string>();
      } else {
        h.category = rule.at("category").get<std::string>();
        h.suffix = rule.value("suffix", std::string("_ho"));
      }
      cfg.holdouts[task] = std::move(h);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }

  // Every similarity-driven task must come with its table.
  for (const auto& t : cfg.tasks) {
    const auto strategy = strategy_from_string(t.strategy);
    if ((strategy == PairingStrategy::SimilarImageSwap ||
         strategy == PairingStrategy::SimilarTextSwap) &&
        cfg.similarity_tables.find(t.name) == cfg.similarity_tables.end())
      throw ConfigError("task " + t.name + " uses " + t.strategy +
                        " but has no similarity_tables entry");
  }

  // Secrets are excluded from the digest recorded in outputs.
  json sanitized = j;
  if (sanitized.contains("backend"))
    sanitized["backend"] = detail::sanitized_backend_json(sanitized["backend"]);
  if (sanitized.contains("augmentation_backend"))
    sanitized["augmentation_backend"] =
        detail::sanitized_backend_json(sanitized["augmentation_backend"]);
  cfg.config_digest = hex64(fnv1a64(sanitized.dump()));
  return cfg;
}

inline ProjectConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace relkit
