#pragma once

#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "relkit/core.hpp"
#include "relkit/errors.hpp"
#include "relkit/prompt.hpp"

namespace relkit {

struct BackendConfig {
  std::string endpoint_url;
  std::string model_name;
  std::optional<std::string> auth_token;  // bearer; never logged
  double timeout_s = 30.0;
  int max_retries = 2;
  int max_parallel_requests = 1;
  double temperature = 0.0;
  int max_tokens = 10;
  int retry_backoff_ms = 250;
};

inline bool is_mock_endpoint(const std::string& url) { return url.rfind("mock:", 0) == 0; }

inline void validate_backend_config(const BackendConfig& cfg) {
  const bool http = cfg.endpoint_url.rfind("http://", 0) == 0 ||
                    cfg.endpoint_url.rfind("https://", 0) == 0;
  if (!http && !is_mock_endpoint(cfg.endpoint_url))
    throw ValidationError("endpoint_url must be an absolute http(s) URL: " + cfg.endpoint_url);
  if (cfg.max_retries < 0) throw ValidationError("max_retries must be >= 0");
  if (cfg.max_parallel_requests < 1) throw ValidationError("max_parallel_requests must be >= 1");
  if (cfg.max_tokens <= 0) throw ValidationError("max_tokens must be positive");
}

// ---------------------------------------------------------------------------
// Answer parsing

struct ParsedLabel {
  std::optional<Label> label;
  std::string failure_reason;

  bool ok() const { return label.has_value(); }
};

namespace detail {

inline std::vector<std::string> alpha_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalpha(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

}  // namespace detail

/// Total parser for yes/no answers. First alphabetic token wins; failing
/// that, the first sentence is scanned for a single unambiguous yes/no.
inline ParsedLabel parse_label(const std::string& raw) {
  std::string text = raw;
  // strip surrounding whitespace and punctuation
  std::size_t b = 0, e = text.size();
  while (b < e && !std::isalnum(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && !std::isalnum(static_cast<unsigned char>(text[e - 1]))) --e;
  text = text.substr(b, e - b);

  const auto tokens = detail::alpha_tokens(text);
  if (!tokens.empty()) {
    if (tokens.front() == "yes") return {Label::Relevant, ""};
    if (tokens.front() == "no") return {Label::NotRelevant, ""};
  }

  const std::size_t sentence_end = text.find_first_of(".!?");
  const std::string sentence =
      sentence_end == std::string::npos ? text : text.substr(0, sentence_end);
  int yes = 0, no = 0;
  for (const auto& t : detail::alpha_tokens(sentence)) {
    if (t == "yes") ++yes;
    if (t == "no") ++no;
  }
  if (yes + no == 1) return {yes == 1 ? Label::Relevant : Label::NotRelevant, ""};
  return {std::nullopt, "ambiguous"};
}

// ---------------------------------------------------------------------------
// Prediction

struct Prediction {
  std::string sample_id;
  std::string raw_text;
  ParsedLabel parsed;
  double latency_ms = 0.0;
  BudgetUse budget_used = BudgetUse::Normal;
};

// ---------------------------------------------------------------------------
// Backend interface + deterministic mocks

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Returns the assistant message text for a prompt. sample_id is request
  /// metadata (lookup mocks, audit logs); the wire body never contains it.
  virtual std::string complete(const ConversationPrompt& prompt, const std::string& sample_id) = 0;
  virtual std::string name() const = 0;
};

class FixedAnswerBackend final : public ChatBackend {
 public:
  explicit FixedAnswerBackend(std::string answer) : answer_(std::move(answer)) {}
  std::string complete(const ConversationPrompt&, const std::string&) override { return answer_; }
  std::string name() const override { return "mock:fixed"; }

 private:
  std::string answer_;
};

class LookupTableBackend final : public ChatBackend {
 public:
  explicit LookupTableBackend(std::unordered_map<std::string, Label> table)
      : table_(std::move(table)) {}
  std::string complete(const ConversationPrompt&, const std::string& sample_id) override {
    auto it = table_.find(sample_id);
    if (it == table_.end()) throw UnknownSampleError(sample_id);
    return answer_text(it->second);
  }
  std::string name() const override { return "mock:lookup"; }

 private:
  std::unordered_map<std::string, Label> table_;
};

/// Deterministic stand-in evaluator: relevant iff the query text mentions the
/// query image's category.
class RuleBasedBackend final : public ChatBackend {
 public:
  std::string complete(const ConversationPrompt& prompt, const std::string&) override {
    const bool hit = prompt.query_image.category &&
                     prompt.query_text.body.find(*prompt.query_image.category) != std::string::npos;
    return hit ? "Yes" : "No";
  }
  std::string name() const override { return "mock:rule-based"; }
};

/// Backend from a "mock:..." endpoint URL: "mock:rule-based",
/// "mock:fixed:<answer>". Returns null for non-mock URLs.
inline std::unique_ptr<ChatBackend> make_mock_backend(const std::string& endpoint_url) {
  if (!is_mock_endpoint(endpoint_url)) return nullptr;
  const std::string spec = endpoint_url.substr(5);
  if (spec == "rule-based") return std::make_unique<RuleBasedBackend>();
  if (spec.rfind("fixed:", 0) == 0) return std::make_unique<FixedAnswerBackend>(spec.substr(6));
  throw ConfigError("unknown mock backend: " + endpoint_url);
}

}  // namespace relkit
