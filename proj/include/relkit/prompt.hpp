#pragma once

#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "relkit/core.hpp"
#include "relkit/errors.hpp"
#include "relkit/rng.hpp"
#include "relkit/tokenizer.hpp"

namespace relkit {

// ---------------------------------------------------------------------------
// Budget

struct TokenBudget {
  int limit = 4096;
  int fallback_limit = 5120;
  int image_cost = 576;
};

inline void validate_budget(const TokenBudget& b) {
  if (b.limit <= 0 || b.limit > b.fallback_limit)
    throw ValidationError("budget: need 0 < limit <= fallback_limit");
  if (b.image_cost <= 0) throw ValidationError("budget: image_cost must be positive");
}

enum class BudgetUse { Normal, Escalated };

inline std::string to_string(BudgetUse b) { return b == BudgetUse::Normal ? "normal" : "escalated"; }

inline BudgetUse budget_use_from_string(const std::string& s) {
  if (s == "normal") return BudgetUse::Normal;
  if (s == "escalated") return BudgetUse::Escalated;
  throw ValidationError("unknown budget use: " + s);
}

// ---------------------------------------------------------------------------
// Context selection

enum class SelectorMode { BalancedRandom, SemanticRelated };

inline std::string to_string(SelectorMode m) {
  return m == SelectorMode::BalancedRandom ? "random" : "semantic";
}

inline SelectorMode selector_mode_from_string(const std::string& s) {
  if (s == "random" || s == "balanced_random") return SelectorMode::BalancedRandom;
  if (s == "semantic" || s == "semantic_related") return SelectorMode::SemanticRelated;
  throw ValidationError("unknown selector mode: " + s);
}

struct ContextSelectorConfig {
  SelectorMode mode = SelectorMode::BalancedRandom;
  int shots = 0;
  std::uint64_t seed = 0;
  Label first_label = Label::Relevant;
};

/// Picks `shots` demonstrations with alternating labels, starting from
/// cfg.first_label. Each pick is uniform without replacement among eligible
/// pool samples of the required label; SemanticRelated first restricts the
/// pool to samples sharing the query's text_key. Fails loudly rather than
/// backfilling across modes.
inline std::vector<RelevancySample> select_context(const std::vector<RelevancySample>& pool,
                                                   const RelevancySample& query,
                                                   const ContextSelectorConfig& cfg) {
  if (cfg.shots < 0) throw ValidationError("shots must be >= 0");
  if (cfg.shots == 0) return {};

  std::vector<const RelevancySample*> candidates[2];  // [Relevant, NotRelevant]
  for (const auto& s : pool) {
    if (s.id == query.id) continue;  // a query never demonstrates itself
    if (cfg.mode == SelectorMode::SemanticRelated && s.text.text_key != query.text.text_key)
      continue;
    candidates[s.label == Label::Relevant ? 0 : 1].push_back(&s);
  }

  const Label second = opposite(cfg.first_label);
  const std::size_t need_first = (static_cast<std::size_t>(cfg.shots) + 1) / 2;
  const std::size_t need_second = static_cast<std::size_t>(cfg.shots) / 2;
  auto& first_pool = candidates[cfg.first_label == Label::Relevant ? 0 : 1];
  auto& second_pool = candidates[second == Label::Relevant ? 0 : 1];
  if (first_pool.size() < need_first)
    throw InsufficientPoolError(to_string(cfg.first_label), need_first, first_pool.size());
  if (second_pool.size() < need_second)
    throw InsufficientPoolError(to_string(second), need_second, second_pool.size());

  std::mt19937_64 rng(cfg.seed);
  std::vector<RelevancySample> out;
  out.reserve(static_cast<std::size_t>(cfg.shots));
  for (int i = 0; i < cfg.shots; ++i) {
    auto& bucket = (i % 2 == 0) ? first_pool : second_pool;
    const std::size_t idx = uniform_below(rng, bucket.size());
    out.push_back(*bucket[idx]);
    bucket.erase(bucket.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conversation prompt

inline std::string answer_text(Label l) { return l == Label::Relevant ? "Yes" : "No"; }

struct ContextTurn {
  MediaRef image;
  TextBlock text;
  Label answer = Label::Relevant;
};

/// Instruction turn, C demonstration turns, query turn; token accounting
/// included. Internal roles are Human/Assistant; the wire client maps them.
struct ConversationPrompt {
  std::string instruction;
  std::vector<ContextTurn> context_turns;
  MediaRef query_image;
  TextBlock query_text;
  int token_count = 0;
  BudgetUse budget_used = BudgetUse::Normal;

  json to_json() const {
    json turns = json::array();
    turns.push_back({{"role", "Human"}, {"text", instruction}});
    for (const auto& turn : context_turns) {
      json human{{"role", "Human"}, {"text", turn.text.body}};
      if (!turn.image.uri.empty()) human["image_uri"] = turn.image.uri;
      turns.push_back(std::move(human));
      turns.push_back({{"role", "Assistant"}, {"text", answer_text(turn.answer)}});
    }
    json query{{"role", "Human"}, {"text", query_text.body}};
    if (!query_image.uri.empty()) query["image_uri"] = query_image.uri;
    turns.push_back(std::move(query));
    return json{{"instruction", instruction},
                {"turns", std::move(turns)},
                {"token_count", token_count},
                {"budget_used", to_string(budget_used)}};
  }

  /// Training-format export: same conversation plus the final answer turn.
  json to_training_json(Label answer) const {
    json j = to_json();
    j["turns"].push_back({{"role", "Assistant"}, {"text", answer_text(answer)}});
    return j;
  }
};

/// Text tokens across every segment plus image_cost per attached image.
/// Pure in its inputs.
inline int count_tokens(const ConversationPrompt& prompt, const TokenCounter& tokenizer,
                        int image_cost = 576) {
  int total = tokenizer(prompt.instruction);
  int images = prompt.query_image.uri.empty() ? 0 : 1;
  for (const auto& turn : prompt.context_turns) {
    total += tokenizer(turn.text.body);
    total += tokenizer(answer_text(turn.answer));
    if (!turn.image.uri.empty()) ++images;
  }
  total += tokenizer(prompt.query_text.body);
  return total + images * image_cost;
}

/// Lays out the conversation and enforces the budget: prompts over `limit`
/// escalate to `fallback_limit`; beyond that, BudgetExceeded.
inline ConversationPrompt assemble(const std::string& instruction,
                                   const std::vector<RelevancySample>& contexts,
                                   const RelevancySample& query, const TokenBudget& budget,
                                   const TokenCounter& tokenizer) {
  if (instruction.empty()) throw ValidationError("instruction empty");
  validate_budget(budget);
  ConversationPrompt prompt;
  prompt.instruction = instruction;
  prompt.context_turns.reserve(contexts.size());
  for (const auto& c : contexts) prompt.context_turns.push_back({c.image, c.text, c.label});
  prompt.query_image = query.image;
  prompt.query_text = query.text;
  prompt.token_count = count_tokens(prompt, tokenizer, budget.image_cost);
  if (prompt.token_count <= budget.limit) {
    prompt.budget_used = BudgetUse::Normal;
  } else if (prompt.token_count <= budget.fallback_limit) {
    prompt.budget_used = BudgetUse::Escalated;
  } else {
    throw BudgetExceededError(prompt.token_count, budget.fallback_limit);
  }
  return prompt;
}

}  // namespace relkit
