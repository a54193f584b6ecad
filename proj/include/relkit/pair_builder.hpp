#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relkit/core.hpp"
#include "relkit/digest.hpp"
#include "relkit/errors.hpp"
#include "relkit/rng.hpp"
#include "relkit/similarity.hpp"
#include "relkit/source_record.hpp"

namespace relkit {

// ---------------------------------------------------------------------------
// Pairing strategies

enum class PairingStrategy {
  SameCategoryImageSwap,   // keep text, image from another record of the same category
  SiblingFieldMismatch,    // pair a sibling text field with this record's image
  ChoiceListNegatives,     // one negative per provided negative choice image
  SimilarImageSwap,        // most similar same-category image, by ingested scores
  SimilarTextSwap,         // most similar same-category text, by ingested scores
  CrossClassDescription,   // class description paired with an image of another class
};

inline std::string to_string(PairingStrategy s) {
  switch (s) {
    case PairingStrategy::SameCategoryImageSwap: return "same_category_image_swap";
    case PairingStrategy::SiblingFieldMismatch: return "sibling_field_mismatch";
    case PairingStrategy::ChoiceListNegatives: return "choice_list_negatives";
    case PairingStrategy::SimilarImageSwap: return "similar_image_swap";
    case PairingStrategy::SimilarTextSwap: return "similar_text_swap";
    case PairingStrategy::CrossClassDescription: return "cross_class_description";
  }
  return "same_category_image_swap";
}

inline PairingStrategy strategy_from_string(const std::string& s) {
  if (s == "same_category_image_swap") return PairingStrategy::SameCategoryImageSwap;
  if (s == "sibling_field_mismatch") return PairingStrategy::SiblingFieldMismatch;
  if (s == "choice_list_negatives") return PairingStrategy::ChoiceListNegatives;
  if (s == "similar_image_swap") return PairingStrategy::SimilarImageSwap;
  if (s == "similar_text_swap") return PairingStrategy::SimilarTextSwap;
  if (s == "cross_class_description") return PairingStrategy::CrossClassDescription;
  throw ValidationError("unknown pairing strategy: " + s);
}

/// Task-name defaults; config may override per task.
inline PairingStrategy default_strategy_for(const std::string& task) {
  if (task.rfind("llava", 0) == 0) return PairingStrategy::SameCategoryImageSwap;
  if (task == "wiki") return PairingStrategy::SiblingFieldMismatch;
  if (task == "recipe") return PairingStrategy::ChoiceListNegatives;
  if (task == "textvqa" || task == "chartqa") return PairingStrategy::SimilarImageSwap;
  if (task == "tdiuc" || task == "infographics") return PairingStrategy::SimilarTextSwap;
  // fine-grained family: cars, cub, dogs, pets, flowers, food, ...
  return PairingStrategy::CrossClassDescription;
}

struct BuildOptions {
  // Fidelity mode for the fine-grained family: draw the negative image from
  // the *same* class instead of a different one.
  bool strict_same_class_negatives = false;
  // When set, Similar* strategies sample uniformly among donors scoring at or
  // above the threshold instead of taking the single best-scoring donor.
  std::optional<double> similarity_threshold;
};

// ---------------------------------------------------------------------------
// Text formatting

/// Joins a QA series into one text, one "Question: {Q} Answer: {A}" segment
/// per pair separated by a blank line; an optional reasoning tail is attached
/// to the last answer as "... Answer: {A}. {R}".
inline TextBlock format_qa_text(const std::vector<QaPair>& qa_series,
                                const std::optional<std::string>& reasoning,
                                std::optional<std::string> key_override = std::nullopt) {
  if (qa_series.empty()) throw EmptySeriesError();
  std::string body;
  for (std::size_t i = 0; i < qa_series.size(); ++i) {
    if (i > 0) body += "\n\n";
    body += "Question: " + qa_series[i].question + " Answer: " + qa_series[i].answer;
  }
  if (reasoning) body += ". " + *reasoning;
  return make_text_block(std::move(body),
                         reasoning ? TextFormat::QaWithReasoning : TextFormat::Conversations,
                         std::move(key_override));
}

namespace detail {

inline std::string ascii_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool is_ingredients_title(const std::string& title) {
  return ascii_lower(trim(title)) == "ingredients";
}

inline std::string require_field(const SourceRecord& r, const std::string& name) {
  auto v = r.field(name);
  if (!v || v->empty()) throw StrategyInputMissingError(r.record_id, name);
  return *v;
}

inline std::string require_category(const SourceRecord& r) {
  if (!r.image.category || r.image.category->empty())
    throw StrategyInputMissingError(r.record_id, "image.category");
  return *r.image.category;
}

inline std::optional<std::string> text_key_override(const SourceRecord& r) {
  return r.field("text_key");
}

/// The text a record contributes to its positive pair. Negatives reuse it
/// (image swaps) or swap it (text swaps), so it is the single source of truth.
inline TextBlock positive_text(const SourceRecord& r, PairingStrategy strategy,
                               TextFormat task_format) {
  switch (strategy) {
    case PairingStrategy::SameCategoryImageSwap: {
      if (!r.qa_series || r.qa_series->empty())
        throw StrategyInputMissingError(r.record_id, "qa_series");
      return format_qa_text(*r.qa_series, std::nullopt, text_key_override(r));
    }
    case PairingStrategy::SimilarImageSwap:
    case PairingStrategy::SimilarTextSwap: {
      if (!r.qa_series || r.qa_series->empty())
        throw StrategyInputMissingError(r.record_id, "qa_series");
      return format_qa_text(*r.qa_series, require_field(r, "reasoning"), text_key_override(r));
    }
    case PairingStrategy::SiblingFieldMismatch:
      return make_text_block(require_field(r, "section_text"), task_format, text_key_override(r));
    case PairingStrategy::ChoiceListNegatives:
      return make_text_block(require_field(r, "first_step_text"), task_format,
                             text_key_override(r));
    case PairingStrategy::CrossClassDescription:
      return make_text_block(require_field(r, "class_description"), task_format,
                             text_key_override(r));
  }
  throw ValidationError("unhandled strategy");
}

inline RelevancySample base_sample(const SourceRecord& r, const TaskSpec& task,
                                   const std::string& id_suffix) {
  RelevancySample s;
  s.id = task.name + "/" + r.record_id + "/" + id_suffix;
  s.task = task.name;
  s.split = r.split();
  s.provenance.source_record_id = r.record_id;
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Positives

inline std::vector<RelevancySample> build_positives(const std::vector<SourceRecord>& records,
                                                    const TaskSpec& task) {
  const auto strategy = strategy_from_string(task.strategy);
  std::vector<RelevancySample> out;
  for (const auto& r : records) {
    if (strategy == PairingStrategy::ChoiceListNegatives) {
      // Recipes qualify only when the first step is the ingredients step
      // (case-insensitive title match).
      if (!detail::is_ingredients_title(detail::require_field(r, "first_step_title"))) continue;
      if (!r.choice_images) throw StrategyInputMissingError(r.record_id, "choice_images");
    }
    RelevancySample s = detail::base_sample(r, task, "pos");
    s.image = strategy == PairingStrategy::ChoiceListNegatives ? r.choice_images->positive : r.image;
    s.text = detail::positive_text(r, strategy, task.text_format);
    s.label = Label::Relevant;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Negatives

namespace detail {

/// Donor candidates sorted by record_id; selection then reduces to an index,
/// which keeps the output independent of input permutation given the same
/// record set.
inline std::vector<const SourceRecord*> sorted_by_id(std::vector<const SourceRecord*> v) {
  std::sort(v.begin(), v.end(), [](const SourceRecord* a, const SourceRecord* b) {
    return a->record_id < b->record_id;
  });
  return v;
}

inline const SourceRecord* pick_uniform(const std::vector<const SourceRecord*>& donors,
                                        std::uint64_t build_seed, const std::string& record_id) {
  std::mt19937_64 rng(derive_seed(build_seed, record_id));
  return donors[uniform_below(rng, donors.size())];
}

struct ScoredDonor {
  const SourceRecord* record;
  std::string key;
  double score;
};

/// Best-scoring donor; ties broken by lexicographically smallest key. With a
/// threshold configured, a uniform draw over all donors at or above it.
inline const SourceRecord* pick_by_score(const std::vector<ScoredDonor>& scored,
                                         const BuildOptions& options, std::uint64_t build_seed,
                                         const std::string& record_id) {
  if (options.similarity_threshold) {
    std::vector<const SourceRecord*> eligible;
    for (const auto& d : scored)
      if (d.score >= *options.similarity_threshold) eligible.push_back(d.record);
    if (eligible.empty()) throw NoEligibleDonorError(record_id);
    return pick_uniform(sorted_by_id(std::move(eligible)), build_seed, record_id);
  }
  const ScoredDonor* best = &scored.front();
  for (const auto& d : scored) {
    if (d.score > best->score || (d.score == best->score && d.key < best->key)) best = &d;
  }
  return best->record;
}

}  // namespace detail

inline std::vector<RelevancySample> build_negatives(const std::vector<SourceRecord>& records,
                                                    const TaskSpec& task,
                                                    const SimilarityTable* sim, std::uint64_t seed,
                                                    const BuildOptions& options = {}) {
  const auto strategy = strategy_from_string(task.strategy);
  const std::string rule = to_string(strategy);

  if ((strategy == PairingStrategy::SimilarImageSwap ||
       strategy == PairingStrategy::SimilarTextSwap) &&
      sim == nullptr)
    throw MissingSimilarityTableError(task.name);

  // Precompute the texts once; SimilarTextSwap donors swap whole text blocks.
  std::vector<TextBlock> texts;
  if (strategy != PairingStrategy::SiblingFieldMismatch) {
    texts.reserve(records.size());
    for (const auto& r : records) {
      if (strategy == PairingStrategy::ChoiceListNegatives &&
          !detail::is_ingredients_title(detail::require_field(r, "first_step_title"))) {
        texts.emplace_back();
        continue;
      }
      texts.push_back(detail::positive_text(r, strategy, task.text_format));
    }
  }

  std::vector<RelevancySample> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SourceRecord& r = records[i];
    switch (strategy) {
      case PairingStrategy::SameCategoryImageSwap: {
        const std::string category = detail::require_category(r);
        std::vector<const SourceRecord*> donors;
        for (const auto& d : records)
          if (d.record_id != r.record_id && d.image.category &&
              *d.image.category == category && d.image.uri != r.image.uri)
            donors.push_back(&d);
        if (donors.empty()) throw NoEligibleDonorError(r.record_id);
        const SourceRecord* donor =
            detail::pick_uniform(detail::sorted_by_id(std::move(donors)), seed, r.record_id);
        RelevancySample s = detail::base_sample(r, task, "neg");
        s.image = donor->image;
        s.text = texts[i];
        s.label = Label::NotRelevant;
        s.provenance.negative_rule = rule;
        out.push_back(std::move(s));
        break;
      }
      case PairingStrategy::SiblingFieldMismatch: {
        RelevancySample s = detail::base_sample(r, task, "neg");
        s.image = r.image;
        s.text = make_text_block(detail::require_field(r, "page_description"), task.text_format);
        s.label = Label::NotRelevant;
        s.provenance.negative_rule = rule;
        out.push_back(std::move(s));
        break;
      }
      case PairingStrategy::ChoiceListNegatives: {
        if (!detail::is_ingredients_title(detail::require_field(r, "first_step_title"))) break;
        if (!r.choice_images) throw StrategyInputMissingError(r.record_id, "choice_images");
        std::size_t k = 0;
        for (const auto& neg_image : r.choice_images->negatives) {
          RelevancySample s = detail::base_sample(r, task, "neg" + std::to_string(k++));
          s.image = neg_image;
          s.text = texts[i];
          s.label = Label::NotRelevant;
          s.provenance.negative_rule = rule;
          out.push_back(std::move(s));
        }
        break;
      }
      case PairingStrategy::SimilarImageSwap: {
        const std::string category = detail::require_category(r);
        if (!r.image.embed_key) throw StrategyInputMissingError(r.record_id, "image.embed_key");
        if (!sim->has_key(*r.image.embed_key))
          throw ValidationError("embed_key not in similarity table: " + *r.image.embed_key);
        std::vector<detail::ScoredDonor> scored;
        for (const auto& d : records) {
          if (d.record_id == r.record_id || !d.image.category || *d.image.category != category ||
              d.image.uri == r.image.uri || !d.image.embed_key)
            continue;
          if (!sim->has_key(*d.image.embed_key))
            throw ValidationError("embed_key not in similarity table: " + *d.image.embed_key);
          double score = sim->score(*r.image.embed_key, *d.image.embed_key).value_or(0.0);
          scored.push_back({&d, *d.image.embed_key, score});
        }
        if (scored.empty()) throw NoEligibleDonorError(r.record_id);
        const SourceRecord* donor = detail::pick_by_score(scored, options, seed, r.record_id);
        RelevancySample s = detail::base_sample(r, task, "neg");
        s.image = donor->image;
        s.text = texts[i];
        s.label = Label::NotRelevant;
        s.provenance.negative_rule = rule;
        out.push_back(std::move(s));
        break;
      }
      case PairingStrategy::SimilarTextSwap: {
        const std::string category = detail::require_category(r);
        if (!sim->has_key(texts[i].text_key))
          throw ValidationError("text_key not in similarity table: " + texts[i].text_key);
        std::vector<detail::ScoredDonor> scored;
        std::vector<std::size_t> donor_index;
        for (std::size_t d = 0; d < records.size(); ++d) {
          const SourceRecord& cand = records[d];
          if (cand.record_id == r.record_id || !cand.image.category ||
              *cand.image.category != category || texts[d].text_key == texts[i].text_key)
            continue;
          if (!sim->has_key(texts[d].text_key))
            throw ValidationError("text_key not in similarity table: " + texts[d].text_key);
          double score = sim->score(texts[i].text_key, texts[d].text_key).value_or(0.0);
          scored.push_back({&cand, texts[d].text_key, score});
          donor_index.push_back(d);
        }
        if (scored.empty()) throw NoEligibleDonorError(r.record_id);
        const SourceRecord* donor = detail::pick_by_score(scored, options, seed, r.record_id);
        std::size_t donor_pos = 0;
        for (std::size_t k = 0; k < scored.size(); ++k)
          if (scored[k].record == donor) donor_pos = donor_index[k];
        RelevancySample s = detail::base_sample(r, task, "neg");
        s.image = r.image;
        s.text = texts[donor_pos];
        s.label = Label::NotRelevant;
        s.provenance.negative_rule = rule;
        out.push_back(std::move(s));
        break;
      }
      case PairingStrategy::CrossClassDescription: {
        const std::string category = detail::require_category(r);
        std::vector<const SourceRecord*> donors;
        for (const auto& d : records) {
          if (d.record_id == r.record_id || !d.image.category || d.image.uri == r.image.uri)
            continue;
          const bool same_class = *d.image.category == category;
          if (options.strict_same_class_negatives ? same_class : !same_class)
            donors.push_back(&d);
        }
        if (donors.empty()) throw NoEligibleDonorError(r.record_id);
        const SourceRecord* donor =
            detail::pick_uniform(detail::sorted_by_id(std::move(donors)), seed, r.record_id);
        RelevancySample s = detail::base_sample(r, task, "neg");
        s.image = donor->image;
        s.text = texts[i];
        s.label = Label::NotRelevant;
        s.provenance.negative_rule = rule;
        out.push_back(std::move(s));
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hold-out reassignment

/// Moves matching samples to the test split of a "<task><suffix>" hold-out
/// task; everything else passes through untouched. No sample is dropped.
inline std::vector<RelevancySample> split_holdout(
    const std::vector<RelevancySample>& samples,
    const std::function<bool(const RelevancySample&)>& predicate,
    const std::string& suffix = "_ho") {
  std::vector<RelevancySample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    RelevancySample copy = s;
    if (predicate(s)) {
      copy.split = Split::Test;
      copy.task = s.task + suffix;
    }
    out.push_back(std::move(copy));
  }
  return out;
}

/// Convenience predicate: image category equals `category`.
inline std::function<bool(const RelevancySample&)> category_predicate(std::string category) {
  return [category = std::move(category)](const RelevancySample& s) {
    return s.image.category && *s.image.category == category;
  };
}

}  // namespace relkit
