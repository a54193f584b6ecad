#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "relkit/digest.hpp"
#include "relkit/errors.hpp"

namespace relkit {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Enums

enum class Label { Relevant, NotRelevant };

inline std::string to_string(Label l) {
  return l == Label::Relevant ? "relevant" : "not_relevant";
}

inline Label label_from_string(const std::string& s) {
  if (s == "relevant") return Label::Relevant;
  if (s == "not_relevant") return Label::NotRelevant;
  throw ValidationError("unknown label: " + s);
}

inline Label opposite(Label l) {
  return l == Label::Relevant ? Label::NotRelevant : Label::Relevant;
}

enum class Split { Train, Test };

inline std::string to_string(Split s) { return s == Split::Train ? "train" : "test"; }

inline Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw ValidationError("unknown split: " + s);
}

enum class TextFormat {
  Conversations,
  PlainParagraph,
  IngredientsDescription,
  QaWithReasoning,
  CategoryDescription,
};

inline std::string to_string(TextFormat f) {
  switch (f) {
    case TextFormat::Conversations: return "conversations";
    case TextFormat::PlainParagraph: return "plain_paragraph";
    case TextFormat::IngredientsDescription: return "ingredients_description";
    case TextFormat::QaWithReasoning: return "qa_with_reasoning";
    case TextFormat::CategoryDescription: return "category_description";
  }
  return "conversations";
}

inline TextFormat text_format_from_string(const std::string& s) {
  if (s == "conversations") return TextFormat::Conversations;
  if (s == "plain_paragraph") return TextFormat::PlainParagraph;
  if (s == "ingredients_description") return TextFormat::IngredientsDescription;
  if (s == "qa_with_reasoning") return TextFormat::QaWithReasoning;
  if (s == "category_description") return TextFormat::CategoryDescription;
  throw ValidationError("unknown text format: " + s);
}

// ---------------------------------------------------------------------------
// Value types

struct MediaRef {
  std::string uri;
  std::optional<std::string> category;
  std::optional<std::string> embed_key;

  bool operator==(const MediaRef&) const = default;
};

struct TextBlock {
  std::string body;
  TextFormat format = TextFormat::PlainParagraph;
  std::string text_key;

  bool operator==(const TextBlock&) const = default;
};

/// Builds a TextBlock whose text_key defaults to the content digest of body.
inline TextBlock make_text_block(std::string body, TextFormat format,
                                 std::optional<std::string> key_override = std::nullopt) {
  TextBlock t;
  t.text_key = key_override ? *key_override : content_digest(body);
  t.body = std::move(body);
  t.format = format;
  return t;
}

struct Provenance {
  std::string source_record_id;
  std::optional<std::string> negative_rule;

  bool operator==(const Provenance&) const = default;
};

struct RelevancySample {
  std::string id;
  std::string task;
  MediaRef image;
  TextBlock text;
  Label label = Label::Relevant;
  Split split = Split::Train;
  Provenance provenance;

  bool operator==(const RelevancySample&) const = default;
};

struct TaskSpec {
  std::string name;
  std::string strategy;  // pairing strategy id, see pair_builder.hpp
  std::string eval_instruction;
  std::vector<std::string> train_instruction_pool;
  TextFormat text_format = TextFormat::PlainParagraph;
};

inline void validate_task_spec(const TaskSpec& t) {
  if (t.name.empty()) throw ValidationError("task name empty");
  if (t.eval_instruction.empty()) throw ValidationError("task " + t.name + ": eval_instruction empty");
  if (t.train_instruction_pool.empty())
    throw ValidationError("task " + t.name + ": train_instruction_pool empty");
  // The inference-time instruction must stay unseen during training.
  if (std::find(t.train_instruction_pool.begin(), t.train_instruction_pool.end(),
                t.eval_instruction) != t.train_instruction_pool.end())
    throw ValidationError("task " + t.name + ": eval_instruction appears in train_instruction_pool");
}

// ---------------------------------------------------------------------------
// Validation

inline void validate_sample(const RelevancySample& s) {
  if (s.id.empty()) throw ValidationError("id empty");
  if (s.task.empty()) throw ValidationError("task empty");
  if (s.image.uri.empty()) throw ValidationError("image.uri empty");
  if (s.text.body.empty()) throw ValidationError("text.body empty");
  if (s.text.text_key.empty()) throw ValidationError("text.text_key empty");
  if (s.label == Label::NotRelevant && !s.provenance.negative_rule)
    throw ValidationError("provenance.negative_rule missing");
  if (s.label == Label::Relevant && s.provenance.negative_rule)
    throw ValidationError("provenance.negative_rule set on relevant sample");
}

// ---------------------------------------------------------------------------
// JSON mapping (canonical dataset format: line-delimited JSON, snake_case keys)

inline json to_json(const MediaRef& m) {
  json j;
  j["uri"] = m.uri;
  if (m.category) j["category"] = *m.category;
  if (m.embed_key) j["embed_key"] = *m.embed_key;
  return j;
}

inline MediaRef media_ref_from_json(const json& j) {
  MediaRef m;
  m.uri = j.at("uri").get<std::string>();
  if (j.contains("category")) m.category = j.at("category").get<std::string>();
  if (j.contains("embed_key")) m.embed_key = j.at("embed_key").get<std::string>();
  return m;
}

inline json to_json(const TextBlock& t) {
  return json{{"body", t.body}, {"format", to_string(t.format)}, {"text_key", t.text_key}};
}

inline TextBlock text_block_from_json(const json& j) {
  TextBlock t;
  t.body = j.at("body").get<std::string>();
  t.format = text_format_from_string(j.at("format").get<std::string>());
  t.text_key = j.at("text_key").get<std::string>();
  return t;
}

inline json to_json(const RelevancySample& s) {
  json prov;
  prov["source_record_id"] = s.provenance.source_record_id;
  if (s.provenance.negative_rule) prov["negative_rule"] = *s.provenance.negative_rule;
  json j;
  j["id"] = s.id;
  j["task"] = s.task;
  j["image"] = to_json(s.image);
  j["text"] = to_json(s.text);
  j["label"] = to_string(s.label);
  j["split"] = to_string(s.split);
  j["provenance"] = prov;
  return j;
}

inline RelevancySample sample_from_json(const json& j) {
  RelevancySample s;
  s.id = j.at("id").get<std::string>();
  s.task = j.at("task").get<std::string>();
  s.image = media_ref_from_json(j.at("image"));
  s.text = text_block_from_json(j.at("text"));
  s.label = label_from_string(j.at("label").get<std::string>());
  s.split = split_from_string(j.at("split").get<std::string>());
  const json& prov = j.at("provenance");
  s.provenance.source_record_id = prov.at("source_record_id").get<std::string>();
  if (prov.contains("negative_rule"))
    s.provenance.negative_rule = prov.at("negative_rule").get<std::string>();
  return s;
}

// ---------------------------------------------------------------------------
// Dataset I/O

inline std::vector<RelevancySample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetIoError("cannot open dataset file: " + path);
  std::vector<RelevancySample> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    RelevancySample s;
    try {
      s = sample_from_json(json::parse(line));
      validate_sample(s);
    } catch (const json::exception& e) {
      throw MalformedLineError(path, line_no, e.what());
    } catch (const ValidationError& e) {
      throw MalformedLineError(path, line_no, e.what());
    }
    if (!seen.insert(s.id).second) throw DuplicateIdError(s.id);
    out.push_back(std::move(s));
  }
  return out;
}

/// Validates every sample (including id uniqueness) before any byte is written.
inline void save_dataset(const std::vector<RelevancySample>& samples, const std::string& path) {
  std::unordered_set<std::string> seen;
  for (const auto& s : samples) {
    validate_sample(s);
    if (!seen.insert(s.id).second) throw DuplicateIdError(s.id);
  }
  std::ostringstream buf;
  for (const auto& s : samples) buf << to_json(s).dump() << '\n';
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetIoError("cannot open for writing: " + path);
  out << buf.str();
  if (!out) throw DatasetIoError("write failed: " + path);
}

}  // namespace relkit
