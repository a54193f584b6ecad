#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "relkit/core.hpp"
#include "relkit/errors.hpp"

namespace relkit {

struct QaPair {
  std::string question;
  std::string answer;

  bool operator==(const QaPair&) const = default;
};

struct ChoiceImages {
  MediaRef positive;
  std::vector<MediaRef> negatives;
};

/// One raw corpus entry, as emitted by a source adapter. `fields` carries
/// adapter-specific strings (section_text, page_description, first_step_title,
/// reasoning, class_description, split, ...).
struct SourceRecord {
  std::string record_id;
  MediaRef image;
  std::map<std::string, std::string> fields;
  std::optional<std::vector<QaPair>> qa_series;
  std::optional<ChoiceImages> choice_images;

  std::optional<std::string> field(const std::string& name) const {
    auto it = fields.find(name);
    if (it == fields.end()) return std::nullopt;
    return it->second;
  }

  Split split() const {
    auto s = field("split");
    return s && *s == "test" ? Split::Test : Split::Train;
  }
};

inline void validate_record(const SourceRecord& r) {
  if (r.record_id.empty()) throw ValidationError("record_id empty");
  if (r.image.uri.empty()) throw ValidationError("record " + r.record_id + ": image.uri empty");
  if (r.choice_images && r.choice_images->negatives.empty())
    throw ValidationError("record " + r.record_id + ": choice_images.negatives empty");
}

inline json to_json(const SourceRecord& r) {
  json j;
  j["record_id"] = r.record_id;
  j["image"] = to_json(r.image);
  if (!r.fields.empty()) j["fields"] = r.fields;
  if (r.qa_series) {
    json qa = json::array();
    for (const auto& p : *r.qa_series) qa.push_back({{"question", p.question}, {"answer", p.answer}});
    j["qa_series"] = qa;
  }
  if (r.choice_images) {
    json neg = json::array();
    for (const auto& m : r.choice_images->negatives) neg.push_back(to_json(m));
    j["choice_images"] = {{"positive", to_json(r.choice_images->positive)}, {"negatives", neg}};
  }
  return j;
}

inline SourceRecord record_from_json(const json& j) {
  SourceRecord r;
  r.record_id = j.at("record_id").get<std::string>();
  r.image = media_ref_from_json(j.at("image"));
  if (j.contains("fields")) r.fields = j.at("fields").get<std::map<std::string, std::string>>();
  if (j.contains("qa_series")) {
    std::vector<QaPair> qa;
    for (const auto& item : j.at("qa_series"))
      qa.push_back({item.at("question").get<std::string>(), item.at("answer").get<std::string>()});
    r.qa_series = std::move(qa);
  }
  if (j.contains("choice_images")) {
    ChoiceImages c;
    c.positive = media_ref_from_json(j.at("choice_images").at("positive"));
    for (const auto& item : j.at("choice_images").at("negatives"))
      c.negatives.push_back(media_ref_from_json(item));
    r.choice_images = std::move(c);
  }
  return r;
}

inline std::vector<SourceRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetIoError("cannot open manifest: " + path);
  std::vector<SourceRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    SourceRecord r;
    try {
      r = record_from_json(json::parse(line));
      validate_record(r);
    } catch (const json::exception& e) {
      throw MalformedLineError(path, line_no, e.what());
    } catch (const ValidationError& e) {
      throw MalformedLineError(path, line_no, e.what());
    }
    if (!seen.insert(r.record_id).second) throw DuplicateIdError(r.record_id);
    out.push_back(std::move(r));
  }
  return out;
}

inline void save_manifest(const std::vector<SourceRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetIoError("cannot open for writing: " + path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

}  // namespace relkit
