#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "relkit/digest.hpp"
#include "relkit/errors.hpp"

namespace relkit {

enum class SimilarityKind { Image, Text };

inline std::string to_string(SimilarityKind k) {
  return k == SimilarityKind::Image ? "image" : "text";
}

inline SimilarityKind similarity_kind_from_string(const std::string& s) {
  if (s == "image") return SimilarityKind::Image;
  if (s == "text") return SimilarityKind::Text;
  throw ValidationError("unknown similarity kind: " + s);
}

/// Precomputed pairwise similarity scores, keyed by embed keys. Scores are
/// ingested, never computed here. Lookup is symmetric; entries are stored
/// under the lexicographically ordered key pair.
class SimilarityTable {
 public:
  SimilarityKind kind = SimilarityKind::Image;

  void insert(const std::string& a, const std::string& b, double score) {
    if (score < 0.0 || score > 1.0)
      throw ValidationError("similarity score out of [0,1]: " + std::to_string(score));
    auto key = ordered(a, b);
    auto [it, fresh] = entries_.emplace(key, score);
    if (!fresh && it->second != score)
      throw ValidationError("conflicting scores for pair (" + a + ", " + b + ")");
    keys_.insert(a);
    keys_.insert(b);
  }

  std::optional<double> score(const std::string& a, const std::string& b) const {
    auto it = entries_.find(ordered(a, b));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  bool has_key(const std::string& k) const { return keys_.count(k) > 0; }
  std::size_t size() const { return entries_.size(); }

  static SimilarityTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetIoError("cannot open similarity table: " + path);
    SimilarityTable table;
    bool kind_set = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        auto kind = similarity_kind_from_string(j.at("kind").get<std::string>());
        if (!kind_set) {
          table.kind = kind;
          kind_set = true;
        } else if (kind != table.kind) {
          throw ValidationError("mixed similarity kinds in one table");
        }
        table.insert(j.at("a").get<std::string>(), j.at("b").get<std::string>(),
                     j.at("score").get<double>());
      } catch (const nlohmann::json::exception& e) {
        throw MalformedLineError(path, line_no, e.what());
      } catch (const ValidationError& e) {
        throw MalformedLineError(path, line_no, e.what());
      }
    }
    return table;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetIoError("cannot open for writing: " + path);
    for (const auto& [key, score] : entries_) {
      nlohmann::json j{{"a", key.first}, {"b", key.second}, {"score", score},
                       {"kind", to_string(kind)}};
      out << j.dump() << '\n';
    }
  }

 private:
  static std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  std::map<std::pair<std::string, std::string>, double> entries_;
  std::set<std::string> keys_;
};

/// Deterministic pseudo-random table over all key pairs; test/demo stand-in
/// for real embedding similarities.
inline SimilarityTable make_random_similarity(const std::vector<std::string>& keys,
                                              SimilarityKind kind, std::uint64_t seed) {
  SimilarityTable table;
  table.kind = kind;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (std::size_t j = i + 1; j < keys.size(); ++j) {
      const std::string& a = keys[i] <= keys[j] ? keys[i] : keys[j];
      const std::string& b = keys[i] <= keys[j] ? keys[j] : keys[i];
      std::uint64_t h = fnv1a64(b, fnv1a64(a, fnv1a64(seed)));
      double score = static_cast<double>(h % 1000000ULL) / 999999.0;
      table.insert(a, b, score);
    }
  }
  return table;
}

}  // namespace relkit
