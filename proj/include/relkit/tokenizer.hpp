#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>

#include "relkit/errors.hpp"

namespace relkit {

/// Pure text -> token-count function. The budget contract only needs a
/// consistent, conservative counter; backends with real tokenizer tables can
/// plug in an exact one.
using TokenCounter = std::function<int(std::string_view)>;

namespace detail {

inline bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

/// Word-ish runs count one segment each; every other printable byte counts
/// one on its own.
inline int segment_count(std::string_view text) {
  int segments = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      ++segments;
      while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    } else {
      ++segments;
      ++i;
    }
  }
  return segments;
}

}  // namespace detail

/// Default counter: segment count inflated by a safety factor (words tend to
/// split into more than one model token).
inline TokenCounter heuristic_token_counter(double inflation = 1.3) {
  return [inflation](std::string_view text) {
    return static_cast<int>(std::ceil(detail::segment_count(text) * inflation));
  };
}

/// Exact-counter slot: greedy longest-match against a vocabulary file (one
/// token string per line); unmatched bytes cost one token each.
inline TokenCounter vocab_token_counter(const std::string& vocab_path) {
  std::ifstream in(vocab_path);
  if (!in) throw ConfigError("cannot open vocabulary file: " + vocab_path);
  auto vocab = std::make_shared<std::unordered_set<std::string>>();
  std::size_t max_len = 1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    max_len = std::max(max_len, line.size());
    vocab->insert(line);
  }
  return [vocab, max_len](std::string_view text) {
    int count = 0;
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t take = 1;
      for (std::size_t len = std::min(max_len, text.size() - i); len > 1; --len) {
        if (vocab->count(std::string(text.substr(i, len)))) {
          take = len;
          break;
        }
      }
      ++count;
      i += take;
    }
    return count;
  };
}

}  // namespace relkit
