#pragma once

#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "relkit/backend.hpp"
#include "relkit/core.hpp"
#include "relkit/digest.hpp"
#include "relkit/errors.hpp"

namespace relkit {

enum class AugmentationKind {
  ReasoningJustification,  // justify a short answer with visual evidence
  ClassVisualDescription,  // expand a class name into visual features
  TaskInstruction,         // draft a training-time task instruction variant
};

inline std::string to_string(AugmentationKind k) {
  switch (k) {
    case AugmentationKind::ReasoningJustification: return "reasoning_justification";
    case AugmentationKind::ClassVisualDescription: return "class_visual_description";
    case AugmentationKind::TaskInstruction: return "task_instruction";
  }
  return "reasoning_justification";
}

/// Field usage by kind: ReasoningJustification uses image+question+answer;
/// ClassVisualDescription puts the class name in `question`; TaskInstruction
/// puts the task name in `question` and a style hint in `answer`.
struct AugmentationRequest {
  MediaRef image;
  std::string question;
  std::string answer;
  AugmentationKind kind = AugmentationKind::ReasoningJustification;
};

inline void validate_request(const AugmentationRequest& r) {
  if (r.kind == AugmentationKind::ReasoningJustification &&
      (r.question.empty() || r.answer.empty()))
    throw ValidationError("reasoning_justification needs question and answer");
}

inline std::string request_digest(const AugmentationRequest& r) {
  std::uint64_t h = fnv1a64(to_string(r.kind));
  h = fnv1a64(r.image.uri, h);
  h = fnv1a64(r.question, h);
  h = fnv1a64(r.answer, h);
  return hex64(h);
}

/// File-backed generation cache: one {digest, text} JSON line per completed
/// request, appended as results arrive so interrupted runs resume for free.
/// Single writer, any number of readers.
class AugmentationCache {
 public:
  AugmentationCache() = default;

  explicit AugmentationCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("digest") || !j.contains("text")) continue;
      entries_[j["digest"].get<std::string>()] = j["text"].get<std::string>();
    }
  }

  std::optional<std::string> get(const std::string& digest) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& digest, const std::string& text) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!entries_.emplace(digest, text).second) return;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    out << json{{"digest", digest}, {"text", text}}.dump() << '\n';
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

 private:
  std::string path_;  // empty = in-memory only
  std::unordered_map<std::string, std::string> entries_;
  mutable std::mutex mutex_;
};

namespace detail {

inline ConversationPrompt augmentation_prompt(const AugmentationRequest& r) {
  ConversationPrompt p;
  switch (r.kind) {
    case AugmentationKind::ReasoningJustification:
      p.instruction =
          "You are given an image and a question with its short answer. Write a few "
          "sentences that justify the answer using only visual evidence from the image.";
      p.query_image = r.image;
      p.query_text =
          make_text_block("Question: " + r.question + " Answer: " + r.answer,
                          TextFormat::QaWithReasoning);
      break;
    case AugmentationKind::ClassVisualDescription:
      p.instruction =
          "Describe the distinctive visual features of the named class in a few sentences, "
          "focusing on attributes that separate it from similar classes.";
      p.query_image = r.image;
      p.query_text = make_text_block(r.question, TextFormat::CategoryDescription);
      break;
    case AugmentationKind::TaskInstruction:
      p.instruction =
          "Write one paragraph of instructions for judging whether an image is relevant to a "
          "text in the named task. Vary the wording from the example. End by requiring a "
          "single-word answer of 'Yes' or 'No'.";
      p.query_image = r.image;
      p.query_text = make_text_block("Task: " + r.question +
                                         (r.answer.empty() ? "" : "\nExample: " + r.answer),
                                     TextFormat::PlainParagraph);
      break;
  }
  return p;
}

}  // namespace detail

/// One generated text per request, in order. Results are memoized by request
/// digest within the run and through the cache across runs, so identical
/// requests cost one backend call and reruns are free.
inline std::vector<std::string> augment(const std::vector<AugmentationRequest>& requests,
                                        ChatBackend& backend, AugmentationCache* cache = nullptr) {
  std::vector<std::string> out;
  out.reserve(requests.size());
  std::unordered_map<std::string, std::string> memo;
  for (const auto& r : requests) {
    validate_request(r);
    const std::string digest = request_digest(r);
    if (auto it = memo.find(digest); it != memo.end()) {
      out.push_back(it->second);
      continue;
    }
    if (cache) {
      if (auto hit = cache->get(digest)) {
        memo[digest] = *hit;
        out.push_back(*hit);
        continue;
      }
    }
    std::string text;
    try {
      text = backend.complete(detail::augmentation_prompt(r), "augment:" + digest);
    } catch (const BackendError& e) {
      // everything generated so far is already cached; rerun to resume
      throw AugmentationError(std::string("augmentation failed at digest ") + digest + ": " +
                              e.what());
    }
    memo[digest] = text;
    if (cache) cache->put(digest, text);
    out.push_back(std::move(text));
  }
  return out;
}

/// Appends generated instruction variants to a task's training pool, skipping
/// duplicates and anything equal to the fixed eval instruction.
inline void augment_instruction_pool(TaskSpec& task, int count, ChatBackend& backend,
                                     AugmentationCache* cache = nullptr) {
  std::vector<AugmentationRequest> requests;
  for (int i = 0; i < count; ++i) {
    AugmentationRequest r;
    r.kind = AugmentationKind::TaskInstruction;
    r.question = task.name + " #" + std::to_string(i);
    r.answer = task.train_instruction_pool.empty() ? "" : task.train_instruction_pool.front();
    requests.push_back(std::move(r));
  }
  for (auto& text : augment(requests, backend, cache)) {
    if (text.empty() || text == task.eval_instruction) continue;
    if (std::find(task.train_instruction_pool.begin(), task.train_instruction_pool.end(), text) ==
        task.train_instruction_pool.end())
      task.train_instruction_pool.push_back(std::move(text));
  }
}

}  // namespace relkit
