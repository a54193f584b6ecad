#pragma once

#include <string>

#include "relkit/core.hpp"
#include "relkit/pair_builder.hpp"

namespace relkit {

// Hand-crafted inference-time instructions bundled as defaults for the tasks
// that ship with one. They stay out of every training pool.

inline const char* kLlavaEvalInstruction =
    "You are given an image and a series of Question and Answer. Your task is to judge whether "
    "the image is relevant to these Questions and Answer. Here are several important "
    "instructions:\n"
    "- Do not simply confirm the the object exists in image.\n"
    "- Think about whether there is visual evidence supports or unrelated or contradicts the "
    "question and answer.\n"
    "- In the textual question and answer, look for attributes such as color, size, shape, "
    "location, etc. And evaluate if the image matches these attributes.\n"
    "- In the textual question and answer, look for context or settings of how the object is "
    "shown (background, neighboring objects, usage scenarios, etc.), and evaluate if the image "
    "shows the context.\n"
    "- Use only the clear visual information that can be directly seen from image to determine "
    "the relevancy to question and answers.\n"
    "- IMPORTANT: do not reason with your own knowledge or additional hallucination or guessing "
    "to determine relevancy.\n"
    "- IMPORTANT: do not say 'yes' if certain aspects cannot be determined visually, Look very "
    "careful at the image!\n"
    "- IMPORTANT: do not say 'yes' if answering requires knowledge beyond the image.\n"
    "- Only say 'yes' if the image shows direct and obvious matching visual clues that supports "
    "the textual question and answer.\n"
    "- If there are multiple question and answer, only say 'yes' if the image is relevant to all "
    "question and answer.\n"
    "- If image is only related to the object and does not match the attributes, you should say "
    "'no'.";

inline const char* kTextVqaEvalInstruction =
    "You are given an image and a pair of question and answer. Your task is to judge whether the "
    "image is relevant to the question and answer. Here are several important instructions:\n"
    "- The question focuses on text understanding. The image may be coherent or incoherent to "
    "this question.\n"
    "- The answer includes an explanation to justify itself. It contains important details about "
    "a true relevant image.\n"
    "- In the text, look for descriptions about objects, characters, colors, spatial "
    "relationships. Check whether these descriptions match the image.\n"
    "- In the image, recognize existing characters such as digits, english letters, before "
    "making a judgement.\n"
    "- Use only the clear visual information that can be directly seen from image to determine "
    "the relevancy to text.\n"
    "- IMPORTANT: do not reason with additional hallucination or guessing to determine "
    "relevancy.\n"
    "- IMPORTANT: do not say 'yes' if certain aspects cannot be determined visually, Look very "
    "careful at the image!\n"
    "- Only say 'yes' if the image shows direct and obvious matching visual clues that supports "
    "the text.\n"
    "- If image contradicts with answer regarding the question, you should say 'no'.\n"
    "- The answer must be a single word of 'Yes' or 'No'.";

inline const char* kCarsEvalInstruction =
    "You are given a car image and a short description about a specific car model. Your task is "
    "to judge whether the image is relevant to the text. Here are several important "
    "instructions:\n"
    "- Carefully look at details in the image, such as car shape, decoration, color, number of "
    "doors, wheel sizes.\n"
    "- The image may look similar to the described car model, but not exactly match it.\n"
    "- Use your own knowledge to distinguish any visual differences between the image and the "
    "car description.\n"
    "- Only say 'yes' if the image shows exactly the same fine-grained attributes as the "
    "description. Otherwise, say 'no'.\n"
    "- The answer must be a single word of 'yes' or 'no'.";

inline const char* kGenericEvalInstruction =
    "You are given an image and a text. Your task is to judge whether the image is relevant to "
    "the text. Use only the clear visual information that can be directly seen from the image. "
    "The answer must be a single word of 'Yes' or 'No'.";

inline TextFormat default_format_for(const std::string& task) {
  switch (default_strategy_for(task)) {
    case PairingStrategy::SameCategoryImageSwap: return TextFormat::Conversations;
    case PairingStrategy::SiblingFieldMismatch: return TextFormat::PlainParagraph;
    case PairingStrategy::ChoiceListNegatives: return TextFormat::IngredientsDescription;
    case PairingStrategy::SimilarImageSwap:
    case PairingStrategy::SimilarTextSwap: return TextFormat::QaWithReasoning;
    case PairingStrategy::CrossClassDescription: return TextFormat::CategoryDescription;
  }
  return TextFormat::PlainParagraph;
}

/// Ready-to-use spec for a known task name; unknown names get the
/// fine-grained defaults plus the generic instruction.
inline TaskSpec default_task_spec(const std::string& name) {
  TaskSpec t;
  t.name = name;
  t.strategy = to_string(default_strategy_for(name));
  t.text_format = default_format_for(name);
  if (name == "llava") {
    t.eval_instruction = kLlavaEvalInstruction;
  } else if (name == "textvqa") {
    t.eval_instruction = kTextVqaEvalInstruction;
  } else if (name == "cars") {
    t.eval_instruction = kCarsEvalInstruction;
  } else {
    t.eval_instruction = kGenericEvalInstruction;
  }
  t.train_instruction_pool = {
      "Judge whether the image matches the text for the '" + name +
          "' task. Answer with a single word: 'Yes' or 'No'.",
      "Look at the image and read the text. Is the image relevant to the text? Reply 'Yes' or "
      "'No' only.",
  };
  return t;
}

}  // namespace relkit
