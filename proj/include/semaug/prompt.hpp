#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "semaug/error.hpp"

namespace semaug {

inline constexpr int kPromptTemplateVersion = 1;

// A predicted concept together with the start time of its segment.
struct TimedConcept {
  double start_sec = 0;
  std::string text;
};

struct AugmentedInput {
  std::string video_id;
  std::vector<std::string> concepts;  // segment temporal order
  std::string transcript;
  std::string rendered;
  std::vector<std::string> warnings;
};

// `concepts` must already be in segment order.
inline AugmentedInput assemble_augmented_input(std::string video_id, std::vector<std::string> concepts,
                                               std::string transcript, bool include_concepts) {
  if (transcript.empty()) throw DomainError("video " + video_id + " has an empty transcript");
  AugmentedInput out;
  out.video_id = std::move(video_id);
  out.concepts = std::move(concepts);
  out.transcript = std::move(transcript);
  if (!include_concepts) {
    out.rendered = out.transcript;
    return out;
  }
  if (out.concepts.empty()) out.warnings.push_back("video " + out.video_id + " has no predicted concepts");
  out.rendered = "Concepts: ";
  for (std::size_t i = 0; i < out.concepts.size(); ++i) {
    if (i > 0) out.rendered += "; ";
    out.rendered += out.concepts[i];
  }
  out.rendered += "\nTranscript: " + out.transcript;
  return out;
}

// Orders concepts by segment start time (stable for equal starts) first.
inline AugmentedInput assemble_augmented_input(std::string video_id, std::span<const TimedConcept> concepts,
                                               std::string transcript, bool include_concepts) {
  std::vector<TimedConcept> sorted(concepts.begin(), concepts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TimedConcept& a, const TimedConcept& b) { return a.start_sec < b.start_sec; });
  std::vector<std::string> texts;
  texts.reserve(sorted.size());
  for (auto& c : sorted) texts.push_back(std::move(c.text));
  return assemble_augmented_input(std::move(video_id), std::move(texts), std::move(transcript), include_concepts);
}

}  // namespace semaug
