#pragma once

// Assembles per-segment head inputs from embedding tables and scores
// concept retrieval with a trained model.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "semaug/contrastive.hpp"
#include "semaug/dataset.hpp"
#include "semaug/frame_sampler.hpp"
#include "semaug/retrieval.hpp"

namespace semaug {

enum class FrameSelection { middle, uniform };

struct FrameSelectionSpec {
  FrameSelection mode = FrameSelection::middle;
  std::size_t uniform_k = 3;

  std::vector<std::size_t> indices(std::size_t frame_count) const {
    if (mode == FrameSelection::uniform) return uniform_sample_indices(frame_count, uniform_k);
    const auto t = middle_frame_indices(frame_count);
    return {t.indices.begin(), t.indices.end()};
  }
};

template <class T>
struct SegmentSample {
  std::string video_id;
  std::string segment_id;
  std::string annotation;
  double start_sec = 0;
  Matrix<T> frames;  // selected frames, temporal order, one per row
  Matrix<T> text;    // annotation-text rows of the segment
};

// Samples for every manifest segment whose video is in `videos` (all
// segments when `videos` is null), in manifest order.
template <class T>
std::vector<SegmentSample<T>> build_samples(const std::vector<SegmentRecord>& records, const EmbeddingTable& frames,
                                            const EmbeddingTable& texts, const std::set<std::string>* videos,
                                            const FrameSelectionSpec& selection = {}) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::map<std::int64_t, std::size_t>> frame_rows;
  for (std::size_t r = 0; r < frames.index.size(); ++r) {
    const auto& d = frames.index[r];
    if (d.is_text()) continue;
    frame_rows[{d.video_id, d.segment_id}][d.frame_index] = r;
  }
  std::map<Key, std::vector<std::size_t>> text_rows;
  for (std::size_t r = 0; r < texts.index.size(); ++r) {
    const auto& d = texts.index[r];
    if (d.is_text()) text_rows[{d.video_id, d.segment_id}].push_back(r);
  }

  std::vector<SegmentSample<T>> out;
  for (const auto& rec : records) {
    if (videos && !videos->contains(rec.video_id)) continue;
    const Key key{rec.video_id, rec.segment_id};
    const std::string seg = rec.video_id + "/" + rec.segment_id;
    SegmentSample<T> s;
    s.video_id = rec.video_id;
    s.segment_id = rec.segment_id;
    s.annotation = rec.annotation;
    s.start_sec = rec.start_sec;

    const auto idx = selection.indices(static_cast<std::size_t>(rec.frame_count));
    const auto fit = frame_rows.find(key);
    s.frames.resize(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(frames.dim));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::size_t row = 0;
      bool found = false;
      if (fit != frame_rows.end()) {
        const auto rit = fit->second.find(static_cast<std::int64_t>(idx[i]));
        if (rit != fit->second.end()) {
          row = rit->second;
          found = true;
        }
      }
      if (!found)
        throw ValidationError("segment " + seg + " has no frame embedding for frame " + std::to_string(idx[i]));
      s.frames.row(static_cast<Eigen::Index>(i)) = frames.rows.row(static_cast<Eigen::Index>(row)).template cast<T>();
    }

    const auto tit = text_rows.find(key);
    if (tit == text_rows.end()) throw ValidationError("segment " + seg + " has no annotation-text embedding");
    s.text.resize(static_cast<Eigen::Index>(tit->second.size()), static_cast<Eigen::Index>(texts.dim));
    for (std::size_t i = 0; i < tit->second.size(); ++i)
      s.text.row(static_cast<Eigen::Index>(i)) =
          texts.rows.row(static_cast<Eigen::Index>(tit->second[i])).template cast<T>();
    out.push_back(std::move(s));
  }
  return out;
}

// Temporal features (selected frames concatenated in order), one row per sample.
template <class T>
Matrix<T> temporal_features(const std::vector<SegmentSample<T>>& samples) {
  if (samples.empty()) return {};
  const auto width = samples.front().frames.size();
  Matrix<T> out(static_cast<Eigen::Index>(samples.size()), width);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].frames.size() != width)
      throw DomainError("segment " + samples[i].video_id + "/" + samples[i].segment_id +
                        " has a different number of selected frames");
    out.row(static_cast<Eigen::Index>(i)) = temporal_concat<T>(samples[i].frames).transpose();
  }
  return out;
}

struct ConceptPrediction {
  std::string video_id;
  std::string segment_id;
  double start_sec = 0;
  std::string annotation;  // gold
  std::string predicted;   // best-ranked candidate annotation
};

struct ConceptEvaluation {
  RetrievalResult result;
  std::vector<std::string> candidates;  // distinct annotations, first-appearance order
  std::vector<ConceptPrediction> predictions;
};

// Every sample's frames are a query; the candidate pool holds each distinct
// annotation once, embedded from the first sample that carries it.
template <class T>
ConceptEvaluation evaluate_concept_retrieval(const ContrastiveModel<T>& model,
                                             const std::vector<SegmentSample<T>>& samples, std::size_t k = 3) {
  ConceptEvaluation ev;
  if (samples.empty()) return ev;
  std::map<std::string, std::size_t> pool;
  std::vector<Matrix<T>> candidate_inputs;
  std::vector<Matrix<T>> query_inputs;
  std::vector<std::size_t> truth;
  for (const auto& s : samples) {
    auto [it, inserted] = pool.emplace(s.annotation, ev.candidates.size());
    if (inserted) {
      ev.candidates.push_back(s.annotation);
      candidate_inputs.push_back(s.text);
    }
    truth.push_back(it->second);
    query_inputs.push_back(s.frames);
  }
  Matrix<T> iq, tq;
  if (model.image.config.mode == HeadMode::perceiver) iq = perceiver_queries(model.image);
  if (model.text.config.mode == HeadMode::perceiver) tq = perceiver_queries(model.text);
  const Matrix<T> queries = embed_all<T>(model.image, iq, query_inputs, nullptr);
  const Matrix<T> candidates = embed_all<T>(model.text, tq, candidate_inputs, nullptr);
  ev.result = topk_retrieval_accuracy<T>(queries, candidates, truth, std::min(k, ev.candidates.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    ev.predictions.push_back({s.video_id, s.segment_id, s.start_sec, s.annotation,
                              ev.candidates[ev.result.ranked[i].front()]});
  }
  return ev;
}

}  // namespace semaug
