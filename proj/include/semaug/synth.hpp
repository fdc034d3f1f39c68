#pragma once

// Synthetic concept-plus-noise corpus.
//
// Each of C concepts is a random direction in R^d scaled to `concept_norm`.
// A segment of concept c gets frame features c + N(0, frame_noise^2 I),
// drawn independently per frame. All segments of a concept share one
// annotation sentence, and that sentence has a single text embedding
// c + N(0, text_noise^2 I), drawn once per concept as a frozen text encoder
// would produce. Segments are dealt to videos in shuffled order.

#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "semaug/dataset.hpp"
#include "semaug/frame_sampler.hpp"

namespace semaug {

struct SynthConfig {
  std::size_t concepts = 10;
  std::size_t dim = 32;
  std::size_t segments_per_concept = 40;
  std::size_t segments_per_video = 10;
  double concept_norm = 1.0;
  double frame_noise = 0.3;
  double text_noise = 0.3;
  std::size_t min_frames = 6;
  std::size_t max_frames = 24;
  bool all_frames = false;  // emit every frame instead of the middle triple
  std::uint64_t seed = 0;

  void validate() const {
    if (concepts == 0 || dim == 0 || segments_per_concept == 0 || segments_per_video == 0)
      throw ValidationError("synthetic corpus sizes must be positive");
    if (min_frames < 3 || max_frames < min_frames) throw ValidationError("need 3 <= min_frames <= max_frames");
    if (frame_noise < 0 || text_noise < 0 || !(concept_norm > 0)) throw ValidationError("bad synthetic noise settings");
  }
};

struct SynthCorpus {
  std::vector<SegmentRecord> records;
  std::vector<VideoTranscript> transcripts;
  EmbeddingTable frames;
  EmbeddingTable texts;
  std::vector<std::size_t> concept_of;  // per record
};

inline std::string synth_annotation(std::size_t concept_id) {
  static const char* const kSteps[] = {
      "melt butter in a pan",        "add chopped onions",         "season with salt and pepper",
      "whisk the eggs in a bowl",    "boil the pasta in water",    "slice the tomatoes thinly",
      "fry the chicken until brown", "pour the sauce over the rice", "knead the dough on the board",
      "garnish with fresh parsley",  "grill the bread slices",     "stir in the grated cheese",
  };
  constexpr std::size_t n = sizeof(kSteps) / sizeof(kSteps[0]);
  std::string s = kSteps[concept_id % n];
  if (concept_id >= n) s += " step " + std::to_string(concept_id / n + 1);
  return s;
}

inline SynthCorpus generate_synthetic_corpus(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(cfg.dim);

  std::vector<Vector<double>> centers, text_embs;
  for (std::size_t c = 0; c < cfg.concepts; ++c) {
    Vector<double> v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = gauss(rng);
    v *= cfg.concept_norm / v.norm();
    centers.push_back(v);
  }
  for (std::size_t c = 0; c < cfg.concepts; ++c) {
    Vector<double> t = centers[c];
    for (Eigen::Index i = 0; i < d; ++i) t(i) += cfg.text_noise * gauss(rng);
    text_embs.push_back(t);
  }

  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < cfg.concepts; ++c) labels.insert(labels.end(), cfg.segments_per_concept, c);
  std::shuffle(labels.begin(), labels.end(), rng);

  SynthCorpus out;
  out.frames.dim = cfg.dim;
  out.texts.dim = cfg.dim;
  std::vector<std::vector<float>> frame_rows, text_rows;
  std::uniform_int_distribution<std::size_t> frames_dist(cfg.min_frames, cfg.max_frames);
  std::uniform_real_distribution<double> dur_dist(5.0, 30.0);

  const std::size_t videos = (labels.size() + cfg.segments_per_video - 1) / cfg.segments_per_video;
  for (std::size_t v = 0; v < videos; ++v) {
    char vid[32];
    std::snprintf(vid, sizeof vid, "vid%04zu", v);
    std::string transcript;
    double t = 0;
    for (std::size_t s = 0; s < cfg.segments_per_video; ++s) {
      const std::size_t li = v * cfg.segments_per_video + s;
      if (li >= labels.size()) break;
      const std::size_t c = labels[li];
      SegmentRecord rec;
      rec.video_id = vid;
      char sid[32];
      std::snprintf(sid, sizeof sid, "seg%02zu", s);
      rec.segment_id = sid;
      rec.start_sec = t;
      t += dur_dist(rng);
      rec.end_sec = t;
      rec.annotation = synth_annotation(c);
      rec.frame_count = static_cast<int>(frames_dist(rng));
      t += 1.0;

      std::vector<std::size_t> idx;
      if (cfg.all_frames) {
        idx.resize(static_cast<std::size_t>(rec.frame_count));
        std::iota(idx.begin(), idx.end(), 0);
      } else {
        const auto triple = middle_frame_indices(static_cast<std::size_t>(rec.frame_count));
        idx.assign(triple.indices.begin(), triple.indices.end());
      }
      for (std::size_t f : idx) {
        std::vector<float> row(cfg.dim);
        for (std::size_t i = 0; i < cfg.dim; ++i)
          row[i] = static_cast<float>(centers[c](static_cast<Eigen::Index>(i)) + cfg.frame_noise * gauss(rng));
        frame_rows.push_back(std::move(row));
        out.frames.index.push_back({rec.video_id, rec.segment_id, static_cast<std::int64_t>(f)});
      }
      std::vector<float> trow(cfg.dim);
      for (std::size_t i = 0; i < cfg.dim; ++i) trow[i] = static_cast<float>(text_embs[c](static_cast<Eigen::Index>(i)));
      text_rows.push_back(std::move(trow));
      out.texts.index.push_back({rec.video_id, rec.segment_id, kTextFrame});

      transcript += (s == 0 ? "okay so first we " : " next we ") + rec.annotation + ", just like that.";
      out.concept_of.push_back(c);
      out.records.push_back(std::move(rec));
    }
    out.transcripts.push_back({vid, transcript + " and that is the whole recipe."});
  }

  auto fill = [](EmbeddingTable& table, const std::vector<std::vector<float>>& rows) {
    table.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.dim));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t i = 0; i < table.dim; ++i)
        table.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = rows[r][i];
  };
  fill(out.frames, frame_rows);
  fill(out.texts, text_rows);
  return out;
}

}  // namespace semaug
