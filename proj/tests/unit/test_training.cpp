#include <set>

#include <gtest/gtest.h>

#include "semaug/checkpoint.hpp"
#include "semaug/synth.hpp"
#include "semaug/trainer.hpp"
#include "support/temp_dir.hpp"

using namespace semaug;

namespace {

struct SmallCorpus {
  SynthCorpus corpus;
  std::vector<SegmentSample<double>> train, val;
};

SmallCorpus small_corpus(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.concepts = 4;
  cfg.dim = 8;
  cfg.segments_per_concept = 12;
  cfg.segments_per_video = 6;
  cfg.seed = seed;
  SmallCorpus s;
  s.corpus = generate_synthetic_corpus(cfg);
  const auto split = split_dataset(s.corpus.records, {0.67, 0.08, 0.25, seed});
  const std::set<std::string> tr(split.train.begin(), split.train.end()), va(split.test.begin(), split.test.end());
  s.train = build_samples<double>(s.corpus.records, s.corpus.frames, s.corpus.texts, &tr);
  s.val = build_samples<double>(s.corpus.records, s.corpus.frames, s.corpus.texts, &va);
  return s;
}

TrainConfig quick_config() {
  TrainConfig c;
  c.epochs = 15;
  c.batch_size = 8;
  c.latents = 4;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(Synth, CorpusShape) {
  SynthConfig cfg;
  cfg.seed = 1;
  const auto c = generate_synthetic_corpus(cfg);
  EXPECT_EQ(c.records.size(), 400u);
  EXPECT_EQ(c.transcripts.size(), 40u);
  EXPECT_EQ(c.frames.size(), 1200u);
  EXPECT_EQ(c.texts.size(), 400u);
  EXPECT_NO_THROW(c.frames.validate());
  EXPECT_NO_THROW(c.texts.validate());
  for (const auto& r : c.records) {
    EXPECT_GE(r.frame_count, 6);
    EXPECT_LE(r.frame_count, 24);
  }
  std::set<std::string> annotations;
  for (const auto& r : c.records) annotations.insert(r.annotation);
  EXPECT_EQ(annotations.size(), 10u);
}

TEST(Synth, FrameRowsFollowMiddleTriple) {
  SynthConfig cfg;
  cfg.concepts = 2;
  cfg.segments_per_concept = 3;
  const auto c = generate_synthetic_corpus(cfg);
  std::size_t row = 0;
  for (const auto& r : c.records) {
    const auto t = middle_frame_indices(static_cast<std::size_t>(r.frame_count)).indices;
    for (std::size_t f : t) {
      EXPECT_EQ(c.frames.index[row].segment_id, r.segment_id);
      EXPECT_EQ(c.frames.index[row++].frame_index, static_cast<std::int64_t>(f));
    }
  }
}

TEST(Synth, Deterministic) {
  SynthConfig cfg;
  cfg.seed = 9;
  const auto a = generate_synthetic_corpus(cfg), b = generate_synthetic_corpus(cfg);
  EXPECT_TRUE(a.frames == b.frames);
  EXPECT_TRUE(a.texts == b.texts);
}

TEST(Samples, UniformSelectionNeedsAllFrames) {
  SynthConfig cfg;
  cfg.concepts = 2;
  cfg.segments_per_concept = 4;
  const auto c = generate_synthetic_corpus(cfg);
  EXPECT_THROW(build_samples<double>(c.records, c.frames, c.texts, nullptr, {FrameSelection::uniform, 3}),
               ValidationError);
  cfg.all_frames = true;
  const auto full = generate_synthetic_corpus(cfg);
  const auto s = build_samples<double>(full.records, full.frames, full.texts, nullptr, {FrameSelection::uniform, 4});
  ASSERT_EQ(s.size(), full.records.size());
  EXPECT_EQ(s[0].frames.rows(), 4);
}

TEST(Samples, MissingTextRowRejected) {
  SynthConfig cfg;
  cfg.concepts = 2;
  cfg.segments_per_concept = 2;
  auto c = generate_synthetic_corpus(cfg);
  c.texts.index.pop_back();
  c.texts.rows.conservativeResize(c.texts.rows.rows() - 1, Eigen::NoChange);
  EXPECT_THROW(build_samples<double>(c.records, c.frames, c.texts, nullptr), ValidationError);
}

TEST(Samples, TemporalFeatureIsFrameConcat) {
  const auto s = small_corpus(1);
  const auto x = temporal_features(s.train);
  ASSERT_EQ(static_cast<std::size_t>(x.rows()), s.train.size());
  EXPECT_EQ(x.cols(), 24);
  EXPECT_EQ(Vector<double>(x.row(0).segment(8, 8).transpose()), Vector<double>(s.train[0].frames.row(1).transpose()));
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  const auto s = small_corpus(2);
  auto cfg = quick_config();
  cfg.epochs = 2;
  cfg.learning_rate = 0;
  const auto result = train(s.train, s.val, cfg);
  const auto init = init_model_for(s.train, cfg);
  EXPECT_EQ(result.model.image.w_k, init.image.w_k);
  EXPECT_EQ(result.model.text.w_o, init.text.w_o);
  EXPECT_EQ(result.model.image.latents, init.image.latents);
}

TEST(Train, LossDecreases) {
  const auto s = small_corpus(3);
  for (auto mode : {HeadMode::perceiver, HeadMode::learnable_pool}) {
    auto cfg = quick_config();
    cfg.mode = mode;
    const auto r = train(s.train, s.val, cfg).report;
    EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front()) << to_string(mode);
    EXPECT_EQ(r.val_top1.size(), cfg.epochs);
    for (std::size_t i = 0; i < r.val_top1.size(); ++i) EXPECT_LE(r.val_top1[i], r.val_top3[i]);
  }
}

TEST(Train, BitwiseDeterministic) {
  const auto s = small_corpus(4);
  for (auto batching : {BatchingMode::kmeans, BatchingMode::random}) {
    auto cfg = quick_config();
    cfg.batching = batching;
    const auto a = train(s.train, s.val, cfg), b = train(s.train, s.val, cfg);
    EXPECT_EQ(a.report.epoch_loss, b.report.epoch_loss);
    EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
    EXPECT_EQ(a.model.image.w_o, b.model.image.w_o);
  }
}

TEST(Train, DivergenceGuard) {
  const auto s = small_corpus(5);
  auto cfg = quick_config();
  cfg.learning_rate = 1e300;
  cfg.temperature_learnable = true;
  EXPECT_THROW(train(s.train, s.val, cfg), NumericError);
}

TEST(Train, ConfigValidation) {
  const auto s = small_corpus(5);
  auto cfg = quick_config();
  cfg.epochs = 0;
  EXPECT_THROW(train(s.train, s.val, cfg), ValidationError);
  cfg = quick_config();
  cfg.temperature = 0;
  EXPECT_THROW(train(s.train, s.val, cfg), ValidationError);
  cfg = quick_config();
  cfg.batch_size = 0;
  EXPECT_THROW(train(s.train, s.val, cfg), ValidationError);
}

TEST(Train, KMeansBatchesSpanClusters) {
  const auto s = small_corpus(6);
  auto cfg = quick_config();
  cfg.clusters = 4;
  const BatchPlanner planner(temporal_features(s.train), cfg);
  const auto plan = planner.plan(0);
  EXPECT_EQ(plan.row_count(), s.train.size());
  std::set<std::size_t> first(plan.batches[0].clusters.begin(), plan.batches[0].clusters.end());
  EXPECT_EQ(first.size(), 4u);
  EXPECT_NE(planner.plan(0).to_jsonl(), planner.plan(1).to_jsonl());
}

TEST(Train, FrozenMeanSkipsUpdates) {
  const auto s = small_corpus(7);
  auto cfg = quick_config();
  cfg.mode = HeadMode::frozen_mean;
  cfg.epochs = 3;
  const auto r = train(s.train, s.val, cfg).report;
  EXPECT_EQ(r.epoch_loss.size(), 3u);
}

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 10; ++s)
    for (std::uint64_t k = 0; k < 10; ++k) seen.insert(derive_seed(s, k));
  EXPECT_EQ(seen.size(), 100u);
}

TEST(Checkpoint, RoundTripAtFloatPrecision) {
  const auto s = small_corpus(8);
  auto cfg = quick_config();
  cfg.epochs = 2;
  const auto model = train(s.train, s.val, cfg).model;
  testing_support::TempDir dir;
  save_checkpoint({model, 3, 17}, dir / "m.ckpt");
  const auto back = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(back.seed, 3u);
  EXPECT_EQ(back.step, 17u);
  EXPECT_EQ(back.model.image.config.latents, 4u);
  EXPECT_EQ(back.model.image.w_o.cast<float>().cast<double>(), back.model.image.w_o);
  EXPECT_EQ(model.image.w_o.cast<float>().cast<double>(), back.model.image.w_o);
  EXPECT_EQ(model.text.latents.cast<float>().cast<double>(), back.model.text.latents);
  EXPECT_EQ(back.model.log_scale, model.log_scale);
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint({model, 3, 17}));
}

TEST(Checkpoint, CorruptionDetected) {
  const auto model = init_model<double>({4, 2, 3, 4, HeadMode::perceiver}, {4, 2, 3, 4, HeadMode::perceiver}, 0.07,
                                        false, 0);
  const auto bytes = encode_checkpoint({model, 0, 0});
  EXPECT_THROW(decode_checkpoint("XXXX" + bytes.substr(4), "x"), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3), "x"), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes + "z", "x"), FormatError);
}
