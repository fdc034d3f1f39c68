#pragma once

// Plain gradient-descent training of both heads on the symmetric
// contrastive loss, over k-means-diverse or shuffled batches.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "semaug/batching.hpp"
#include "semaug/contrastive.hpp"
#include "semaug/kmeans.hpp"
#include "semaug/samples.hpp"

namespace semaug {

enum class BatchingMode { kmeans, random };

inline std::string_view to_string(BatchingMode m) { return m == BatchingMode::kmeans ? "kmeans" : "random"; }

inline BatchingMode parse_batching_mode(std::string_view s) {
  if (s == "kmeans") return BatchingMode::kmeans;
  if (s == "random") return BatchingMode::random;
  throw ValidationError("unknown batching mode '" + std::string(s) + "'");
}

// splitmix64 finalizer; decorrelates per-purpose seeds drawn from one seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  std::size_t clusters = 0;  // k for k-means batching; 0 means batch_size
  std::size_t kmeans_restarts = 10;
  double temperature = kDefaultTemperature;
  bool temperature_learnable = false;
  std::uint64_t seed = 0;
  BatchingMode batching = BatchingMode::kmeans;
  HeadMode mode = HeadMode::perceiver;
  std::size_t latents = 8;
  std::size_t head_dim = 0;   // 0: input dim of the head
  std::size_t embed_dim = 0;  // 0: text input dim
  bool evaluate_each_epoch = true;

  void validate() const {
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be >= 0");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!(temperature > 0)) throw ValidationError("temperature must be > 0");
  }

  HeadConfig head_config(std::size_t input_dim, std::size_t text_dim) const {
    HeadConfig c;
    c.mode = mode;
    c.input_dim = input_dim;
    c.latents = latents;
    c.head_dim = head_dim ? head_dim : input_dim;
    c.embed_dim = embed_dim ? embed_dim : text_dim;
    return c;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["epochs"] = epochs;
    j["learning_rate"] = learning_rate;
    j["batch_size"] = batch_size;
    j["clusters"] = clusters;
    j["kmeans_restarts"] = kmeans_restarts;
    j["temperature"] = temperature;
    j["temperature_learnable"] = temperature_learnable;
    j["seed"] = seed;
    j["batching"] = std::string(to_string(batching));
    j["mode"] = std::string(to_string(mode));
    j["latents"] = latents;
    j["head_dim"] = head_dim;
    j["embed_dim"] = embed_dim;
    return j;
  }
};

struct TrainReport {
  TrainConfig config;
  std::vector<double> epoch_loss;       // mean batch loss per epoch
  std::vector<double> val_top1;         // empty when there is no validation data
  std::vector<double> val_top3;
  std::vector<double> batch_diversity;  // mean within-batch pairwise distance of the epoch's plan
  std::uint64_t steps = 0;
  std::string checkpoint;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["config"] = config.to_json();
    j["steps"] = steps;
    j["epoch_loss"] = epoch_loss;
    j["val_top1"] = val_top1;
    j["val_top3"] = val_top3;
    j["batch_diversity"] = batch_diversity;
    j["checkpoint"] = checkpoint;
    return j;
  }
};

struct TrainResult {
  ContrastiveModel<double> model;
  TrainReport report;
};

namespace detail {

inline PairBatch<double> gather_batch(const std::vector<SegmentSample<double>>& samples, const Batch& b) {
  PairBatch<double> batch;
  for (std::size_t r : b.rows) {
    batch.images.push_back(samples[r].frames);
    batch.texts.push_back(samples[r].text);
  }
  return batch;
}

}  // namespace detail

inline ContrastiveModel<double> init_model_for(const std::vector<SegmentSample<double>>& samples,
                                              const TrainConfig& config) {
  if (samples.empty()) throw DomainError("no training samples");
  const auto img_dim = static_cast<std::size_t>(samples.front().frames.cols());
  const auto txt_dim = static_cast<std::size_t>(samples.front().text.cols());
  return init_model<double>(config.head_config(img_dim, txt_dim), config.head_config(txt_dim, txt_dim),
                            config.temperature, config.temperature_learnable, derive_seed(config.seed, 0));
}

// Builds the epoch's batch plan. The k-means model is fitted once since
// the encoder features never change; only the shuffles vary per epoch.
class BatchPlanner {
 public:
  BatchPlanner(const Matrix<double>& temporal, const TrainConfig& config) : features_(temporal), config_(config) {
    const auto n = static_cast<std::size_t>(temporal.rows());
    if (config.batching == BatchingMode::kmeans) {
      const std::size_t k = std::min(n, config.clusters ? config.clusters : config.batch_size);
      KMeansOptions opt;
      opt.restarts = std::max<std::size_t>(1, config.kmeans_restarts);
      kmeans_ = kmeans_fit<double>(temporal, k, derive_seed(config.seed, 1), opt);
    }
  }

  BatchPlan plan(std::size_t epoch) const {
    const std::uint64_t seed = derive_seed(config_.seed, 100 + epoch);
    const auto n = static_cast<std::size_t>(features_.rows());
    if (config_.batching == BatchingMode::kmeans)
      return build_diverse_batches(kmeans_, std::min(config_.batch_size, n), seed);
    return build_random_batches(n, config_.batch_size, seed);
  }

  const KMeansModel<double>& kmeans() const { return kmeans_; }

 private:
  const Matrix<double>& features_;
  TrainConfig config_;
  KMeansModel<double> kmeans_;
};

inline TrainResult train(const std::vector<SegmentSample<double>>& train_samples,
                         const std::vector<SegmentSample<double>>& val_samples, const TrainConfig& config) {
  config.validate();
  TrainResult result;
  result.model = init_model_for(train_samples, config);
  result.report.config = config;

  const Matrix<double> temporal = temporal_features(train_samples);
  const BatchPlanner planner(temporal, config);
  const bool trainable = result.model.parameter_count() > 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const BatchPlan plan = planner.plan(epoch);
    result.report.batch_diversity.push_back(plan_mean_pairwise_distance(temporal, plan));
    double loss_sum = 0;
    for (const Batch& b : plan.batches) {
      const PairBatch<double> batch = detail::gather_batch(train_samples, b);
      double loss = 0;
      if (trainable) {
        const Gradients<double> g = backward_gradients(result.model, batch);
        loss = g.loss;
        gradient_step(result.model, g.grad, config.learning_rate);
      } else {
        loss = batch_loss(result.model, batch);
      }
      if (!std::isfinite(loss))
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
      loss_sum += loss;
      ++result.report.steps;
    }
    result.report.epoch_loss.push_back(loss_sum / static_cast<double>(plan.batches.size()));
    if (!val_samples.empty() && (config.evaluate_each_epoch || epoch + 1 == config.epochs)) {
      const auto ev = evaluate_concept_retrieval(result.model, val_samples);
      result.report.val_top1.push_back(ev.result.top1);
      result.report.val_top3.push_back(ev.result.top3);
    }
  }
  return result;
}

}  // namespace semaug
