#pragma once

// Symmetric image/text contrastive objective over a batch of matched pairs
// and its exact reverse-mode gradient through both heads.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semaug/error.hpp"
#include "semaug/linalg.hpp"
#include "semaug/resampler.hpp"

namespace semaug {

template <class T>
Matrix<T> similarity_matrix(const Matrix<T>& image_embs, const Matrix<T>& text_embs, T temperature) {
  if (!(temperature > 0)) throw DomainError("temperature must be positive");
  if (image_embs.rows() != text_embs.rows() || image_embs.cols() != text_embs.cols())
    throw DomainError("similarity_matrix: image embeddings are " + std::to_string(image_embs.rows()) + "x" +
                      std::to_string(image_embs.cols()) + ", text embeddings are " +
                      std::to_string(text_embs.rows()) + "x" + std::to_string(text_embs.cols()));
  return (image_embs * text_embs.transpose()) / temperature;
}

template <class T>
struct LossWithGradient {
  T loss = 0;
  Matrix<T> d_logits;
};

// loss = 1/2 * (mean row cross-entropy + mean column cross-entropy), target
// of row/column i is entry (i, i).
template <class T>
LossWithGradient<T> clip_loss_with_gradient(const Matrix<T>& logits) {
  if (logits.rows() != logits.cols())
    throw DomainError("contrastive loss needs a square logit matrix, got " + std::to_string(logits.rows()) + "x" +
                      std::to_string(logits.cols()));
  require_finite(logits, "logits");
  const Eigen::Index b = logits.rows();
  LossWithGradient<T> out;
  out.d_logits = Matrix<T>::Zero(b, b);
  if (b == 0) return out;
  const T inv_b = T(1) / static_cast<T>(b);
  T row_ce = 0, col_ce = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const T rmax = logits.row(i).maxCoeff();
    const RowVector<T> re = (logits.row(i).array() - rmax).exp().matrix();
    const T rsum = re.sum();
    row_ce += rmax + std::log(rsum) - logits(i, i);
    out.d_logits.row(i) += (re / rsum) * (T(0.5) * inv_b);
    out.d_logits(i, i) -= T(0.5) * inv_b;

    const T cmax = logits.col(i).maxCoeff();
    const Vector<T> ce = (logits.col(i).array() - cmax).exp().matrix();
    const T csum = ce.sum();
    col_ce += cmax + std::log(csum) - logits(i, i);
    out.d_logits.col(i) += (ce / csum) * (T(0.5) * inv_b);
    out.d_logits(i, i) -= T(0.5) * inv_b;
  }
  out.loss = T(0.5) * (row_ce + col_ce) * inv_b;
  return out;
}

template <class T>
T clip_contrastive_loss(const Matrix<T>& logits) {
  return clip_loss_with_gradient(logits).loss;
}

// Image head, text head and the logit scale s = exp(log_scale) = 1/temperature.
template <class T>
struct ContrastiveModel {
  HeadParams<T> image;
  HeadParams<T> text;
  T log_scale = 0;
  bool scale_learnable = false;

  T temperature() const { return std::exp(-log_scale); }

  // Visits every trainable block as a flat span: "image.<block>",
  // "text.<block>", then "log_scale" when it is learnable.
  template <class F>
  void for_each_trainable(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each_trainable(F&& f) const {
    visit(*this, f);
  }

  ContrastiveModel zeros_like() const {
    ContrastiveModel g;
    g.image = image.zeros_like();
    g.text = text.zeros_like();
    g.log_scale = 0;
    g.scale_learnable = scale_learnable;
    return g;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for_each_trainable([&](std::string_view, auto values) { n += values.size(); });
    return n;
  }

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    using Elem = std::conditional_t<std::is_const_v<Self>, const T, T>;
    auto head = [&](auto& params, std::string_view prefix) {
      params.for_each_block([&](std::string_view name, auto& m) {
        f(std::string(prefix) + "." + std::string(name), std::span<Elem>(m.data(), static_cast<std::size_t>(m.size())));
      });
    };
    head(self.image, "image");
    head(self.text, "text");
    if (self.scale_learnable) f(std::string("log_scale"), std::span<Elem>(&self.log_scale, 1));
  }
};

inline constexpr double kDefaultTemperature = 0.07;

template <class T>
ContrastiveModel<T> init_model(const HeadConfig& image, const HeadConfig& text, double temperature,
                               bool temperature_learnable, std::uint64_t seed) {
  if (!(temperature > 0)) throw ValidationError("initial temperature must be positive");
  if (image.output_dim() != text.output_dim())
    throw ValidationError("image head emits " + std::to_string(image.output_dim()) + " dims, text head emits " +
                          std::to_string(text.output_dim()));
  ContrastiveModel<T> m;
  m.image = init_head<T>(image, seed);
  m.text = init_head<T>(text, seed ^ 0x9E3779B97F4A7C15ull);
  m.log_scale = static_cast<T>(std::log(1.0 / temperature));
  m.scale_learnable = temperature_learnable;
  return m;
}

// Matched (image sequence, text sequence) pairs; pair i is the positive for
// row/column i of the logit matrix.
template <class T>
struct PairBatch {
  std::vector<Matrix<T>> images;
  std::vector<Matrix<T>> texts;

  std::size_t size() const { return images.size(); }
};

template <class T>
struct BatchForward {
  Matrix<T> image_queries, text_queries;
  std::vector<HeadTrace<T>> image_traces, text_traces;
  Matrix<T> image_embs, text_embs, logits;
};

template <class T>
Matrix<T> embed_all(const HeadParams<T>& head, const Matrix<T>& queries, std::span<const Matrix<T>> inputs,
                    std::vector<HeadTrace<T>>* traces) {
  Matrix<T> out(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(head.config.output_dim()));
  const Matrix<T>* q = head.config.mode == HeadMode::perceiver ? &queries : nullptr;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    HeadTrace<T> t = head_trace<T>(head, q, inputs[i]);
    out.row(static_cast<Eigen::Index>(i)) = t.output.transpose();
    if (traces) traces->push_back(std::move(t));
  }
  return out;
}

template <class T>
BatchForward<T> forward_batch(const ContrastiveModel<T>& model, const PairBatch<T>& batch) {
  if (batch.images.size() != batch.texts.size())
    throw DomainError("batch has " + std::to_string(batch.images.size()) + " image inputs and " +
                      std::to_string(batch.texts.size()) + " text inputs");
  BatchForward<T> f;
  if (model.image.config.mode == HeadMode::perceiver) f.image_queries = perceiver_queries(model.image);
  if (model.text.config.mode == HeadMode::perceiver) f.text_queries = perceiver_queries(model.text);
  f.image_embs = embed_all<T>(model.image, f.image_queries, batch.images, &f.image_traces);
  f.text_embs = embed_all<T>(model.text, f.text_queries, batch.texts, &f.text_traces);
  require_finite(f.image_embs, "image embeddings");
  require_finite(f.text_embs, "text embeddings");
  f.logits = similarity_matrix<T>(f.image_embs, f.text_embs, model.temperature());
  return f;
}

template <class T>
T batch_loss(const ContrastiveModel<T>& model, const PairBatch<T>& batch) {
  return clip_contrastive_loss(forward_batch(model, batch).logits);
}

template <class T>
struct Gradients {
  T loss = 0;
  ContrastiveModel<T> grad;  // same shapes as the model
};

// Exact gradient of the batch loss w.r.t. every trainable parameter.
template <class T>
Gradients<T> backward_gradients(const ContrastiveModel<T>& model, const PairBatch<T>& batch) {
  const BatchForward<T> f = forward_batch(model, batch);
  const LossWithGradient<T> lg = clip_loss_with_gradient(f.logits);
  if (!std::isfinite(static_cast<double>(lg.loss))) throw NumericError("non-finite value in loss");

  Gradients<T> out;
  out.loss = lg.loss;
  out.grad = model.zeros_like();
  const T scale = std::exp(model.log_scale);
  // logits = scale * I T^T
  const Matrix<T> d_image = scale * (lg.d_logits * f.text_embs);
  const Matrix<T> d_text = scale * (lg.d_logits.transpose() * f.image_embs);
  if (model.scale_learnable) out.grad.log_scale = (lg.d_logits.array() * f.logits.array()).sum();

  auto run_head = [&](const HeadParams<T>& head, const Matrix<T>& queries, const std::vector<Matrix<T>>& inputs,
                      const std::vector<HeadTrace<T>>& traces, const Matrix<T>& d_emb, HeadParams<T>& grads,
                      const char* name) {
    if (head.config.mode == HeadMode::frozen_mean) return;
    Matrix<T> d_queries;
    if (head.config.mode == HeadMode::perceiver) d_queries = Matrix<T>::Zero(queries.rows(), queries.cols());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const Vector<T> dy = d_emb.row(static_cast<Eigen::Index>(i)).transpose();
      head_backward<T>(head, queries, inputs[i], traces[i], dy, grads, d_queries);
    }
    finish_head_backward<T>(head, d_queries, grads);
    grads.for_each_block([&](std::string_view block, const Matrix<T>& g) {
      require_finite(g, std::string(name) + "." + std::string(block) + " gradient");
    });
  };
  run_head(model.image, f.image_queries, batch.images, f.image_traces, d_image, out.grad.image, "image");
  run_head(model.text, f.text_queries, batch.texts, f.text_traces, d_text, out.grad.text, "text");
  return out;
}

// theta <- theta - lr * grad for every trainable block.
template <class T>
void gradient_step(ContrastiveModel<T>& model, const ContrastiveModel<T>& grad, T learning_rate) {
  std::vector<std::span<const T>> g;
  grad.for_each_trainable([&](const std::string&, std::span<const T> values) { g.push_back(values); });
  std::size_t i = 0;
  model.for_each_trainable([&](const std::string&, std::span<T> values) {
    const auto& gv = g.at(i++);
    for (std::size_t j = 0; j < values.size(); ++j) values[j] -= learning_rate * gv[j];
  });
}

}  // namespace semaug
