#pragma once

// Heads that turn a variable-length sequence of frozen encoder features
// (T x d) into one fixed-size, L2-normalized embedding:
//
//   perceiver       R learned latent queries cross-attend to the features
//                   in a single block, single head:
//                     Q = L Wq, K = X Wk, V = X Wv
//                     A = softmax_rows(Q K^T / sqrt(h)),  Z = A V
//                     y = normalize(Wo^T vec(Z))
//   learnable_pool  a = softmax(X w), y = normalize(P^T (a^T X))
//   frozen_mean     y = normalize(mean of rows); no parameters
//
// The *_trace / *_backward pairs implement reverse-mode derivatives used by
// the contrastive trainer.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semaug/error.hpp"
#include "semaug/linalg.hpp"

namespace semaug {

enum class HeadMode { perceiver, learnable_pool, frozen_mean };

inline std::string_view to_string(HeadMode mode) {
  switch (mode) {
    case HeadMode::perceiver: return "perceiver";
    case HeadMode::learnable_pool: return "learnable_pool";
    case HeadMode::frozen_mean: return "frozen_mean";
  }
  return "unknown";
}

inline HeadMode parse_head_mode(std::string_view name) {
  if (name == "perceiver") return HeadMode::perceiver;
  if (name == "learnable_pool") return HeadMode::learnable_pool;
  if (name == "frozen_mean") return HeadMode::frozen_mean;
  throw ValidationError("unknown head mode '" + std::string(name) + "'");
}

struct HeadConfig {
  std::size_t input_dim = 0;   // d
  std::size_t latents = 8;     // R
  std::size_t head_dim = 0;    // h
  std::size_t embed_dim = 0;   // e; frozen_mean always emits d
  HeadMode mode = HeadMode::perceiver;

  std::size_t output_dim() const { return mode == HeadMode::frozen_mean ? input_dim : embed_dim; }

  void validate() const {
    if (input_dim == 0) throw ValidationError("head input_dim must be >= 1");
    if (mode == HeadMode::perceiver && (latents == 0 || head_dim == 0))
      throw ValidationError("perceiver head needs latents >= 1 and head_dim >= 1");
    if (mode != HeadMode::frozen_mean && embed_dim == 0)
      throw ValidationError("head embed_dim must be >= 1");
  }

  bool operator==(const HeadConfig&) const = default;
};

template <class T>
struct HeadParams {
  HeadConfig config;
  // perceiver
  Matrix<T> latents;  // R x d
  Matrix<T> w_q;      // d x h
  Matrix<T> w_k;      // d x h
  Matrix<T> w_v;      // d x h
  Matrix<T> w_o;      // (R*h) x e
  // learnable_pool
  Matrix<T> score;    // d x 1
  Matrix<T> proj;     // d x e

  // Visits the blocks the configured mode uses, in declaration order.
  template <class F>
  void for_each_block(F&& f) {
    visit_blocks(*this, f);
  }
  template <class F>
  void for_each_block(F&& f) const {
    visit_blocks(*this, f);
  }

  HeadParams zeros_like() const {
    HeadParams out;
    out.config = config;
    for_each_block([&](std::string_view name, const Matrix<T>& m) {
      out.block(name) = Matrix<T>::Zero(m.rows(), m.cols());
    });
    return out;
  }

  Matrix<T>& block(std::string_view name) {
    if (name == "latents") return latents;
    if (name == "w_q") return w_q;
    if (name == "w_k") return w_k;
    if (name == "w_v") return w_v;
    if (name == "w_o") return w_o;
    if (name == "score") return score;
    if (name == "proj") return proj;
    throw ValidationError("unknown parameter block '" + std::string(name) + "'");
  }

 private:
  template <class Self, class F>
  static void visit_blocks(Self& self, F& f) {
    switch (self.config.mode) {
      case HeadMode::perceiver:
        f(std::string_view("latents"), self.latents);
        f(std::string_view("w_q"), self.w_q);
        f(std::string_view("w_k"), self.w_k);
        f(std::string_view("w_v"), self.w_v);
        f(std::string_view("w_o"), self.w_o);
        break;
      case HeadMode::learnable_pool:
        f(std::string_view("score"), self.score);
        f(std::string_view("proj"), self.proj);
        break;
      case HeadMode::frozen_mean:
        break;
    }
  }
};

// Expected block shapes for a config, in visiting order.
inline std::vector<std::pair<std::size_t, std::size_t>> block_shapes(const HeadConfig& c) {
  switch (c.mode) {
    case HeadMode::perceiver:
      return {{c.latents, c.input_dim},
              {c.input_dim, c.head_dim},
              {c.input_dim, c.head_dim},
              {c.input_dim, c.head_dim},
              {c.latents * c.head_dim, c.embed_dim}};
    case HeadMode::learnable_pool:
      return {{c.input_dim, 1}, {c.input_dim, c.embed_dim}};
    case HeadMode::frozen_mean:
      return {};
  }
  return {};
}

inline double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// Glorot-uniform draw for every block, fan_in = rows, fan_out = cols.
template <class T>
HeadParams<T> init_head(const HeadConfig& config, std::uint64_t seed) {
  config.validate();
  HeadParams<T> params;
  params.config = config;
  std::mt19937_64 rng(seed);
  const auto shapes = block_shapes(config);
  std::size_t i = 0;
  params.for_each_block([&](std::string_view, Matrix<T>& m) {
    const auto [rows, cols] = shapes[i++];
    const double s = glorot_limit(rows, cols);
    std::uniform_real_distribution<double> dist(-s, s);
    m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = static_cast<T>(dist(rng));
  });
  return params;
}

namespace detail {

template <class T>
void check_features(const Matrix<T>& features, std::size_t dim, const char* who) {
  if (features.rows() == 0) throw DomainError(std::string(who) + ": empty feature sequence (T=0)");
  if (static_cast<std::size_t>(features.cols()) != dim)
    throw DomainError(std::string(who) + ": feature dimension " + std::to_string(features.cols()) +
                      " does not match " + std::to_string(dim));
}

}  // namespace detail

// Intermediate values of one head forward pass.
template <class T>
struct HeadTrace {
  Vector<T> pre_norm;   // before L2 normalization
  Vector<T> output;     // normalized embedding
  T norm = 0;
  // perceiver
  Matrix<T> keys, values, attention, mixed;  // K, V, A, Z
  // learnable_pool
  Vector<T> weights, pooled;
};

template <class T>
Matrix<T> perceiver_queries(const HeadParams<T>& params) {
  return params.latents * params.w_q;
}

template <class T>
void finish_trace(HeadTrace<T>& trace) {
  trace.norm = trace.pre_norm.norm();
  trace.output = trace.pre_norm;
  if (trace.norm > 0) trace.output /= trace.norm;
}

// `queries` must equal perceiver_queries(params); callers embedding many
// sequences with the same params compute it once.
template <class T>
HeadTrace<T> perceiver_trace(const HeadParams<T>& params, const Matrix<T>& queries, const Matrix<T>& features) {
  const HeadConfig& c = params.config;
  detail::check_features(features, c.input_dim, "resampler_forward");
  HeadTrace<T> t;
  t.keys = features * params.w_k;
  t.values = features * params.w_v;
  const T scale = T(1) / std::sqrt(static_cast<T>(c.head_dim));
  t.attention = softmax_rows<T>((queries * t.keys.transpose()) * scale);
  t.mixed = t.attention * t.values;
  const Eigen::Map<const Vector<T>> flat(t.mixed.data(), t.mixed.size());
  t.pre_norm = params.w_o.transpose() * flat;
  finish_trace(t);
  return t;
}

template <class T>
Vector<T> resampler_forward(const HeadParams<T>& params, const Matrix<T>& features) {
  if (params.config.mode != HeadMode::perceiver) throw DomainError("resampler_forward needs a perceiver head");
  return perceiver_trace(params, perceiver_queries(params), features).output;
}

template <class T>
struct PooledEmbedding {
  Vector<T> value;
  bool zero_norm = false;  // mean was the zero vector; value left unnormalized
};

template <class T>
PooledEmbedding<T> mean_pool(const Matrix<T>& features) {
  if (features.rows() == 0) throw DomainError("mean_pool: empty feature sequence (T=0)");
  PooledEmbedding<T> out;
  out.value = features.colwise().mean().transpose();
  out.zero_norm = !normalize_in_place(out.value);
  return out;
}

template <class T>
HeadTrace<T> learnable_pool_trace(const Vector<T>& score, const Matrix<T>& proj, const Matrix<T>& features) {
  detail::check_features(features, static_cast<std::size_t>(score.size()), "learnable_pool_forward");
  if (proj.rows() != score.size())
    throw DomainError("learnable_pool_forward: projection has " + std::to_string(proj.rows()) +
                      " rows, expected " + std::to_string(score.size()));
  HeadTrace<T> t;
  Vector<T> logits = features * score;
  const T max = logits.maxCoeff();
  t.weights = (logits.array() - max).exp().matrix();
  t.weights /= t.weights.sum();
  t.pooled = features.transpose() * t.weights;
  t.pre_norm = proj.transpose() * t.pooled;
  finish_trace(t);
  return t;
}

template <class T>
Vector<T> learnable_pool_forward(const Vector<T>& score, const Matrix<T>& proj, const Matrix<T>& features) {
  return learnable_pool_trace(score, proj, features).output;
}

template <class T>
HeadTrace<T> head_trace(const HeadParams<T>& params, const Matrix<T>* queries, const Matrix<T>& features) {
  switch (params.config.mode) {
    case HeadMode::perceiver:
      return queries ? perceiver_trace(params, *queries, features)
                     : perceiver_trace(params, perceiver_queries(params), features);
    case HeadMode::learnable_pool: {
      const Eigen::Map<const Vector<T>> w(params.score.data(), params.score.size());
      return learnable_pool_trace<T>(Vector<T>(w), params.proj, features);
    }
    case HeadMode::frozen_mean: {
      detail::check_features(features, params.config.input_dim, "mean_pool");
      HeadTrace<T> t;
      t.pre_norm = features.colwise().mean().transpose();
      finish_trace(t);
      return t;
    }
  }
  throw DomainError("unknown head mode");
}

// Embedding for any head mode.
template <class T>
Vector<T> head_forward(const HeadParams<T>& params, const Matrix<T>& features) {
  return head_trace<T>(params, nullptr, features).output;
}

// Derivative of y = u/|u| pulled back to u.
template <class T>
Vector<T> normalize_backward(const HeadTrace<T>& trace, const Vector<T>& d_output) {
  if (!(trace.norm > 0)) throw NumericError("zero-norm embedding during backward pass");
  const T proj = trace.output.dot(d_output);
  return (d_output - trace.output * proj) / trace.norm;
}

// Accumulates parameter gradients for one sequence into `grads`. For the
// perceiver the query gradient is summed into `d_queries` (R x h); call
// finish_head_backward once per batch to push it into latents and Wq.
template <class T>
void head_backward(const HeadParams<T>& params, const Matrix<T>& queries, const Matrix<T>& features,
                   const HeadTrace<T>& trace, const Vector<T>& d_output, HeadParams<T>& grads,
                   Matrix<T>& d_queries) {
  const HeadConfig& c = params.config;
  if (c.mode == HeadMode::frozen_mean) return;
  const Vector<T> du = normalize_backward(trace, d_output);
  if (c.mode == HeadMode::learnable_pool) {
    grads.proj.noalias() += trace.pooled * du.transpose();
    const Vector<T> d_pooled = params.proj * du;
    const Vector<T> d_weights = features * d_pooled;
    const Vector<T> d_logits =
        trace.weights.cwiseProduct((d_weights.array() - trace.weights.dot(d_weights)).matrix());
    grads.score.noalias() += features.transpose() * d_logits;
    return;
  }
  const Eigen::Map<const Vector<T>> flat(trace.mixed.data(), trace.mixed.size());
  grads.w_o.noalias() += flat * du.transpose();
  const Vector<T> d_flat = params.w_o * du;
  const Eigen::Map<const Matrix<T>> d_mixed(d_flat.data(), trace.mixed.rows(), trace.mixed.cols());
  const Matrix<T> d_attn = d_mixed * trace.values.transpose();
  const Matrix<T> d_values = trace.attention.transpose() * d_mixed;
  Matrix<T> d_scores(d_attn.rows(), d_attn.cols());
  for (Eigen::Index r = 0; r < d_attn.rows(); ++r) {
    const T inner = trace.attention.row(r).dot(d_attn.row(r));
    d_scores.row(r) = trace.attention.row(r).cwiseProduct((d_attn.row(r).array() - inner).matrix());
  }
  const T scale = T(1) / std::sqrt(static_cast<T>(c.head_dim));
  d_scores *= scale;
  d_queries.noalias() += d_scores * trace.keys;
  const Matrix<T> d_keys = d_scores.transpose() * queries;
  grads.w_k.noalias() += features.transpose() * d_keys;
  grads.w_v.noalias() += features.transpose() * d_values;
}

template <class T>
void finish_head_backward(const HeadParams<T>& params, const Matrix<T>& d_queries, HeadParams<T>& grads) {
  if (params.config.mode != HeadMode::perceiver) return;
  grads.latents.noalias() += d_queries * params.w_q.transpose();
  grads.w_q.noalias() += params.latents.transpose() * d_queries;
}

}  // namespace semaug
