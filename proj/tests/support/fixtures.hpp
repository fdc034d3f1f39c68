#pragma once

#include <random>

#include "semaug/contrastive.hpp"
#include "semaug/synth.hpp"

namespace testing_support {

inline semaug::Matrix<double> gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  semaug::Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// B pairs; image sequences of length image_t, text sequences of length text_t.
inline semaug::PairBatch<double> tiny_batch(std::uint64_t seed, std::size_t b, Eigen::Index d, Eigen::Index image_t,
                                            Eigen::Index text_t) {
  std::mt19937_64 rng(seed);
  semaug::PairBatch<double> batch;
  for (std::size_t i = 0; i < b; ++i) {
    batch.images.push_back(gaussian(image_t, d, rng));
    batch.texts.push_back(gaussian(text_t, d, rng));
  }
  return batch;
}

inline semaug::ContrastiveModel<double> tiny_model(std::uint64_t seed, semaug::HeadMode mode, bool learnable_scale,
                                                   std::size_t d = 4, std::size_t r = 2, std::size_t h = 3,
                                                   std::size_t e = 4) {
  const semaug::HeadConfig cfg{d, r, h, e, mode};
  return semaug::init_model<double>(cfg, cfg, 0.5, learnable_scale, seed);
}

}  // namespace testing_support
