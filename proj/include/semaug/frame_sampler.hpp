#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "semaug/error.hpp"
#include "semaug/linalg.hpp"

namespace semaug {

// Three consecutive 0-based frame indices in temporal order.
struct FrameTriple {
  std::array<std::size_t, 3> indices{};

  bool operator==(const FrameTriple&) const = default;
};

// (m-1, m, m+1) with m = floor(N/2), shifted down to (N-3, N-2, N-1) if m+1
// would fall off the end.
inline FrameTriple middle_frame_indices(std::size_t frame_count) {
  if (frame_count < 3)
    throw DomainError("middle_frame_indices needs at least 3 frames, got " +
                      std::to_string(frame_count));
  std::size_t m = frame_count / 2;
  if (m + 1 >= frame_count) m = frame_count - 2;
  return FrameTriple{{m - 1, m, m + 1}};
}

// Baseline: k indices spread evenly over [0, N-1], each j*(N-1)/(k-1)
// rounded half to even (exact integer arithmetic).
inline std::vector<std::size_t> uniform_sample_indices(std::size_t frame_count, std::size_t k) {
  if (k == 0) throw DomainError("uniform_sample_indices needs k >= 1");
  if (k > frame_count)
    throw DomainError("cannot sample " + std::to_string(k) + " frames from " +
                      std::to_string(frame_count));
  if (k == 1) return {frame_count / 2};
  std::vector<std::size_t> out;
  out.reserve(k);
  const std::size_t den = k - 1;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t num = j * (frame_count - 1);
    std::size_t idx = num / den;
    const std::size_t twice_rem = 2 * (num % den);
    if (twice_rem > den || (twice_rem == den && idx % 2 == 1)) ++idx;
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

// Concatenates equal-length frame features in the given order.
template <class T>
Vector<T> temporal_concat(std::span<const Vector<T>> frames) {
  if (frames.empty()) throw DomainError("temporal_concat needs at least one frame");
  const auto d = frames.front().size();
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i].size() != d)
      throw DomainError("temporal_concat: frame " + std::to_string(i) + " has dimension " +
                        std::to_string(frames[i].size()) + ", expected " + std::to_string(d));
  Vector<T> out(d * static_cast<Eigen::Index>(frames.size()));
  for (std::size_t i = 0; i < frames.size(); ++i)
    out.segment(static_cast<Eigen::Index>(i) * d, d) = frames[i];
  return out;
}

template <class T>
Vector<T> temporal_concat(const Vector<T>& a, const Vector<T>& b, const Vector<T>& c) {
  const std::array<Vector<T>, 3> frames{a, b, c};
  return temporal_concat<T>(std::span<const Vector<T>>(frames));
}

// Flattens a T x d frame matrix row by row into one temporal feature.
template <class T>
Vector<T> temporal_concat(const Matrix<T>& frames) {
  return Eigen::Map<const Vector<T>>(frames.data(), frames.size());
}

}  // namespace semaug
