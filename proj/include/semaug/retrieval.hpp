#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "semaug/error.hpp"
#include "semaug/linalg.hpp"

namespace semaug {

struct RetrievalResult {
  double top1 = 0;
  double top3 = 0;
  std::size_t k = 1;
  double topk = 0;  // accuracy at the requested k
  std::size_t query_count = 0;
  std::size_t candidate_count = 0;
  // Best candidates per query, most similar first (up to max(k, 3)).
  std::vector<std::vector<std::size_t>> ranked;
};

// Candidate order for one query: descending dot product, ties to the lower
// candidate index.
template <class T>
std::vector<std::size_t> rank_candidates(const Vector<T>& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

// Rows of both matrices are expected to be L2-normalized so the dot
// product is the cosine similarity.
template <class T>
RetrievalResult topk_retrieval_accuracy(const Matrix<T>& queries, const Matrix<T>& candidates,
                                        std::span<const std::size_t> truth, std::size_t k) {
  const auto m = static_cast<std::size_t>(candidates.rows());
  if (k == 0) throw DomainError("top-k needs k >= 1");
  if (k > m)
    throw DomainError("top-k: k=" + std::to_string(k) + " exceeds candidate count " + std::to_string(m));
  if (truth.size() != static_cast<std::size_t>(queries.rows()))
    throw DomainError("top-k: one truth index per query required");
  if (queries.rows() > 0 && queries.cols() != candidates.cols())
    throw DomainError("top-k: query and candidate dimensions differ");
  for (std::size_t t : truth)
    if (t >= m) throw DomainError("top-k: truth index " + std::to_string(t) + " out of range");

  RetrievalResult result;
  result.k = k;
  result.query_count = truth.size();
  result.candidate_count = m;
  const std::size_t keep = std::min(m, std::max<std::size_t>(k, 3));
  std::size_t hit1 = 0, hit3 = 0, hitk = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Vector<T> scores = candidates * queries.row(static_cast<Eigen::Index>(i)).transpose();
    auto order = rank_candidates<T>(scores);
    const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), truth[i]) - order.begin());
    hit1 += pos < 1;
    hit3 += pos < 3;
    hitk += pos < k;
    order.resize(keep);
    result.ranked.push_back(std::move(order));
  }
  if (!truth.empty()) {
    const auto n = static_cast<double>(truth.size());
    result.top1 = static_cast<double>(hit1) / n;
    result.top3 = static_cast<double>(hit3) / n;
    result.topk = static_cast<double>(hitk) / n;
  }
  return result;
}

}  // namespace semaug
