#pragma once

// Training-batch construction: cluster-diverse batches and the shuffled
// baseline, plus the within-batch diversity measure.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "semaug/error.hpp"
#include "semaug/kmeans.hpp"
#include "semaug/linalg.hpp"

namespace semaug {

struct Batch {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> clusters;  // originating cluster per row
};

struct BatchPlan {
  std::size_t batch_size = 0;
  std::vector<Batch> batches;

  std::size_t row_count() const {
    std::size_t n = 0;
    for (const auto& b : batches) n += b.rows.size();
    return n;
  }

  // One {"rows":[...],"clusters":[...]} object per line.
  std::string to_jsonl() const {
    std::string out;
    for (const auto& b : batches) {
      nlohmann::ordered_json j;
      j["rows"] = b.rows;
      j["clusters"] = b.clusters;
      out += j.dump() + "\n";
    }
    return out;
  }
};

namespace detail {

inline BatchPlan chunk_stream(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& clusters,
                              std::size_t batch_size) {
  BatchPlan plan;
  plan.batch_size = batch_size;
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::size_t end = std::min(rows.size(), start + batch_size);
    Batch b;
    b.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(start), rows.begin() + static_cast<std::ptrdiff_t>(end));
    b.clusters.assign(clusters.begin() + static_cast<std::ptrdiff_t>(start),
                      clusters.begin() + static_cast<std::ptrdiff_t>(end));
    plan.batches.push_back(std::move(b));
  }
  return plan;
}

}  // namespace detail

// Visits clusters largest-first (ties by id), taking one shuffled member per
// cluster per pass, and cuts the resulting stream into batches of B.
template <class T>
BatchPlan build_diverse_batches(const KMeansModel<T>& model, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw DomainError("batch size must be at least 1");
  if (model.assignments.size() < batch_size)
    throw DomainError("k-means model covers " + std::to_string(model.assignments.size()) +
                      " rows, fewer than batch size " + std::to_string(batch_size));
  auto members = model.members();
  std::mt19937_64 rng(seed);
  for (auto& m : members) std::shuffle(m.begin(), m.end(), rng);

  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return members[a].size() > members[b].size(); });

  std::vector<std::size_t> rows, clusters;
  rows.reserve(model.assignments.size());
  clusters.reserve(model.assignments.size());
  for (std::size_t pass = 0; rows.size() < model.assignments.size(); ++pass) {
    for (std::size_t c : order) {
      if (pass < members[c].size()) {
        rows.push_back(members[c][pass]);
        clusters.push_back(c);
      }
    }
  }
  return detail::chunk_stream(rows, clusters, batch_size);
}

// Seeded shuffle of all rows chunked into consecutive groups of B.
// Every row reports cluster 0.
inline BatchPlan build_random_batches(std::size_t row_count, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw DomainError("batch size must be at least 1");
  if (row_count == 0) throw DomainError("cannot batch zero rows");
  std::vector<std::size_t> rows(row_count);
  std::iota(rows.begin(), rows.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  return detail::chunk_stream(rows, std::vector<std::size_t>(row_count, 0), batch_size);
}

// Mean Euclidean distance over all unordered pairs of the listed rows.
template <class T>
T mean_pairwise_distance(const Matrix<T>& features, std::span<const std::size_t> rows) {
  if (rows.size() < 2) throw DomainError("mean_pairwise_distance needs at least 2 rows");
  T sum = 0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      sum += (features.row(static_cast<Eigen::Index>(rows[a])) - features.row(static_cast<Eigen::Index>(rows[b]))).norm();
      ++pairs;
    }
  return sum / static_cast<T>(pairs);
}

// Average of mean_pairwise_distance over batches with >= 2 rows.
template <class T>
T plan_mean_pairwise_distance(const Matrix<T>& features, const BatchPlan& plan) {
  T sum = 0;
  std::size_t count = 0;
  for (const auto& b : plan.batches) {
    if (b.rows.size() < 2) continue;
    sum += mean_pairwise_distance<T>(features, b.rows);
    ++count;
  }
  return count == 0 ? T(0) : sum / static_cast<T>(count);
}

}  // namespace semaug
