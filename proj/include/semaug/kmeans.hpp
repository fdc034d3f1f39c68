#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "semaug/error.hpp"
#include "semaug/linalg.hpp"

namespace semaug {

template <class T>
struct KMeansModel {
  std::size_t k = 0;
  Matrix<T> centroids;                 // k x D
  std::vector<std::size_t> assignments;  // one cluster id per row
  T inertia = 0;                       // sum of squared distances to assigned centroid
  std::vector<T> inertia_history;      // inertia after every assignment step
  std::size_t iterations = 0;

  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(i);
    return out;
  }
};

struct KMeansOptions {
  std::size_t max_iters = 100;
  double tol = 1e-6;
  // Independent seeded runs; the one with the lowest final inertia wins.
  // Run 0 uses `seed` itself.
  std::size_t restarts = 1;
};

namespace detail {

template <class T>
T assign_points(const Matrix<T>& x, const Matrix<T>& centroids, std::vector<std::size_t>& assignments,
                std::vector<T>& dist2) {
  T total = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    T best = std::numeric_limits<T>::infinity();
    std::size_t arg = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const T d = (x.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<std::size_t>(c);
      }
    }
    assignments[static_cast<std::size_t>(i)] = arg;
    dist2[static_cast<std::size_t>(i)] = best;
    total += best;
  }
  return total;
}

// k-means++ seeding: first center uniform, then D^2-weighted draws.
template <class T>
Matrix<T> kmeanspp_init(const Matrix<T>& x, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  Matrix<T> centers(static_cast<Eigen::Index>(k), x.cols());
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  centers.row(0) = x.row(static_cast<Eigen::Index>(pick));
  chosen[pick] = true;

  std::vector<T> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (x.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : static_cast<double>(d2[i]);
    pick = n;
    if (total > 0) {
      const double target = unit(rng) * total;
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] <= 0) continue;
        acc += static_cast<double>(d2[i]);
        pick = i;
        if (acc > target) break;
      }
    }
    if (pick == n) {
      // Every remaining point coincides with a center.
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
    chosen[pick] = true;
    centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (x.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm());
  }
  return centers;
}

template <class T>
KMeansModel<T> lloyd(const Matrix<T>& features, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(features.rows());
  std::mt19937_64 rng(seed);
  KMeansModel<T> model;
  model.k = k;
  model.centroids = detail::kmeanspp_init(features, k, rng);
  model.assignments.assign(n, 0);
  std::vector<T> dist2(n);

  for (std::size_t it = 0; it < options.max_iters; ++it) {
    model.inertia = detail::assign_points(features, model.centroids, model.assignments, dist2);
    model.inertia_history.push_back(model.inertia);

    Matrix<T> next = Matrix<T>::Zero(static_cast<Eigen::Index>(k), features.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      next.row(static_cast<Eigen::Index>(model.assignments[i])) += features.row(static_cast<Eigen::Index>(i));
      ++counts[model.assignments[i]];
    }
    std::vector<bool> used(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        next.row(static_cast<Eigen::Index>(c)) /= static_cast<T>(counts[c]);
        continue;
      }
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
        if (!used[i] && (far == n || dist2[i] > dist2[far])) far = i;
      used[far] = true;
      next.row(static_cast<Eigen::Index>(c)) = features.row(static_cast<Eigen::Index>(far));
    }

    T shift = 0;
    for (std::size_t c = 0; c < k; ++c)
      shift = std::max(shift, (next.row(static_cast<Eigen::Index>(c)) - model.centroids.row(static_cast<Eigen::Index>(c))).norm());
    model.centroids = std::move(next);
    ++model.iterations;
    if (shift < static_cast<T>(options.tol)) break;
  }
  model.inertia = detail::assign_points(features, model.centroids, model.assignments, dist2);
  model.inertia_history.push_back(model.inertia);
  return model;
}

}  // namespace detail

// Lloyd's algorithm from a seeded k-means++ start. Stops once the largest
// centroid move is below `tol` or after `max_iters` updates. A cluster that
// goes empty is re-seeded at the point farthest from its assigned centroid.
template <class T>
KMeansModel<T> kmeans_fit(const Matrix<T>& features, std::size_t k, std::uint64_t seed,
                          KMeansOptions options = {}) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (k == 0) throw DomainError("kmeans_fit needs k >= 1");
  if (k > n)
    throw DomainError("kmeans_fit: k=" + std::to_string(k) + " exceeds row count " + std::to_string(n));
  require_finite(features, "k-means features");
  KMeansModel<T> best = detail::lloyd(features, k, seed, options);
  for (std::size_t r = 1; r < options.restarts; ++r) {
    KMeansModel<T> m = detail::lloyd(features, k, seed + 0x9E3779B97F4A7C15ull * r, options);
    if (m.inertia < best.inertia) best = std::move(m);
  }
  return best;
}

}  // namespace semaug
