#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "semaug/batching.hpp"

using namespace semaug;

namespace {

KMeansModel<double> model_from(const std::vector<std::size_t>& assignments, std::size_t k) {
  KMeansModel<double> m;
  m.k = k;
  m.assignments = assignments;
  return m;
}

void expect_permutation(const BatchPlan& plan, std::size_t n) {
  std::vector<std::size_t> all;
  for (const auto& b : plan.batches) {
    all.insert(all.end(), b.rows.begin(), b.rows.end());
    EXPECT_EQ(b.rows.size(), b.clusters.size());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> want(n);
  std::iota(want.begin(), want.end(), 0);
  EXPECT_EQ(all, want);
  for (std::size_t i = 0; i + 1 < plan.batches.size(); ++i) EXPECT_EQ(plan.batches[i].rows.size(), plan.batch_size);
}

double brute_mean_distance(const Matrix<double>& x, const std::vector<std::size_t>& rows) {
  double sum = 0;
  int pairs = 0;
  for (std::size_t a : rows)
    for (std::size_t b : rows)
      if (a < b) {
        double s = 0;
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
          const double d = x(static_cast<Eigen::Index>(a), c) - x(static_cast<Eigen::Index>(b), c);
          s += d * d;
        }
        sum += std::sqrt(s);
        ++pairs;
      }
  return sum / pairs;
}

}  // namespace

TEST(DiverseBatches, KEqualsBatchSizeGivesDistinctClusters) {
  std::vector<std::size_t> assign;
  for (std::size_t i = 0; i < 40; ++i) assign.push_back(i % 4);
  const auto plan = build_diverse_batches(model_from(assign, 4), 4, 3);
  expect_permutation(plan, 40);
  for (const auto& b : plan.batches) {
    EXPECT_EQ(std::set<std::size_t>(b.clusters.begin(), b.clusters.end()).size(), 4u);
    for (std::size_t i = 0; i < b.rows.size(); ++i) EXPECT_EQ(assign[b.rows[i]], b.clusters[i]);
  }
}

TEST(DiverseBatches, SingleClusterMatchesRandomBatching) {
  const auto diverse = build_diverse_batches(model_from(std::vector<std::size_t>(17, 0), 1), 5, 42);
  const auto random = build_random_batches(17, 5, 42);
  ASSERT_EQ(diverse.batches.size(), random.batches.size());
  for (std::size_t i = 0; i < diverse.batches.size(); ++i) EXPECT_EQ(diverse.batches[i].rows, random.batches[i].rows);
}

TEST(DiverseBatches, TwoClustersOfFour) {
  const std::vector<std::size_t> assign{0, 1, 0, 1, 1, 0, 0, 1};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto plan = build_diverse_batches(model_from(assign, 2), 2, seed);
    ASSERT_EQ(plan.batches.size(), 4u);
    for (const auto& b : plan.batches) {
      ASSERT_EQ(b.rows.size(), 2u);
      EXPECT_NE(assign[b.rows[0]], assign[b.rows[1]]);
    }
  }
}

TEST(DiverseBatches, DistinctClustersWhileAvailable) {
  // Cluster sizes 6, 3, 1: the first pass covers three clusters, later
  // passes fewer.
  const std::vector<std::size_t> assign{0, 0, 0, 0, 0, 0, 1, 1, 1, 2};
  const auto plan = build_diverse_batches(model_from(assign, 3), 3, 1);
  expect_permutation(plan, 10);
  EXPECT_EQ(plan.batches[0].clusters, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(std::set<std::size_t>(plan.batches[1].clusters.begin(), plan.batches[1].clusters.end()).size(), 2u);
}

TEST(DiverseBatches, LargestClusterFirst) {
  const std::vector<std::size_t> assign{0, 1, 1, 1, 2, 2};
  const auto plan = build_diverse_batches(model_from(assign, 3), 6, 0);
  EXPECT_EQ(plan.batches[0].clusters, (std::vector<std::size_t>{1, 2, 0, 1, 2, 1}));
}

TEST(RandomBatches, OneFullBatch) {
  const auto plan = build_random_batches(4, 4, 0);
  ASSERT_EQ(plan.batches.size(), 1u);
  expect_permutation(plan, 4);
}

TEST(RandomBatches, Deterministic) {
  const auto a = build_random_batches(30, 4, 9), b = build_random_batches(30, 4, 9);
  EXPECT_EQ(a.to_jsonl(), b.to_jsonl());
  EXPECT_NE(a.to_jsonl(), build_random_batches(30, 4, 10).to_jsonl());
}

TEST(RandomBatches, ChunkSizes) {
  const auto plan = build_random_batches(10, 3, 5);
  std::vector<std::size_t> sizes;
  for (const auto& b : plan.batches) sizes.push_back(b.rows.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 3, 1}));
  expect_permutation(plan, 10);
}

TEST(BatchPlan, JsonLinesFormat) {
  const auto plan = build_random_batches(3, 2, 0);
  const auto text = plan.to_jsonl();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
  EXPECT_EQ(first.at("rows").size(), 2u);
  EXPECT_EQ(first.at("clusters"), nlohmann::json::array({0, 0}));
}

TEST(PairwiseDistance, Examples) {
  Matrix<double> x(3, 2);
  x << 0, 0, 3, 4, 0, 0;
  const std::vector<std::size_t> same{0, 2}, tri{0, 1}, three{0, 1, 2};
  EXPECT_EQ(mean_pairwise_distance<double>(x, same), 0.0);
  EXPECT_DOUBLE_EQ(mean_pairwise_distance<double>(x, tri), 5.0);
  EXPECT_DOUBLE_EQ(mean_pairwise_distance<double>(x, three), 10.0 / 3.0);
  const std::vector<std::size_t> one{1};
  EXPECT_THROW(mean_pairwise_distance<double>(x, one), DomainError);
}

TEST(PairwiseDistance, MatchesEnumeration) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix<double> x(20, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  for (std::size_t n = 2; n < 10; ++n) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back((i * 7) % 20);
    EXPECT_NEAR(mean_pairwise_distance<double>(x, rows), brute_mean_distance(x, rows), 1e-12);
  }
}

TEST(DiverseBatches, MoreDiverseThanRandomOnClusteredData) {
  double diverse = 0, random = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 0.2);
    Matrix<double> x(80, 2);
    for (Eigen::Index i = 0; i < 80; ++i) {
      x(i, 0) = 10.0 * static_cast<double>(i % 4) + g(rng);
      x(i, 1) = g(rng);
    }
    const auto km = kmeans_fit(x, 4, seed, {100, 1e-6, 5});
    diverse += plan_mean_pairwise_distance(x, build_diverse_batches(km, 4, seed));
    random += plan_mean_pairwise_distance(x, build_random_batches(80, 4, seed));
  }
  EXPECT_GT(diverse, random);
}

TEST(Batching, Errors) {
  EXPECT_THROW(build_random_batches(5, 0, 0), DomainError);
  EXPECT_THROW(build_random_batches(0, 2, 0), DomainError);
  EXPECT_THROW(build_diverse_batches(model_from({0, 0}, 1), 3, 0), DomainError);
}
