#pragma once

// Central finite-difference check of the analytic contrastive gradients.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "semaug/contrastive.hpp"

namespace semaug {

struct GradCheckOptions {
  double epsilon = 1e-4;
  double tolerance = 1e-4;
  std::size_t coords_per_block = 50;  // every coordinate when the block is smaller
  std::uint64_t seed = 0;
  // Denominator floor for the relative error, so coordinates whose true
  // gradient is ~0 are judged on absolute error.
  double abs_floor = 1e-7;
};

struct BlockCheck {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0;
  std::size_t worst_index = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<BlockCheck> blocks;
  std::vector<std::string> warnings;

  bool passed() const {
    return std::all_of(blocks.begin(), blocks.end(), [](const BlockCheck& b) { return b.passed; });
  }
  double max_rel_error() const {
    double m = 0;
    for (const auto& b : blocks) m = std::max(m, b.max_rel_error);
    return m;
  }
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Compares `analytic` against central differences of the batch loss on a
// seeded subset of coordinates of each trainable block.
inline GradCheckReport check_gradients(const ContrastiveModel<double>& model, const PairBatch<double>& batch,
                                       const ContrastiveModel<double>& analytic, const GradCheckOptions& opt) {
  GradCheckReport report;
  if (opt.epsilon > 1e-3)
    report.warnings.push_back("epsilon " + std::to_string(opt.epsilon) +
                              " is large; O(epsilon^2) truncation error will dominate the comparison");

  std::vector<std::pair<std::string, std::span<const double>>> expected;
  analytic.for_each_trainable(
      [&](const std::string& name, std::span<const double> values) { expected.emplace_back(name, values); });

  ContrastiveModel<double> probe = model;
  std::vector<std::pair<std::string, std::span<double>>> blocks;
  probe.for_each_trainable([&](const std::string& name, std::span<double> values) { blocks.emplace_back(name, values); });
  if (blocks.size() != expected.size()) throw DomainError("gradient and model block lists differ");

  std::mt19937_64 rng(opt.seed);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& [name, values] = blocks[b];
    BlockCheck check;
    check.name = name;
    std::vector<std::size_t> coords(values.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (coords.size() > opt.coords_per_block) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opt.coords_per_block);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t c : coords) {
      const double saved = values[c];
      values[c] = saved + opt.epsilon;
      const double up = batch_loss(probe, batch);
      values[c] = saved - opt.epsilon;
      const double down = batch_loss(probe, batch);
      values[c] = saved;
      const double numeric = (up - down) / (2 * opt.epsilon);
      const double err = relative_error(expected[b].second[c], numeric, opt.abs_floor);
      if (err > check.max_rel_error || check.checked == 0) {
        check.max_rel_error = std::max(check.max_rel_error, err);
        if (err >= check.max_rel_error) check.worst_index = c;
      }
      ++check.checked;
    }
    check.passed = check.max_rel_error <= opt.tolerance;
    report.blocks.push_back(std::move(check));
  }
  return report;
}

inline GradCheckReport finite_difference_check(const ContrastiveModel<double>& model, const PairBatch<double>& batch,
                                               const GradCheckOptions& opt = {}) {
  return check_gradients(model, batch, backward_gradients(model, batch).grad, opt);
}

}  // namespace semaug
