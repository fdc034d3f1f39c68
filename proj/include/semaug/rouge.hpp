#pragma once

// ROUGE-1/2/L over lowercase alphanumeric tokens.
//
// Tokenizer: ASCII letters are lowercased; any maximal run of ASCII
// characters that are not letters or digits separates tokens. Bytes >= 0x80
// are kept inside tokens, so UTF-8 words in other scripts stay whole.

#include <algorithm>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "semaug/error.hpp"

namespace semaug {

enum class RougeVariant { R1, R2, RL };

inline std::string_view to_string(RougeVariant v) {
  switch (v) {
    case RougeVariant::R1: return "R1";
    case RougeVariant::R2: return "R2";
    case RougeVariant::RL: return "RL";
  }
  return "?";
}

struct RougeScore {
  RougeVariant variant = RougeVariant::R1;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

inline double f_measure(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

inline RougeScore make_score(RougeVariant v, double overlap, double pred_total, double ref_total) {
  RougeScore s;
  s.variant = v;
  s.precision = pred_total > 0 ? overlap / pred_total : 0.0;
  s.recall = ref_total > 0 ? overlap / ref_total : 0.0;
  s.f1 = f_measure(s.precision, s.recall);
  return s;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word = c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (word) {
      cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

namespace detail {

inline std::map<std::vector<std::string_view>, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                                        std::size_t n) {
  std::map<std::vector<std::string_view>, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string_view>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                           tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

// Clipped n-gram overlap: sum over n-grams of min(pred count, ref count).
inline RougeScore rouge_n(std::string_view prediction, std::string_view reference, std::size_t n) {
  if (n == 0) throw DomainError("rouge_n needs n >= 1");
  const auto pred = tokenize(prediction);
  const auto ref = tokenize(reference);
  const auto pc = detail::ngram_counts(pred, n);
  const auto rc = detail::ngram_counts(ref, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : pc) {
    auto it = rc.find(gram);
    if (it != rc.end()) overlap += std::min(count, it->second);
  }
  const double pred_total = pred.size() >= n ? static_cast<double>(pred.size() - n + 1) : 0.0;
  const double ref_total = ref.size() >= n ? static_cast<double>(ref.size() - n + 1) : 0.0;
  const auto variant = n == 1 ? RougeVariant::R1 : RougeVariant::R2;
  return make_score(variant, static_cast<double>(overlap), pred_total, ref_total);
}

inline RougeScore rouge_l(std::string_view prediction, std::string_view reference) {
  const auto pred = tokenize(prediction);
  const auto ref = tokenize(reference);
  const auto l = detail::lcs_length(pred, ref);
  return make_score(RougeVariant::RL, static_cast<double>(l), static_cast<double>(pred.size()),
                    static_cast<double>(ref.size()));
}

struct CorpusRouge {
  RougeScore r1{RougeVariant::R1};
  RougeScore r2{RougeVariant::R2};
  RougeScore rl{RougeVariant::RL};
  std::size_t pairs = 0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    for (const RougeScore* s : {&r1, &r2, &rl})
      j[std::string(to_string(s->variant))] = {{"p", s->precision}, {"r", s->recall}, {"f", s->f1}};
    j["pairs"] = pairs;
    return j;
  }
};

struct SummaryPair {
  std::string prediction;
  std::string reference;
};

// Macro average of per-pair precision, recall and F1 for each variant.
inline CorpusRouge score_summary_corpus(std::span<const SummaryPair> pairs) {
  if (pairs.empty()) throw DomainError("score_summary_corpus needs at least one pair");
  CorpusRouge out;
  out.pairs = pairs.size();
  auto add = [](RougeScore& acc, const RougeScore& s) {
    acc.precision += s.precision;
    acc.recall += s.recall;
    acc.f1 += s.f1;
  };
  for (const auto& p : pairs) {
    add(out.r1, rouge_n(p.prediction, p.reference, 1));
    add(out.r2, rouge_n(p.prediction, p.reference, 2));
    add(out.rl, rouge_l(p.prediction, p.reference));
  }
  const auto n = static_cast<double>(pairs.size());
  for (RougeScore* s : {&out.r1, &out.r2, &out.rl}) {
    s->precision /= n;
    s->recall /= n;
    s->f1 /= n;
  }
  return out;
}

// Two-decimal P/R/F table in the usual summarization-results layout.
inline std::string format_rouge_table(const std::vector<std::pair<std::string, CorpusRouge>>& rows) {
  std::size_t width = 5;
  for (const auto& [label, _] : rows) width = std::max(width, label.size());
  auto cell = [](const RougeScore& s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f/%.2f/%.2f", s.precision, s.recall, s.f1);
    return std::string(buf);
  };
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::string out = pad("Model", width) + " | " + pad("R-1 (P/R/F)", 14) + " | " + pad("R-2 (P/R/F)", 14) +
                    " | R-L (P/R/F)\n";
  out += std::string(width, '-') + "-+-" + std::string(14, '-') + "-+-" + std::string(14, '-') + "-+-" +
         std::string(14, '-') + "\n";
  for (const auto& [label, s] : rows)
    out += pad(label, width) + " | " + pad(cell(s.r1), 14) + " | " + pad(cell(s.r2), 14) + " | " + cell(s.rl) + "\n";
  return out;
}

}  // namespace semaug
