#pragma once

// Independent reference implementations used to check the library. They
// favour obviousness over speed and share no code with include/semaug.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Lowercase ASCII; anything that is not an ASCII letter or digit separates
// tokens, except bytes >= 0x80, which are kept as word characters.
inline std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const unsigned char u = static_cast<unsigned char>(ch);
    const bool word = (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9') || u >= 0x80;
    if (word) {
      cur.push_back(u >= 'A' && u <= 'Z' ? static_cast<char>(u - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<std::string> ngrams(const std::vector<std::string>& toks, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string g;
    for (std::size_t j = 0; j < n; ++j) g += toks[i + j] + '\x1f';
    out.push_back(g);
  }
  return out;
}

struct Prf {
  double p = 0, r = 0, f = 0;
};

inline Prf prf(double overlap, double pred_total, double ref_total) {
  Prf s;
  s.p = pred_total > 0 ? overlap / pred_total : 0;
  s.r = ref_total > 0 ? overlap / ref_total : 0;
  s.f = s.p + s.r > 0 ? 2 * s.p * s.r / (s.p + s.r) : 0;
  return s;
}

// Clipped overlap by greedy one-to-one matching of n-gram occurrences.
inline Prf rouge_n(const std::string& pred, const std::string& ref, std::size_t n) {
  const auto pg = ngrams(words(pred), n);
  const auto rg = ngrams(words(ref), n);
  std::vector<bool> used(rg.size(), false);
  std::size_t overlap = 0;
  for (const auto& g : pg)
    for (std::size_t j = 0; j < rg.size(); ++j)
      if (!used[j] && rg[j] == g) {
        used[j] = true;
        ++overlap;
        break;
      }
  return prf(static_cast<double>(overlap), static_cast<double>(pg.size()), static_cast<double>(rg.size()));
}

// Memoized top-down LCS recursion.
inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    memo[key] = v;
    return v;
  };
  return go(0, 0);
}

// LCS by enumerating every subsequence of `a` (|a| <= 20) and testing it
// against `b`.
inline std::size_t lcs_exhaustive(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << a.size()); ++mask) {
    std::size_t bits = 0, j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      ++bits;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else ++j;
    }
    if (ok) best = std::max(best, bits);
  }
  return best;
}

inline Prf rouge_l(const std::string& pred, const std::string& ref) {
  const auto p = words(pred), r = words(ref);
  return prf(static_cast<double>(lcs(p, r)), static_cast<double>(p.size()), static_cast<double>(r.size()));
}

// Adjusted Rand index from the contingency table.
inline double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [_, v] : cells) index += c2(v);
  for (const auto& [_, v] : rows) sa += c2(v);
  for (const auto& [_, v] : cols) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Scalar-loop perceiver cross-attention followed by L2 normalization.
inline std::vector<double> perceiver(const Mat& latents, const Mat& wq, const Mat& wk, const Mat& wv, const Mat& wo,
                                     const Mat& x) {
  const auto R = latents.rows(), d = latents.cols(), h = wq.cols(), T = x.rows(), e = wo.cols();
  auto mul = [](const Mat& a, const Mat& b) {
    Mat c = Mat::Zero(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
    return c;
  };
  (void)d;
  const Mat q = mul(latents, wq), k = mul(x, wk), v = mul(x, wv);
  std::vector<double> z;
  for (Eigen::Index r = 0; r < R; ++r) {
    std::vector<double> s(static_cast<std::size_t>(T));
    double mx = -1e300;
    for (Eigen::Index t = 0; t < T; ++t) {
      double dot = 0;
      for (Eigen::Index c = 0; c < h; ++c) dot += q(r, c) * k(t, c);
      s[static_cast<std::size_t>(t)] = dot / std::sqrt(static_cast<double>(h));
      mx = std::max(mx, s[static_cast<std::size_t>(t)]);
    }
    double total = 0;
    for (auto& v_ : s) total += (v_ = std::exp(v_ - mx));
    for (Eigen::Index c = 0; c < h; ++c) {
      double acc = 0;
      for (Eigen::Index t = 0; t < T; ++t) acc += s[static_cast<std::size_t>(t)] / total * v(t, c);
      z.push_back(acc);
    }
  }
  std::vector<double> out(static_cast<std::size_t>(e), 0.0);
  for (Eigen::Index j = 0; j < e; ++j)
    for (std::size_t i = 0; i < z.size(); ++i) out[static_cast<std::size_t>(j)] += z[i] * wo(static_cast<Eigen::Index>(i), j);
  double n = 0;
  for (double o : out) n += o * o;
  n = std::sqrt(n);
  for (double& o : out) o /= n;
  return out;
}

// Symmetric cross-entropy by explicit probability enumeration.
inline double clip_loss(const Mat& logits) {
  const auto b = logits.rows();
  double rows = 0, cols = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    double zr = 0, zc = 0;
    for (Eigen::Index j = 0; j < b; ++j) {
      zr += std::exp(logits(i, j));
      zc += std::exp(logits(j, i));
    }
    rows += -std::log(std::exp(logits(i, i)) / zr);
    cols += -std::log(std::exp(logits(i, i)) / zc);
  }
  return 0.5 * (rows / static_cast<double>(b) + cols / static_cast<double>(b));
}

// Central-difference derivative of f at x along every coordinate.
template <class F>
std::vector<double> numeric_gradient(F&& f, std::vector<double> x, double eps) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = f(x);
    x[i] = saved - eps;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

}  // namespace oracle
