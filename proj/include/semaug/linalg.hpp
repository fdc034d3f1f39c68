#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "semaug/error.hpp"

namespace semaug {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// Returns false and leaves `v` untouched when its norm is zero.
template <class Derived>
bool normalize_in_place(Eigen::MatrixBase<Derived>& v) {
  const auto norm = v.norm();
  if (norm == 0) return false;
  v /= norm;
  return true;
}

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const std::string& name) {
  if (!m.allFinite()) throw NumericError("non-finite value in " + name);
}

// Row-wise numerically stable softmax.
template <class T>
Matrix<T> softmax_rows(const Matrix<T>& logits) {
  Matrix<T> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const T max = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - max).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

}  // namespace semaug
