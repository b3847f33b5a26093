// SPDX-License-Identifier: Apache-2.0
#include "smsl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smsl/error.hpp"

namespace smsl {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::ShapeMismatch,
                "matrix data has " + std::to_string(data_.size()) +
                    " values, expected " + std::to_string(rows * cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto &r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::ShapeMismatch, "ragged matrix initializer");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::transposed() const {
  Matrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      out(c, r) = (*this)(r, c);
    }
  }
  return out;
}

namespace {

void require(bool ok, const char *op, const Matrix &a, const Matrix &b) {
  if (!ok) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Matrix matmul(const Matrix &a, const Matrix &b) {
  require(a.cols() == b.rows(), "matmul", a, b);
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out_row[j] += aik * b_row[j];
      }
    }
  }
  return out;
}

Matrix matmul_transposed(const Matrix &a, const Matrix &b) {
  require(a.cols() == b.cols(), "matmul_transposed", a, b);
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto a_row = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto b_row = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc += a_row[k] * b_row[k];
      }
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix transposed_matmul(const Matrix &a, const Matrix &b) {
  require(a.rows() == b.rows(), "transposed_matmul", a, b);
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto a_row = a.row(k);
    auto b_row = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a_row[i];
      if (aki == 0.0) continue;
      auto out_row = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out_row[j] += aki * b_row[j];
      }
    }
  }
  return out;
}

Matrix operator+(const Matrix &a, const Matrix &b) {
  require(a.same_shape(b), "add", a, b);
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Matrix operator*(double s, const Matrix &m) {
  Matrix out = m;
  for (double &x : out.data()) x *= s;
  return out;
}

bool all_finite(const Matrix &m) noexcept {
  return std::all_of(m.data().begin(), m.data().end(),
                     [](double x) { return std::isfinite(x); });
}

double max_abs(const Matrix &m) noexcept {
  double best = 0.0;
  for (double x : m.data()) best = std::max(best, std::abs(x));
  return best;
}

}  // namespace smsl
