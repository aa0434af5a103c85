// Copyright 2026 The s2e-coref Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coref/tensor.h"

#include <algorithm>
#include <cmath>

#include "coref/errors.h"

namespace coref {
namespace {

thread_local AllocationScope *current_scope = nullptr;

void CheckInner(int lhs, int rhs, const char *op) {
  if (lhs != rhs) {
    throw DimensionError(std::string(op) + ": inner dimensions " +
                         std::to_string(lhs) + " and " + std::to_string(rhs) +
                         " differ");
  }
}

}  // namespace

namespace alloc {

void RecordAllocate(std::size_t count) {
  const auto n = static_cast<std::int64_t>(count);
  for (AllocationScope *s = current_scope; s != nullptr; s = s->parent_) {
    s->live_ += n;
    s->total_ += n;
    s->peak_ = std::max(s->peak_, s->live_);
    s->largest_ = std::max(s->largest_, n);
  }
}

void RecordRelease(std::size_t count) {
  const auto n = static_cast<std::int64_t>(count);
  for (AllocationScope *s = current_scope; s != nullptr; s = s->parent_) {
    s->live_ -= n;
  }
}

}  // namespace alloc

AllocationScope::AllocationScope() : parent_(current_scope) {
  current_scope = this;
}

AllocationScope::~AllocationScope() { current_scope = parent_; }

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows),
      cols_(cols),
      data_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
}

void Matrix::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Matrix::Release() {
  Vector().swap(data_);
  rows_ = cols_ = 0;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double Bilinear(std::span<const double> u, const Matrix &b,
                std::span<const double> v) {
  double sum = 0.0;
  for (int i = 0; i < b.rows(); ++i) sum += u[i] * Dot(b.row(i), v);
  return sum;
}

void MatVec(const Matrix &m, std::span<const double> v, std::span<double> out) {
  for (int i = 0; i < m.rows(); ++i) out[i] = Dot(m.row(i), v);
}

void MatTVec(const Matrix &m, std::span<const double> v,
             std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    const double vi = v[i];
    auto r = m.row(i);
    for (int j = 0; j < m.cols(); ++j) out[j] += vi * r[j];
  }
}

Matrix MatMul(const Matrix &a, const Matrix &b) {
  CheckInner(a.cols(), b.rows(), "MatMul");
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    auto o = out.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto br = b.row(k);
      for (int j = 0; j < b.cols(); ++j) o[j] += aik * br[j];
    }
  }
  return out;
}

Matrix MatMulTransB(const Matrix &a, const Matrix &b) {
  CheckInner(a.cols(), b.cols(), "MatMulTransB");
  Matrix out(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.rows(); ++j) out(i, j) = Dot(a.row(i), b.row(j));
  }
  return out;
}

Matrix MatMulTransA(const Matrix &a, const Matrix &b) {
  CheckInner(a.rows(), b.rows(), "MatMulTransA");
  Matrix out(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k) {
    auto ar = a.row(k);
    auto br = b.row(k);
    for (int i = 0; i < a.cols(); ++i) {
      const double aki = ar[i];
      if (aki == 0.0) continue;
      auto o = out.row(i);
      for (int j = 0; j < b.cols(); ++j) o[j] += aki * br[j];
    }
  }
  return out;
}

void AddScaled(Matrix &dst, const Matrix &src, double scale) {
  CheckShape(src, dst.rows(), dst.cols(), "AddScaled");
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

void AddOuter(Matrix &dst, std::span<const double> u,
              std::span<const double> v, double scale) {
  for (int i = 0; i < dst.rows(); ++i) {
    const double ui = scale * u[i];
    auto r = dst.row(i);
    for (int j = 0; j < dst.cols(); ++j) r[j] += ui * v[j];
  }
}

Matrix Transpose(const Matrix &m) {
  Matrix out(m.cols(), m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

bool AllFinite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

double MaxAbsDiff(const Matrix &a, const Matrix &b) {
  CheckShape(b, a.rows(), a.cols(), "MaxAbsDiff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  }
  return worst;
}

void CheckShape(const Matrix &m, int rows, int cols, const std::string &what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(what + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

}  // namespace coref
