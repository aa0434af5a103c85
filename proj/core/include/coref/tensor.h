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

#ifndef COREF_TENSOR_H_
#define COREF_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace coref {

// Allocation accounting for float buffers. Every Matrix and Vector routes its
// storage through CountingAllocator, so the counts below are exact for the
// scoring paths.
namespace alloc {

// Records `count` floats allocated or released on the calling thread.
void RecordAllocate(std::size_t count);
void RecordRelease(std::size_t count);

}  // namespace alloc

// Measures float allocations made on the current thread while alive.
// Scopes nest; each observes everything allocated inside it. Buffers that
// were allocated before the scope opened and are released inside it lower
// the live count below zero, which is clamped when reporting the peak.
class AllocationScope {
 public:
  AllocationScope();
  ~AllocationScope();
  AllocationScope(const AllocationScope &) = delete;
  AllocationScope &operator=(const AllocationScope &) = delete;

  std::int64_t live() const { return live_; }
  std::int64_t peak() const { return peak_; }
  std::int64_t total() const { return total_; }
  // Largest single allocation seen in the scope.
  std::int64_t largest() const { return largest_; }

 private:
  friend void alloc::RecordAllocate(std::size_t);
  friend void alloc::RecordRelease(std::size_t);

  std::int64_t live_ = 0;
  std::int64_t peak_ = 0;
  std::int64_t total_ = 0;
  std::int64_t largest_ = 0;
  AllocationScope *parent_;
};

template <class T>
struct CountingAllocator {
  using value_type = T;

  CountingAllocator() noexcept = default;
  template <class U>
  CountingAllocator(const CountingAllocator<U> &) noexcept {}

  T *allocate(std::size_t n) {
    T *p = std::allocator<T>{}.allocate(n);
    alloc::RecordAllocate(n);
    return p;
  }
  void deallocate(T *p, std::size_t n) noexcept {
    alloc::RecordRelease(n);
    std::allocator<T>{}.deallocate(p, n);
  }

  template <class U>
  bool operator==(const CountingAllocator<U> &) const noexcept {
    return true;
  }
};

using Vector = std::vector<double, CountingAllocator<double>>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::span<double> row(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * cols_,
            static_cast<std::size_t>(cols_)};
  }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_,
            static_cast<std::size_t>(cols_)};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }

  void Fill(double value);
  // Releases storage; the matrix becomes 0x0.
  void Release();

  bool operator==(const Matrix &other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  Vector data_;
};

double Dot(std::span<const double> a, std::span<const double> b);

// u^T B v for square-compatible B.
double Bilinear(std::span<const double> u, const Matrix &b,
                std::span<const double> v);

// out = M v (out sized to M.rows()).
void MatVec(const Matrix &m, std::span<const double> v, std::span<double> out);
// out = M^T v.
void MatTVec(const Matrix &m, std::span<const double> v,
             std::span<double> out);

// A B
Matrix MatMul(const Matrix &a, const Matrix &b);
// A B^T
Matrix MatMulTransB(const Matrix &a, const Matrix &b);
// A^T B
Matrix MatMulTransA(const Matrix &a, const Matrix &b);

// dst += scale * src (same shape).
void AddScaled(Matrix &dst, const Matrix &src, double scale = 1.0);
// dst += scale * u v^T.
void AddOuter(Matrix &dst, std::span<const double> u,
              std::span<const double> v, double scale = 1.0);

Matrix Transpose(const Matrix &m);

bool AllFinite(std::span<const double> values);
double MaxAbsDiff(const Matrix &a, const Matrix &b);

// Throws DimensionError with `what` when the shapes differ.
void CheckShape(const Matrix &m, int rows, int cols, const std::string &what);

}  // namespace coref

#endif  // COREF_TENSOR_H_
