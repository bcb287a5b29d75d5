#pragma once

// Dense row-major matrix templated on scalar type, plus the kernel set the
// filters and benchmarks need: product, sum, scaling, transpose.
//
// Vectors are matrices with one column. All free functions are pure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cdkf/errors.hpp"

namespace cdkf {

template <typename Scalar>
class BasicMatrix {
 public:
  using value_type = Scalar;

  BasicMatrix() = default;

  BasicMatrix(std::size_t rows, std::size_t cols, Scalar fill = Scalar(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Row-wise literal, e.g. `{{1, 2}, {3, 4}}`. Rejects ragged rows and non-finite entries.
  BasicMatrix(std::initializer_list<std::initializer_list<Scalar>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw DimensionError("ragged matrix literal");
      for (Scalar v : row) {
        if (!std::isfinite(static_cast<double>(v)))
          throw NonFiniteError("non-finite entry in matrix literal");
        data_.push_back(v);
      }
    }
  }

  static BasicMatrix Zero(std::size_t rows, std::size_t cols) { return BasicMatrix(rows, cols); }

  static BasicMatrix Identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Scalar(1);
    return m;
  }

  /// Column vector from values.
  static BasicMatrix Column(std::span<const Scalar> values) {
    BasicMatrix m(values.size(), 1);
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
  }
  static BasicMatrix Column(std::initializer_list<Scalar> values) {
    return Column(std::span<const Scalar>(values.begin(), values.size()));
  }

  static BasicMatrix Diagonal(std::span<const Scalar> values) {
    BasicMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }
  static BasicMatrix Diagonal(std::initializer_list<Scalar> values) {
    return Diagonal(std::span<const Scalar>(values.begin(), values.size()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool is_vector() const noexcept { return cols_ == 1; }

  Scalar& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const Scalar& operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  /// Linear (row-major) element access; for column vectors this is the i'th entry.
  Scalar& operator[](std::size_t i) noexcept { return data_[i]; }
  const Scalar& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<Scalar> data() noexcept { return data_; }
  std::span<const Scalar> data() const noexcept { return data_; }

  BasicMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("block out of range");
    BasicMatrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const BasicMatrix& src) {
    if (r0 + src.rows() > rows_ || c0 + src.cols() > cols_)
      throw DimensionError("set_block out of range");
    for (std::size_t i = 0; i < src.rows(); ++i)
      for (std::size_t j = 0; j < src.cols(); ++j) (*this)(r0 + i, c0 + j) = src(i, j);
  }

  BasicMatrix col(std::size_t j) const { return block(0, j, rows_, 1); }
  void set_col(std::size_t j, const BasicMatrix& v) { set_block(0, j, v); }

  BasicMatrix& operator+=(const BasicMatrix& other);
  BasicMatrix& operator-=(const BasicMatrix& other);
  BasicMatrix& operator*=(Scalar s) noexcept {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Scalar> data_;
};

using Matrix = BasicMatrix<double>;

template <typename Scalar>
std::string shape_string(const BasicMatrix<Scalar>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

namespace detail {
template <typename Scalar>
void require_same_shape(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b,
                        const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
}
}  // namespace detail

/// Writes a·b into `out`, which must already have shape (a.rows × b.cols) and must not alias.
template <typename Scalar>
void mat_mul_into(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b,
                  BasicMatrix<Scalar>& out) {
  if (a.cols() != b.rows())
    throw DimensionError("mat_mul: inner dimensions differ, " + shape_string(a) + " * " +
                         shape_string(b));
  if (out.rows() != a.rows() || out.cols() != b.cols())
    throw DimensionError("mat_mul: output shape " + shape_string(out));
  const std::size_t n = a.rows(), inner = a.cols(), m = b.cols();
  const Scalar* pa = a.data().data();
  const Scalar* pb = b.data().data();
  Scalar* po = out.data().data();
  std::fill(po, po + n * m, Scalar(0));
  for (std::size_t i = 0; i < n; ++i) {
    Scalar* row = po + i * m;
    for (std::size_t k = 0; k < inner; ++k) {
      const Scalar aik = pa[i * inner + k];
      const Scalar* brow = pb + k * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += aik * brow[j];
    }
  }
}

template <typename Scalar>
BasicMatrix<Scalar> mat_mul(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b) {
  if (a.cols() != b.rows())
    throw DimensionError("mat_mul: inner dimensions differ, " + shape_string(a) + " * " +
                         shape_string(b));
  BasicMatrix<Scalar> out(a.rows(), b.cols());
  mat_mul_into(a, b, out);
  return out;
}

template <typename Scalar>
BasicMatrix<Scalar> mat_add(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b) {
  detail::require_same_shape(a, b, "mat_add");
  BasicMatrix<Scalar> out = a;
  auto o = out.data();
  auto r = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += r[i];
  return out;
}

template <typename Scalar>
BasicMatrix<Scalar> mat_sub(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b) {
  detail::require_same_shape(a, b, "mat_sub");
  BasicMatrix<Scalar> out = a;
  auto o = out.data();
  auto r = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= r[i];
  return out;
}

template <typename Scalar>
BasicMatrix<Scalar> mat_scale(const BasicMatrix<Scalar>& a, Scalar s) {
  BasicMatrix<Scalar> out = a;
  out *= s;
  return out;
}

template <typename Scalar>
BasicMatrix<Scalar> mat_transpose(const BasicMatrix<Scalar>& a) {
  BasicMatrix<Scalar> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <typename Scalar>
BasicMatrix<Scalar>& BasicMatrix<Scalar>::operator+=(const BasicMatrix& other) {
  detail::require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

template <typename Scalar>
BasicMatrix<Scalar>& BasicMatrix<Scalar>::operator-=(const BasicMatrix& other) {
  detail::require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

template <typename Scalar>
BasicMatrix<Scalar> operator+(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b) {
  return mat_add(a, b);
}
template <typename Scalar>
BasicMatrix<Scalar> operator-(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b) {
  return mat_sub(a, b);
}
template <typename Scalar>
BasicMatrix<Scalar> operator-(const BasicMatrix<Scalar>& a) {
  return mat_scale(a, Scalar(-1));
}
template <typename Scalar>
BasicMatrix<Scalar> operator*(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b) {
  return mat_mul(a, b);
}
template <typename Scalar>
BasicMatrix<Scalar> operator*(const BasicMatrix<Scalar>& a, Scalar s) {
  return mat_scale(a, s);
}
template <typename Scalar>
BasicMatrix<Scalar> operator*(Scalar s, const BasicMatrix<Scalar>& a) {
  return mat_scale(a, s);
}

template <typename Scalar>
Scalar trace(const BasicMatrix<Scalar>& a) {
  if (!a.is_square()) throw DimensionError("trace: non-square " + shape_string(a));
  Scalar t(0);
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

template <typename Scalar>
Scalar frobenius_norm(const BasicMatrix<Scalar>& a) {
  Scalar s(0);
  for (Scalar v : a.data()) s += v * v;
  return std::sqrt(s);
}

template <typename Scalar>
Scalar max_abs(const BasicMatrix<Scalar>& a) {
  Scalar m(0);
  for (Scalar v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

template <typename Scalar>
bool all_finite(const BasicMatrix<Scalar>& a) {
  return std::all_of(a.data().begin(), a.data().end(),
                     [](Scalar v) { return std::isfinite(static_cast<double>(v)); });
}

/// a·bᵀ for column vectors.
template <typename Scalar>
BasicMatrix<Scalar> outer(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b) {
  if (!a.is_vector() || !b.is_vector()) throw DimensionError("outer: arguments must be vectors");
  BasicMatrix<Scalar> out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = a[i] * b[j];
  return out;
}

/// (a + aᵀ) / 2.
template <typename Scalar>
BasicMatrix<Scalar> symmetrize(const BasicMatrix<Scalar>& a) {
  if (!a.is_square()) throw DimensionError("symmetrize: non-square " + shape_string(a));
  BasicMatrix<Scalar> out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const Scalar v = Scalar(0.5) * (a(i, j) + a(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

/// Symmetric to `rel_tol` relative to the largest absolute entry.
template <typename Scalar>
bool is_symmetric(const BasicMatrix<Scalar>& a, Scalar rel_tol = Scalar(1e-9)) {
  if (!a.is_square()) return false;
  const Scalar bound = rel_tol * max_abs(a);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > bound) return false;
  return true;
}

/// Block-diagonal stacking of two matrices.
template <typename Scalar>
BasicMatrix<Scalar> block_diagonal(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b) {
  BasicMatrix<Scalar> out(a.rows() + b.rows(), a.cols() + b.cols());
  out.set_block(0, 0, a);
  out.set_block(a.rows(), a.cols(), b);
  return out;
}

template <typename Scalar>
std::ostream& operator<<(std::ostream& os, const BasicMatrix<Scalar>& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i == 0 ? "[[" : " [");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
    os << (i + 1 == m.rows() ? "]]" : "]\n");
  }
  if (m.rows() == 0) os << "[]";
  return os;
}

}  // namespace cdkf
