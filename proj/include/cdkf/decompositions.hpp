#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "cdkf/errors.hpp"
#include "cdkf/matrix.hpp"

namespace cdkf {

/// Tolerances used by the Cholesky factorization.
///
/// A pivot in (-negative_slack * trace/n, 0] is clamped to jitter * trace/n and the
/// factorization continues; anything lower is reported as not positive definite.
struct CholeskyPolicy {
  double symmetry_tol = 1e-9;
  double negative_slack = 1e-10;
  double jitter = 1e-12;
};

/// Lower-triangular L with L·Lᵀ = a. Entries above the diagonal are exactly zero.
template <typename Scalar>
BasicMatrix<Scalar> cholesky_lower(const BasicMatrix<Scalar>& a, const CholeskyPolicy& policy = {}) {
  if (!a.is_square()) throw DimensionError("cholesky_lower: non-square " + shape_string(a));
  if (!all_finite(a)) throw NonFiniteError("cholesky_lower: non-finite input");
  if (!is_symmetric(a, Scalar(policy.symmetry_tol)))
    throw SymmetryError("cholesky_lower: input is not symmetric");

  const std::size_t n = a.rows();
  BasicMatrix<Scalar> l(n, n);
  if (n == 0) return l;
  const Scalar scale = trace(a) / Scalar(n);

  for (std::size_t j = 0; j < n; ++j) {
    Scalar pivot = a(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (pivot <= Scalar(0)) {
      if (scale > Scalar(0) && pivot > -Scalar(policy.negative_slack) * scale)
        pivot = Scalar(policy.jitter) * scale;
      else
        throw NotPositiveDefiniteError(j, static_cast<double>(pivot));
    }
    const Scalar ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      // Lower triangle of `a` only; the symmetry check above covers the rest.
      Scalar v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

/// Solves L·Lᵀ·x = b given a lower Cholesky factor, column by column.
template <typename Scalar>
BasicMatrix<Scalar> cholesky_solve(const BasicMatrix<Scalar>& l, const BasicMatrix<Scalar>& b) {
  if (!l.is_square() || l.rows() != b.rows())
    throw DimensionError("cholesky_solve: factor " + shape_string(l) + " vs rhs " + shape_string(b));
  const std::size_t n = l.rows();
  BasicMatrix<Scalar> x = b;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      Scalar v = x(i, c);
      for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * x(k, c);
      x(i, c) = v / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      Scalar v = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) v -= l(k, i) * x(k, c);
      x(i, c) = v / l(i, i);
    }
  }
  return x;
}

/// x with a·x = b for symmetric positive definite a. No explicit inverse is formed.
template <typename Scalar>
BasicMatrix<Scalar> solve_spd(const BasicMatrix<Scalar>& a, const BasicMatrix<Scalar>& b,
                              const CholeskyPolicy& policy = {}) {
  if (a.rows() != b.rows())
    throw DimensionError("solve_spd: " + shape_string(a) + " vs rhs " + shape_string(b));
  return cholesky_solve(cholesky_lower(a, policy), b);
}

/// Matrix exponential by scaling and squaring around a truncated Taylor series.
template <typename Scalar>
BasicMatrix<Scalar> mat_exp(const BasicMatrix<Scalar>& a) {
  if (!a.is_square()) throw DimensionError("mat_exp: non-square " + shape_string(a));
  const std::size_t n = a.rows();

  // Infinity norm.
  Scalar norm(0);
  for (std::size_t i = 0; i < n; ++i) {
    Scalar row(0);
    for (std::size_t j = 0; j < n; ++j) row += std::abs(a(i, j));
    norm = std::max(norm, row);
  }
  if (!std::isfinite(static_cast<double>(norm))) throw NonFiniteError("mat_exp: non-finite input");

  int squarings = 0;
  if (norm > Scalar(0.5)) squarings = static_cast<int>(std::ceil(std::log2(norm / Scalar(0.5))));
  const BasicMatrix<Scalar> scaled = mat_scale(a, std::ldexp(Scalar(1), -squarings));

  BasicMatrix<Scalar> result = BasicMatrix<Scalar>::Identity(n);
  BasicMatrix<Scalar> term = result;
  BasicMatrix<Scalar> next(n, n);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  for (int k = 1; k <= 40; ++k) {
    mat_mul_into(term, scaled, next);
    next *= Scalar(1) / Scalar(k);
    std::swap(term, next);
    result += term;
    if (max_abs(term) <= eps * max_abs(result) * Scalar(0.1)) break;
  }
  for (int s = 0; s < squarings; ++s) {
    mat_mul_into(result, result, next);
    std::swap(result, next);
  }
  if (!all_finite(result)) throw NonFiniteError("mat_exp: result overflowed");
  return result;
}

}  // namespace cdkf
