#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "cdkf/matrix.hpp"

namespace cdkf {

enum class StateKind {
  predicted,  // x_{k|k-1}, P_{k|k-1}
  filtered,   // x_{k|k},   P_{k|k}
};

/// State estimate and covariance at sample k (time t, minutes).
struct FilterState {
  Matrix x;
  Matrix P;
  std::size_t k = 0;
  double t = 0.0;
  StateKind kind = StateKind::predicted;
};

/// Thrown when a filter stage receives a state of the wrong kind.
class StateKindError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require_kind(const FilterState& s, StateKind kind, const char* who) {
  if (s.kind != kind)
    throw StateKindError(std::string(who) +
                         (kind == StateKind::filtered ? ": expected a filtered state"
                                                      : ": expected a predicted state"));
}

/// Measurement residual e, its covariance Re, and e^T Re^-1 e.
struct Innovation {
  Matrix e;
  Matrix Re;
  double nis = 0.0;
};

/// Builds an Innovation, computing NIS through a Cholesky solve.
Innovation make_innovation(Matrix e, Matrix Re);

/// (I - K C) P (I - K C)^T + K R K^T, symmetrized.
Matrix joseph_update(const Matrix& P, const Matrix& K, const Matrix& C, const Matrix& R);

}  // namespace cdkf
