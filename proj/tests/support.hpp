#pragma once

// Helpers shared by the tests: random inputs and Eigen as an independent oracle.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cdkf/config.hpp"
#include "cdkf/glucose_model.hpp"
#include "cdkf/matrix.hpp"
#include "cdkf/random.hpp"

namespace cdkf::test {

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

inline Matrix random_matrix(GaussianSource& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.standard_normal();
  return m;
}

/// M M^T + shift I, symmetric by construction.
inline Matrix random_spd(GaussianSource& rng, std::size_t n, double shift = 1.0) {
  const Matrix m = random_matrix(rng, n, n);
  Matrix a = m * mat_transpose(m);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
  return symmetrize(a);
}

inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// ||a - b||_F / ||b||_F, or the absolute difference when b is zero.
inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double nb = frobenius_norm(b);
  const double d = frobenius_norm(a - b);
  return nb > 0.0 ? d / nb : d;
}

inline std::filesystem::path tmp_dir(const std::string& sub) {
  const auto p = std::filesystem::path(CDKF_TEST_TMP) / sub;
  std::filesystem::create_directories(p);
  return p;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The placeholder glucose model with a full-rank diffusion, as built from an empty config.
inline ModelConfig default_config() { return parse_config("{}"); }

}  // namespace cdkf::test
