#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hct/error.hpp"

namespace hct {

using Index = Eigen::Index;

// Dense row-major storage. A matrix whose rows stack `N` sequences of
// `seq_len` rows is the layout every sequence primitive expects.
template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;

using Rng = std::mt19937_64;

// Derives an independent engine for a named stream of a seeded run.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const std::string& what) {
  if (!m.allFinite()) fail(ErrorKind::validation, what + ": non-finite value");
}

inline std::string shape_string(Index rows, Index cols) {
  return "[" + std::to_string(rows) + ", " + std::to_string(cols) + "]";
}

template <class Derived>
std::string shape_string(const Eigen::EigenBase<Derived>& m) {
  return shape_string(m.rows(), m.cols());
}

}  // namespace hct
