#pragma once

// Exact dense linear algebra over Z and Q.

#include "detcensus/integer.hpp"

#include <cstddef>
#include <vector>

namespace detcensus {

struct IntMatrix {
  IntMatrix() = default;
  IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  Integer& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const Integer& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Integer> data;
};

/// Fraction-free Bareiss elimination; the matrix must be square.
Integer determinant(IntMatrix m);

std::size_t rank(IntMatrix m);

/// Basis of {v : M v = 0} over Q in reduced-echelon form: one vector per
/// free column, ordered by free column index, with a 1 in that column.
std::vector<std::vector<Rational>> kernel(const IntMatrix& m);

/// Scales a nonzero rational vector to a primitive integer vector whose first
/// nonzero entry is positive.
std::vector<Integer> primitive_integer_vector(const std::vector<Rational>& v);

/// Inverse of an invertible square matrix, row-major.
std::vector<Rational> inverse_rational(const IntMatrix& m);

}  // namespace detcensus
