#include "detcensus/linalg.hpp"

#include <stdexcept>
#include <utility>

namespace detcensus {

namespace {

// In-place Bareiss forward elimination. Returns the rank and accumulates the
// sign of the row permutation.
std::size_t bareiss(IntMatrix& m, int& sign) {
  sign = 1;
  Integer previous = 1;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols && row < m.rows; ++col) {
    std::size_t pivot = row;
    while (pivot < m.rows && m(pivot, col) == 0) ++pivot;
    if (pivot == m.rows) continue;
    if (pivot != row) {
      for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(pivot, j), m(row, j));
      sign = -sign;
    }
    for (std::size_t i = row + 1; i < m.rows; ++i) {
      for (std::size_t j = col + 1; j < m.cols; ++j) {
        m(i, j) = m(row, col) * m(i, j) - m(i, col) * m(row, j);
        mpz_divexact(m(i, j).get_mpz_t(), m(i, j).get_mpz_t(), previous.get_mpz_t());
      }
      m(i, col) = 0;
    }
    previous = m(row, col);
    ++row;
  }
  return row;
}

}  // namespace

Integer determinant(IntMatrix m) {
  if (m.rows != m.cols) throw std::invalid_argument("determinant: matrix is not square");
  if (m.rows == 0) return 1;
  // Bareiss with column skipping only yields the determinant when every
  // column gets a pivot, which is exactly the nonsingular case.
  int sign = 1;
  const std::size_t r = bareiss(m, sign);
  if (r < m.rows) return 0;
  Integer det = m(m.rows - 1, m.cols - 1);
  return sign < 0 ? Integer(-det) : det;
}

std::size_t rank(IntMatrix m) {
  int sign = 1;
  return bareiss(m, sign);
}

std::vector<std::vector<Rational>> kernel(const IntMatrix& m) {
  std::vector<std::vector<Rational>> a(m.rows, std::vector<Rational>(m.cols));
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) a[i][j] = m(i, j);
  }
  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols && row < m.rows; ++col) {
    std::size_t pivot = row;
    while (pivot < m.rows && a[pivot][col] == 0) ++pivot;
    if (pivot == m.rows) continue;
    std::swap(a[pivot], a[row]);
    const Rational lead = a[row][col];
    for (std::size_t j = col; j < m.cols; ++j) a[row][j] /= lead;
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == row || a[i][col] == 0) continue;
      const Rational factor = a[i][col];
      for (std::size_t j = col; j < m.cols; ++j) a[i][j] -= factor * a[row][j];
    }
    pivot_cols.push_back(col);
    ++row;
  }
  std::vector<bool> is_pivot(m.cols, false);
  for (auto c : pivot_cols) is_pivot[c] = true;
  std::vector<std::vector<Rational>> basis;
  for (std::size_t free = 0; free < m.cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(m.cols);
    v[free] = 1;
    for (std::size_t r = 0; r < pivot_cols.size(); ++r) v[pivot_cols[r]] = -a[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<Integer> primitive_integer_vector(const std::vector<Rational>& v) {
  Integer denominator_lcm = 1;
  for (const auto& q : v) denominator_lcm = lcm(denominator_lcm, q.get_den());
  std::vector<Integer> out;
  out.reserve(v.size());
  Integer g = 0;
  for (const auto& q : v) {
    Integer x = q.get_num() * (denominator_lcm / q.get_den());
    g = gcd(g, x);
    out.push_back(std::move(x));
  }
  if (g == 0) throw std::invalid_argument("primitive_integer_vector: zero vector");
  for (const auto& x : out) {
    if (x != 0) {
      if (x < 0) g = -g;
      break;
    }
  }
  for (auto& x : out) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
  return out;
}

std::vector<Rational> inverse_rational(const IntMatrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("inverse: matrix is not square");
  const std::size_t n = m.rows;
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m(i, j);
    a[i][n + i] = 1;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw std::domain_error("inverse: matrix is singular");
    std::swap(a[pivot], a[col]);
    const Rational lead = a[col][col];
    for (auto& x : a[col]) x /= lead;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a[i][col] == 0) continue;
      const Rational factor = a[i][col];
      for (std::size_t j = 0; j < 2 * n; ++j) a[i][j] -= factor * a[col][j];
    }
  }
  std::vector<Rational> out;
  out.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.push_back(a[i][n + j]);
  }
  return out;
}

}  // namespace detcensus
