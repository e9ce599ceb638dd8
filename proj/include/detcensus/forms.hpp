#pragma once

// Homogeneous integer forms, projective points, unimodular matrices and the
// substitution action tying them together.

#include "detcensus/integer.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace detcensus {

/// Exponent vector of a monomial; one entry per variable.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& index);

/// Strict "comes first" relation of the graded reverse-lexicographic order
/// with x_0 > x_1 > ... : among equal total degree, a precedes b when the
/// last nonzero entry of a - b is negative.
struct GrevlexFirst {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// All degree-d monomials in n variables, greatest first under grevlex.
std::vector<MultiIndex> monomials_of_degree(int n, int d);

class HomogeneousForm {
 public:
  using Terms = std::map<MultiIndex, Integer, GrevlexFirst>;

  HomogeneousForm(int n, int d);

  /// Builds a form from coefficients listed in monomials_of_degree(n, d) order.
  static HomogeneousForm from_dense(int n, int d, std::span<const Integer> coeffs);
  static HomogeneousForm from_dense(int n, int d, std::span<const long> coeffs);

  /// Binary shorthand: a_0 x^d + a_1 x^{d-1} y + ... + a_d y^d.
  static HomogeneousForm binary(std::span<const long> coeffs);
  static HomogeneousForm binary(std::initializer_list<long> coeffs);

  int vars() const { return n_; }
  int degree() const { return d_; }
  bool is_zero() const { return terms_.empty(); }
  const Terms& terms() const { return terms_; }

  Integer coeff(const MultiIndex& index) const;
  void set(const MultiIndex& index, Integer value);
  void add(const MultiIndex& index, const Integer& value);

  /// Coefficients in monomials_of_degree order, zeros included.
  std::vector<Integer> dense() const;

  /// Maximum absolute coefficient (0 for the zero form).
  Integer height() const;
  /// Non-negative gcd of all coefficients.
  Integer content() const;
  bool is_primitive() const { return content() == 1; }

  /// The grevlex-greatest monomial with nonzero coefficient.
  const MultiIndex& leading_monomial() const;

  HomogeneousForm scaled(const Integer& factor) const;
  /// Exact division of every coefficient; throws if not divisible.
  HomogeneousForm divided(const Integer& divisor) const;
  HomogeneousForm operator-() const { return scaled(-1); }

  /// Partial derivative with respect to variable i (degree drops by one).
  HomogeneousForm derivative(int i) const;

  std::string to_string() const;

  friend bool operator==(const HomogeneousForm& a, const HomogeneousForm& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.terms_ == b.terms_;
  }

 private:
  void check_index(const MultiIndex& index) const;

  int n_;
  int d_;
  Terms terms_;
};

HomogeneousForm multiply(const HomogeneousForm& a, const HomogeneousForm& b);

/// Evaluates the form at an integer vector; throws on dimension mismatch.
Integer evaluate(const HomogeneousForm& f, std::span<const Integer> x);

/// Primitive integer vector up to sign, first nonzero coordinate positive.
class ProjectivePoint {
 public:
  /// Divides by the gcd and fixes the sign; throws std::invalid_argument on the zero vector.
  static ProjectivePoint normalize(std::span<const Integer> coords);
  static ProjectivePoint normalize(std::initializer_list<long> coords);

  const std::vector<Integer>& coords() const { return coords_; }
  std::size_t size() const { return coords_.size(); }
  const Integer& operator[](std::size_t i) const { return coords_[i]; }

  /// Multiplicative height; for primitive coordinates the maximum absolute coordinate.
  Integer height() const;

  std::string to_string() const;

  friend bool operator==(const ProjectivePoint&, const ProjectivePoint&) = default;
  friend auto operator<=>(const ProjectivePoint& a, const ProjectivePoint& b) {
    return a.coords_ <=> b.coords_;
  }

 private:
  explicit ProjectivePoint(std::vector<Integer> coords) : coords_(std::move(coords)) {}
  std::vector<Integer> coords_;
};

inline ProjectivePoint normalize(std::span<const Integer> coords) {
  return ProjectivePoint::normalize(coords);
}

inline Integer height(const ProjectivePoint& p) { return p.height(); }

/// Square integer matrix of determinant +1 or -1, stored row-major.
class UnimodularMatrix {
 public:
  /// Throws std::invalid_argument unless the entries form an n x n matrix of determinant +-1.
  UnimodularMatrix(int n, std::vector<Integer> entries);
  static UnimodularMatrix from_rows(std::initializer_list<std::initializer_list<long>> rows);
  static UnimodularMatrix identity(int n);

  int size() const { return n_; }
  int det() const { return det_; }
  const Integer& at(int i, int j) const { return entries_[static_cast<std::size_t>(i * n_ + j)]; }
  const std::vector<Integer>& entries() const { return entries_; }

  UnimodularMatrix inverse() const;
  Integer max_entry() const;

  std::string to_string() const;

  friend UnimodularMatrix operator*(const UnimodularMatrix& a, const UnimodularMatrix& b);
  friend bool operator==(const UnimodularMatrix& a, const UnimodularMatrix& b) {
    return a.n_ == b.n_ && a.entries_ == b.entries_;
  }
  friend auto operator<=>(const UnimodularMatrix& a, const UnimodularMatrix& b) {
    return a.entries_ <=> b.entries_;
  }

 private:
  UnimodularMatrix(int n, std::vector<Integer> entries, int det)
      : n_(n), entries_(std::move(entries)), det_(det) {}

  int n_;
  std::vector<Integer> entries_;
  int det_;
};

/// Square integer matrix with nonzero determinant, stored row-major.
class IntegralMatrix {
 public:
  /// Throws std::invalid_argument unless the entries form an n x n matrix of nonzero determinant.
  IntegralMatrix(int n, std::vector<Integer> entries);
  IntegralMatrix(const UnimodularMatrix& g);  // NOLINT: every unimodular matrix is integral

  int size() const { return n_; }
  const Integer& det() const { return det_; }
  const Integer& at(int i, int j) const { return entries_[static_cast<std::size_t>(i * n_ + j)]; }
  const std::vector<Integer>& entries() const { return entries_; }

  /// The same matrix as a UnimodularMatrix when det = +-1.
  std::optional<UnimodularMatrix> unimodular() const;
  std::string to_string() const;

  friend bool operator==(const IntegralMatrix& a, const IntegralMatrix& b) {
    return a.n_ == b.n_ && a.entries_ == b.entries_;
  }

 private:
  int n_;
  std::vector<Integer> entries_;
  Integer det_;
};

/// f(M x) for an arbitrary n x n integer matrix M given row-major.
HomogeneousForm substitute(std::span<const Integer> m, const HomogeneousForm& f);

/// Substitution action: variable x_i is replaced by sum_j g_ij x_j, i.e.
/// (g.f)(x) = f(g x) for x a column vector. This is a right action:
/// act(g * h, f) == act(h, act(g, f)).
HomogeneousForm act(const UnimodularMatrix& g, const HomogeneousForm& f);
HomogeneousForm act(const IntegralMatrix& g, const HomogeneousForm& f);

/// Finite, strictly increasing set of rational primes.
class PrimeSet {
 public:
  PrimeSet() = default;
  /// Sorts and deduplicates; throws std::invalid_argument on a non-prime entry.
  explicit PrimeSet(std::vector<Integer> primes);
  PrimeSet(std::initializer_list<long> primes);

  const std::vector<Integer>& primes() const { return primes_; }
  bool empty() const { return primes_.empty(); }
  bool contains(const Integer& p) const;

  std::string to_string() const;

 private:
  std::vector<Integer> primes_;
};

}  // namespace detcensus
