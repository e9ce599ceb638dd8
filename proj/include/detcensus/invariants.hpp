#pragma once

// Discriminants of binary forms, integrality at a prime, and S-unit bookkeeping.

#include "detcensus/forms.hpp"

#include <map>
#include <optional>
#include <vector>

namespace detcensus {

/// Dense univariate polynomial, coeffs[i] multiplies x^i.
struct UnivariatePolynomial {
  std::vector<Integer> coeffs;

  /// Degree after dropping trailing zeros; -1 for the zero polynomial.
  int degree() const;
};

/// Res(f, g) = lc(f)^deg g * prod over roots a of f of g(a), computed as the
/// determinant of the Sylvester matrix. Throws std::invalid_argument on a zero input.
Integer sylvester_resultant(const UnivariatePolynomial& f, const UnivariatePolynomial& g);

/// Classical discriminant of a binary form, normalized so that
/// disc(a x^2 + b xy + c y^2) = b^2 - 4ac. Equivalently, for a form that
/// factors as prod (a_i x - b_i y), the discriminant is
/// prod_{i<j} (a_i b_j - a_j b_i)^2.
Integer discriminant_binary(const HomogeneousForm& f);

/// disc for d = 3 in coefficient order (a, b, c, d), 128-bit arithmetic.
/// Requires max |coefficient| < 2^23 to stay in range.
int128 cubic_discriminant(int128 a, int128 b, int128 c, int128 d);

/// True iff the discriminant of the primitive binary form f is prime to p.
bool is_integral_at_p(const HomogeneousForm& f, const Integer& p);

struct SUnitFactorization {
  int sign = 1;
  std::map<Integer, unsigned> exponents;

  Integer value() const;
};

/// Factors N over S; std::nullopt when N has a prime factor outside S.
/// Throws std::domain_error for N = 0.
std::optional<SUnitFactorization> s_unit_factor(const Integer& n, const PrimeSet& s);

/// A form with S-integral coefficients stored as numerator / denominator,
/// where the denominator is a positive S-unit.
struct SIntegralForm {
  HomogeneousForm numerator;
  Integer denominator = 1;
};

struct SUnitRescaling {
  /// The S-unit u applied, as an exact rational.
  Rational unit;
  /// u * f.
  SIntegralForm form;
  /// disc(u * f) = u^{2(d-1)} disc(f); every S-valuation lies in [0, 2(d-1)).
  Rational discriminant;
};

/// The valuation window exponent: disc(u f) = u^h disc(f) with h = 2(d - 1).
int discriminant_scaling_exponent(int d);

/// Rescales f by the S-unit u = +-prod p^{-floor(v_p(disc)/h)} bringing every
/// S-valuation of the discriminant into [0, h); the sign of u makes the leading
/// coefficient of u*f positive. Throws std::domain_error when disc(f) is zero
/// or not an S-unit.
SUnitRescaling s_unit_rescale(const HomogeneousForm& f, const PrimeSet& s);

}  // namespace detcensus
