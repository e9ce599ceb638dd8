#include "detcensus/invariants.hpp"

#include "detcensus/linalg.hpp"

#include <stdexcept>

namespace detcensus {

int UnivariatePolynomial::degree() const {
  for (std::size_t i = coeffs.size(); i-- > 0;) {
    if (coeffs[i] != 0) return static_cast<int>(i);
  }
  return -1;
}

Integer sylvester_resultant(const UnivariatePolynomial& f, const UnivariatePolynomial& g) {
  const int m = f.degree();
  const int n = g.degree();
  if (m < 0 || n < 0) throw std::invalid_argument("sylvester_resultant: zero polynomial");
  const auto size = static_cast<std::size_t>(m + n);
  IntMatrix syl(size, size);
  // Rows hold coefficients from the leading term down.
  for (int r = 0; r < n; ++r) {
    for (int i = 0; i <= m; ++i) {
      syl(static_cast<std::size_t>(r), static_cast<std::size_t>(r + i)) =
          f.coeffs[static_cast<std::size_t>(m - i)];
    }
  }
  for (int r = 0; r < m; ++r) {
    for (int i = 0; i <= n; ++i) {
      syl(static_cast<std::size_t>(n + r), static_cast<std::size_t>(r + i)) =
          g.coeffs[static_cast<std::size_t>(n - i)];
    }
  }
  return determinant(std::move(syl));
}

Integer discriminant_binary(const HomogeneousForm& f) {
  if (f.vars() != 2) throw std::invalid_argument("discriminant_binary: form is not binary");
  if (f.degree() < 2) throw std::invalid_argument("discriminant_binary: degree below 2");
  if (f.is_zero()) throw std::invalid_argument("discriminant_binary: zero form");
  const int d = f.degree();

  HomogeneousForm work = f;
  if (work.coeff({d, 0}) == 0) {
    // y -> t x + y is unimodular and makes the x^d coefficient f(1, t) nonzero
    // for some t in [0, d].
    for (long t = 1;; ++t) {
      const Integer lead = evaluate(f, std::vector<Integer>{1, t});
      if (lead != 0) {
        work = act(UnimodularMatrix::from_rows({{1, 0}, {t, 1}}), f);
        break;
      }
    }
  }
  const auto a = work.dense();  // a[i] multiplies x^{d-i} y^i
  UnivariatePolynomial poly;
  UnivariatePolynomial deriv;
  poly.coeffs.resize(static_cast<std::size_t>(d) + 1);
  deriv.coeffs.resize(static_cast<std::size_t>(d));
  for (int j = 0; j <= d; ++j) poly.coeffs[static_cast<std::size_t>(j)] = a[static_cast<std::size_t>(d - j)];
  for (int j = 1; j <= d; ++j) {
    deriv.coeffs[static_cast<std::size_t>(j - 1)] = poly.coeffs[static_cast<std::size_t>(j)] * j;
  }
  Integer res = sylvester_resultant(poly, deriv);
  Integer disc;
  mpz_divexact(disc.get_mpz_t(), res.get_mpz_t(), a[0].get_mpz_t());
  if ((d * (d - 1) / 2) % 2 == 1) disc = -disc;
  return disc;
}

int128 cubic_discriminant(int128 a, int128 b, int128 c, int128 d) {
  return b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d +
         18 * a * b * c * d;
}

bool is_integral_at_p(const HomogeneousForm& f, const Integer& p) {
  if (f.vars() != 2) throw std::invalid_argument("is_integral_at_p: form is not binary");
  if (!is_prime(p)) throw std::invalid_argument("is_integral_at_p: modulus is not prime");
  if (!f.is_primitive()) throw std::invalid_argument("is_integral_at_p: form is not primitive");
  const Integer disc = discriminant_binary(f);
  return !mpz_divisible_p(disc.get_mpz_t(), p.get_mpz_t());
}

Integer SUnitFactorization::value() const {
  Integer out = sign;
  for (const auto& [p, e] : exponents) out *= power(p, e);
  return out;
}

std::optional<SUnitFactorization> s_unit_factor(const Integer& n, const PrimeSet& s) {
  if (n == 0) throw std::domain_error("s_unit_factor: zero is not an S-unit");
  SUnitFactorization out;
  out.sign = n < 0 ? -1 : 1;
  Integer rest = abs_value(n);
  for (const auto& p : s.primes()) {
    unsigned e = 0;
    while (mpz_divisible_p(rest.get_mpz_t(), p.get_mpz_t())) {
      mpz_divexact(rest.get_mpz_t(), rest.get_mpz_t(), p.get_mpz_t());
      ++e;
    }
    if (e > 0) out.exponents.emplace(p, e);
  }
  if (rest != 1) return std::nullopt;
  return out;
}

int discriminant_scaling_exponent(int d) { return 2 * (d - 1); }

SUnitRescaling s_unit_rescale(const HomogeneousForm& f, const PrimeSet& s) {
  const Integer disc = discriminant_binary(f);
  if (disc == 0) throw std::domain_error("s_unit_rescale: discriminant is zero");
  const auto factored = s_unit_factor(disc, s);
  if (!factored) throw std::domain_error("s_unit_rescale: discriminant is not an S-unit");
  const int h = discriminant_scaling_exponent(f.degree());

  Integer denominator = 1;
  for (const auto& [p, e] : factored->exponents) {
    denominator *= power(p, e / static_cast<unsigned>(h));
  }
  const bool negate = f.terms().begin()->second < 0;
  Rational unit(negate ? Integer(-1) : Integer(1), denominator);
  unit.canonicalize();

  SUnitRescaling out{unit, {f, 1}, Rational(disc)};
  HomogeneousForm numerator = negate ? -f : f;
  const Integer shared = gcd(numerator.content(), denominator);
  out.form.numerator = numerator.divided(shared);
  out.form.denominator = denominator / shared;
  out.discriminant = Rational(disc) / Rational(power(denominator, static_cast<unsigned long>(h)));
  out.discriminant.canonicalize();
  return out;
}

}  // namespace detcensus
