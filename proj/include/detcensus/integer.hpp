#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace detcensus {

using Integer = mpz_class;
using Rational = mpq_class;
using int128 = __int128;

inline Integer abs_value(const Integer& x) { return x < 0 ? Integer(-x) : x; }

inline int128 abs_value(int128 x) { return x < 0 ? -x : x; }

inline std::string to_string(const Integer& x) { return x.get_str(); }

std::string to_string(int128 x);

/// Parses a signed decimal string; throws std::invalid_argument on malformed input.
Integer parse_integer(const std::string& text);

/// Exact conversion; throws std::overflow_error if x does not fit.
int128 to_int128(const Integer& x);
Integer from_int128(int128 x);

bool fits_int64(const Integer& x);

/// p-adic valuation of a nonzero integer.
unsigned valuation(Integer x, const Integer& p);

bool is_prime(const Integer& p);
Integer next_prime(const Integer& p);

Integer power(const Integer& base, unsigned long exponent);

Integer binomial(unsigned long n, unsigned long k);

}  // namespace detcensus
