#include "detcensus/integer.hpp"

#include <algorithm>
#include <stdexcept>

namespace detcensus {

std::string to_string(int128 x) {
  if (x == 0) return "0";
  const bool negative = x < 0;
  // Work with the negative value so INT128_MIN does not overflow.
  if (!negative) x = -x;
  std::string digits;
  while (x != 0) {
    digits.push_back(static_cast<char>('0' - static_cast<int>(x % 10)));
    x /= 10;
  }
  if (negative) digits.push_back('-');
  std::reverse(digits.begin(), digits.end());
  return digits;
}

Integer parse_integer(const std::string& text) {
  std::size_t start = (!text.empty() && (text[0] == '-' || text[0] == '+')) ? 1 : 0;
  if (start == text.size()) throw std::invalid_argument("empty integer literal");
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') {
      throw std::invalid_argument("malformed integer literal: " + text);
    }
  }
  Integer out;
  out.set_str(text[0] == '+' ? text.substr(1) : text, 10);
  return out;
}

int128 to_int128(const Integer& x) {
  if (mpz_sizeinbase(x.get_mpz_t(), 2) > 126) {
    throw std::overflow_error("integer exceeds 126-bit fast path: " + x.get_str());
  }
  Integer magnitude = abs_value(x);
  Integer high = magnitude >> 64;
  Integer low = magnitude - (high << 64);
  auto to_u64 = [](const Integer& v) {
    std::uint64_t out = 0;
    mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, v.get_mpz_t());
    return out;
  };
  int128 value = (static_cast<int128>(to_u64(high)) << 64) | static_cast<int128>(to_u64(low));
  return x < 0 ? -value : value;
}

Integer from_int128(int128 x) {
  const bool negative = x < 0;
  unsigned __int128 magnitude = negative ? static_cast<unsigned __int128>(-(x + 1)) + 1
                                         : static_cast<unsigned __int128>(x);
  std::uint64_t words[2] = {static_cast<std::uint64_t>(magnitude),
                            static_cast<std::uint64_t>(magnitude >> 64)};
  Integer out;
  mpz_import(out.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, words);
  return negative ? Integer(-out) : out;
}

bool fits_int64(const Integer& x) { return mpz_fits_slong_p(x.get_mpz_t()) != 0; }

unsigned valuation(Integer x, const Integer& p) {
  if (x == 0) throw std::domain_error("valuation of zero");
  unsigned v = 0;
  while (mpz_divisible_p(x.get_mpz_t(), p.get_mpz_t())) {
    mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), p.get_mpz_t());
    ++v;
  }
  return v;
}

bool is_prime(const Integer& p) {
  if (p < 2) return false;
  return mpz_probab_prime_p(p.get_mpz_t(), 40) != 0;
}

Integer next_prime(const Integer& p) {
  Integer out;
  mpz_nextprime(out.get_mpz_t(), p.get_mpz_t());
  return out;
}

Integer power(const Integer& base, unsigned long exponent) {
  Integer out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exponent);
  return out;
}

Integer binomial(unsigned long n, unsigned long k) {
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

}  // namespace detcensus
