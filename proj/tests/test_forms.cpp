#include "detcensus/forms.hpp"
#include "detcensus/linalg.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace detcensus;

namespace {

UnimodularMatrix random_word(std::mt19937_64& g, int length) {
  const UnimodularMatrix gens[] = {UnimodularMatrix::from_rows({{0, -1}, {1, 0}}),
                                   UnimodularMatrix::from_rows({{1, 1}, {0, 1}}),
                                   UnimodularMatrix::from_rows({{1, -1}, {0, 1}})};
  UnimodularMatrix w = UnimodularMatrix::identity(2);
  for (int i = 0; i < length; ++i) w = w * gens[oracle::uniform(g, 0, 2)];
  return w;
}

HomogeneousForm random_binary(std::mt19937_64& g, int d, long B) {
  std::vector<long> c(static_cast<std::size_t>(d) + 1);
  for (auto& x : c) x = oracle::uniform(g, -B, B);
  return HomogeneousForm::binary(c);
}

}  // namespace

TEST_CASE("monomials_of_degree lists grevlex monomials") {
  const auto lines = monomials_of_degree(2, 1);
  CHECK(lines == std::vector<MultiIndex>{{1, 0}, {0, 1}});
  const auto conics = monomials_of_degree(3, 2);
  CHECK(conics == std::vector<MultiIndex>{{2, 0, 0}, {1, 1, 0}, {0, 2, 0}, {1, 0, 1}, {0, 1, 1}, {0, 0, 2}});
  CHECK(monomials_of_degree(3, 3).size() == 10);
}

TEST_CASE("monomial count and uniqueness") {
  for (int n = 1; n <= 4; ++n) {
    for (int d = 0; d <= 6; ++d) {
      const auto all = monomials_of_degree(n, d);
      CHECK(Integer(static_cast<unsigned long>(all.size())) == oracle::binom(n + d - 1, d));
      std::set<MultiIndex> unique(all.begin(), all.end());
      CHECK(unique.size() == all.size());
      for (const auto& m : all) CHECK(total_degree(m) == d);
      for (std::size_t i = 1; i < all.size(); ++i) CHECK(GrevlexFirst{}(all[i - 1], all[i]));
    }
  }
}

TEST_CASE("evaluate examples") {
  const Integer origin[] = {0, 0};
  CHECK(evaluate(HomogeneousForm::binary({1, 0, 1}), origin) == 0);
  const Integer antipode[] = {1, -1};
  CHECK(evaluate(HomogeneousForm::binary({1, 0, 0, 1}), antipode) == 0);
  const Integer point[] = {2, 3};
  CHECK(evaluate(HomogeneousForm::binary({0, 1, 1}), point) == 15);
}

TEST_CASE("forms store only nonzero coefficients of the right degree") {
  HomogeneousForm f(3, 2);
  f.set({1, 1, 0}, 0);
  CHECK(f.is_zero());
  f.set({2, 0, 0}, -1);
  f.set({0, 1, 1}, 1);
  CHECK(f.terms().size() == 2);
  CHECK(f.leading_monomial() == MultiIndex{2, 0, 0});
  CHECK_THROWS_AS(f.set({1, 0, 0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(f.set({1, 1}, 1), std::invalid_argument);
  CHECK(f.height() == 1);
  CHECK(f.is_primitive());
  CHECK(f.scaled(6).content() == 6);
  CHECK(f.scaled(6).divided(3) == f.scaled(2));
}

TEST_CASE("dense order and derivatives") {
  const auto f = HomogeneousForm::binary({1, 2, 3, 4});
  CHECK(f.dense() == std::vector<Integer>{1, 2, 3, 4});
  CHECK(f.coeff({2, 1}) == 2);
  CHECK(f.derivative(0) == HomogeneousForm::binary({3, 4, 3}));
  CHECK(f.derivative(1) == HomogeneousForm::binary({2, 6, 12}));
  const auto product = multiply(HomogeneousForm::binary({1, 1}), HomogeneousForm::binary({1, -1}));
  CHECK(product == HomogeneousForm::binary({1, 0, -1}));
}

TEST_CASE("act examples") {
  const auto xy = HomogeneousForm::binary({0, 1, 0});
  CHECK(act(UnimodularMatrix::identity(2), xy) == xy);
  CHECK(act(UnimodularMatrix::from_rows({{1, 1}, {0, 1}}), xy) == HomogeneousForm::binary({0, 1, 1}));
  const auto sum = HomogeneousForm::binary({1, 0, 1});
  CHECK(act(UnimodularMatrix::from_rows({{0, -1}, {1, 0}}), sum) == sum);
  const auto cube = HomogeneousForm::binary({1, 0, 0, 1});
  CHECK(act(UnimodularMatrix::from_rows({{1, 0}, {1, 1}}), cube) == HomogeneousForm::binary({2, 3, 3, 1}));
}

TEST_CASE("act agrees with direct expansion") {
  auto g = oracle::rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = static_cast<int>(oracle::uniform(g, 1, 6));
    const auto f = random_binary(g, d, 9);
    const auto w = random_word(g, static_cast<int>(oracle::uniform(g, 0, 10)));
    const auto expected = oracle::substitute(f.dense(), w.at(0, 0).get_si(), w.at(0, 1).get_si(),
                                             w.at(1, 0).get_si(), w.at(1, 1).get_si());
    CHECK(act(w, f).dense() == expected);
  }
}

TEST_CASE("act is a right action and commutes with evaluation") {
  auto g = oracle::rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = static_cast<int>(oracle::uniform(g, 1, 5));
    const auto f = random_binary(g, d, 7);
    const auto a = random_word(g, 6), b = random_word(g, 6);
    CHECK(act(a * b, f) == act(b, act(a, f)));
    const Integer x[] = {oracle::uniform(g, -20, 20), oracle::uniform(g, -20, 20)};
    const Integer ax[] = {a.at(0, 0) * x[0] + a.at(0, 1) * x[1], a.at(1, 0) * x[0] + a.at(1, 1) * x[1]};
    CHECK(evaluate(act(a, f), x) == evaluate(f, ax));
  }
}

TEST_CASE("act on ternary forms") {
  HomogeneousForm conic(3, 2);
  conic.set({0, 1, 1}, 1);
  conic.set({2, 0, 0}, -1);
  const auto g = UnimodularMatrix::from_rows({{1, 0, 0}, {2, 1, 0}, {0, 0, 1}});
  const auto image = act(g, conic);
  auto gen = oracle::rng(13);
  for (int i = 0; i < 20; ++i) {
    const Integer x[] = {oracle::uniform(gen, -9, 9), oracle::uniform(gen, -9, 9), oracle::uniform(gen, -9, 9)};
    const Integer gx[] = {x[0], 2 * x[0] + x[1], x[2]};
    CHECK(evaluate(image, x) == evaluate(conic, gx));
  }
}

TEST_CASE("projective points") {
  CHECK(ProjectivePoint::normalize({0, 0, 1}).height() == 1);
  CHECK(ProjectivePoint::normalize({1, 2, 3}).height() == 3);
  const auto p = ProjectivePoint::normalize({2, 4, 6});
  CHECK(p == ProjectivePoint::normalize({1, 2, 3}));
  CHECK(p.height() == 3);
  CHECK(ProjectivePoint::normalize({0, 0, -5}) == ProjectivePoint::normalize({0, 0, 1}));
  CHECK(ProjectivePoint::normalize({1, 0, 0}).coords() == std::vector<Integer>{1, 0, 0});
  CHECK_THROWS_AS(ProjectivePoint::normalize({0, 0, 0}), std::invalid_argument);

  auto g = oracle::rng(14);
  for (int i = 0; i < 200; ++i) {
    const long x = oracle::uniform(g, -30, 30), y = oracle::uniform(g, -30, 30), z = oracle::uniform(g, 1, 30);
    const long lambda = oracle::uniform(g, 1, 12) * (i % 2 ? -1 : 1);
    const auto base = ProjectivePoint::normalize({x, y, z});
    const auto scaled = ProjectivePoint::normalize({lambda * x, lambda * y, lambda * z});
    CHECK(base == scaled);
    CHECK(base.height() == scaled.height());
    Integer gcd_all = 0;
    for (const auto& c : base.coords()) gcd_all = gcd(gcd_all, c);
    CHECK(gcd_all == 1);
  }
}

TEST_CASE("unimodular and integral matrices") {
  CHECK_THROWS_AS(UnimodularMatrix::from_rows({{2, 0}, {0, 1}}), std::invalid_argument);
  const auto g = UnimodularMatrix::from_rows({{2, 1}, {1, 1}});
  CHECK(g.det() == 1);
  CHECK(g * g.inverse() == UnimodularMatrix::identity(2));
  const auto r = UnimodularMatrix::from_rows({{0, 1}, {1, 0}});
  CHECK(r.det() == -1);
  const auto big = UnimodularMatrix::from_rows({{1, 2, 3}, {0, 1, 4}, {0, 0, 1}});
  CHECK(big * big.inverse() == UnimodularMatrix::identity(3));
  CHECK(big.max_entry() == 4);

  CHECK_THROWS_AS(IntegralMatrix(2, {1, 2, 2, 4}), std::invalid_argument);
  const IntegralMatrix h(2, {3, 1, 0, 1});
  CHECK(h.det() == 3);
  CHECK_FALSE(h.unimodular().has_value());
  CHECK(IntegralMatrix(g).unimodular() == g);
  const auto f = HomogeneousForm::binary({1, 0, 1});
  CHECK(act(h, f) == HomogeneousForm::binary({9, 6, 2}));
}

TEST_CASE("prime sets") {
  const PrimeSet s{3, 2, 3};
  CHECK(s.primes() == std::vector<Integer>{2, 3});
  CHECK(s.contains(3));
  CHECK_FALSE(s.contains(5));
  CHECK_THROWS_AS((PrimeSet{2, 4}), std::invalid_argument);
  CHECK(PrimeSet{}.empty());
}

TEST_CASE("integer helpers") {
  CHECK(valuation(Integer(48), 2) == 4);
  CHECK(valuation(Integer(-27), 3) == 3);
  CHECK(is_prime(Integer(97)));
  CHECK_FALSE(is_prime(Integer(91)));
  CHECK(next_prime(Integer(23)) == 29);
  CHECK(parse_integer("-120") == -120);
  CHECK_THROWS_AS(parse_integer("12a"), std::invalid_argument);
  CHECK_THROWS_AS(parse_integer(""), std::invalid_argument);
  const Integer big = power(Integer(2), 120);
  CHECK(from_int128(to_int128(big)) == big);
  CHECK_THROWS(to_int128(power(Integer(2), 127)));
  CHECK(binomial(10, 3) == 120);
}

TEST_CASE("determinant and rank against the Leibniz expansion") {
  auto g = oracle::rng(15);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = static_cast<std::size_t>(oracle::uniform(g, 1, 5));
    IntMatrix m(n, n);
    std::vector<std::vector<Integer>> rows(n, std::vector<Integer>(n));
    const bool singular = trial % 5 == 0 && n > 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        rows[i][j] = singular && i == n - 1 ? rows[0][j] * 2 : Integer(oracle::uniform(g, -9, 9));
        m(i, j) = rows[i][j];
      }
    }
    const Integer det = oracle::leibniz_det(rows);
    CHECK(determinant(m) == det);
    if (det != 0) CHECK(rank(m) == n);
    if (singular) CHECK(rank(m) < n);
  }
}

TEST_CASE("kernel vectors are annihilated and span the null space") {
  auto g = oracle::rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = static_cast<std::size_t>(oracle::uniform(g, 1, 5));
    const std::size_t c = static_cast<std::size_t>(oracle::uniform(g, 1, 6));
    IntMatrix m(r, c);
    for (auto& x : m.data) x = oracle::uniform(g, -3, 3);
    const auto basis = kernel(m);
    CHECK(basis.size() == c - rank(m));
    for (const auto& v : basis) {
      const auto w = primitive_integer_vector(v);
      for (std::size_t i = 0; i < r; ++i) {
        Integer dot = 0;
        for (std::size_t j = 0; j < c; ++j) dot += m(i, j) * w[j];
        CHECK(dot == 0);
      }
      Integer content = 0;
      for (const auto& x : w) content = gcd(content, x);
      CHECK(content == 1);
      CHECK(*std::find_if(w.begin(), w.end(), [](const Integer& x) { return x != 0; }) > 0);
    }
  }
}

TEST_CASE("rational inverse") {
  IntMatrix m(2, 2);
  m.data = {2, 1, 1, 1};
  CHECK(inverse_rational(m) == std::vector<Rational>{1, -1, -1, 2});
  m.data = {1, 2, 2, 4};
  CHECK_THROWS(inverse_rational(m));
}
