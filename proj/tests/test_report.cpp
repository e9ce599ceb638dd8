#include "detcensus/report.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace detcensus;

TEST_CASE("form JSON round trip") {
  auto g = oracle::rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = static_cast<int>(oracle::uniform(g, 2, 3));
    const int d = static_cast<int>(oracle::uniform(g, 1, 4));
    HomogeneousForm f(n, d);
    for (const auto& m : monomials_of_degree(n, d)) {
      if (oracle::uniform(g, 0, 2) == 0) f.add(m, Integer(oracle::uniform(g, -1000, 1000)) * Integer("123456789012345678901"));
    }
    const Json j = form_to_json(f);
    CHECK(form_from_json(j) == f);
    CHECK(form_from_json(Json::parse(j.dump())) == f);
  }
  const Json cube = form_to_json(HomogeneousForm::binary({1, 0, 0, 1}));
  CHECK(cube.dump() == R"({"n":2,"d":3,"coeffs":{"3,0":"1","0,3":"1"}})");

  CHECK_THROWS_AS(form_from_json(Json::parse(R"({"n":2,"coeffs":{}})")), ParseError);
  CHECK_THROWS_AS(form_from_json(Json::parse(R"({"n":2,"d":3,"coeffs":{"2,0":"1"}})")), ParseError);
  CHECK_THROWS_AS(form_from_json(Json::parse(R"({"n":2,"d":3,"coeffs":{"3,0":"x"}})")), ParseError);
  CHECK_THROWS_AS(form_from_json(Json::parse(R"([1,2])")), ParseError);
}

TEST_CASE("read_forms accepts arrays and JSON lines") {
  const auto a = form_to_json(HomogeneousForm::binary({1, 0, 0, 1}));
  const auto b = form_to_json(HomogeneousForm::binary({2, 3, 3, 1}));
  const auto from_array = read_forms(Json::array({a, b}).dump());
  const auto from_lines = read_forms(a.dump() + "\n\n" + b.dump() + "\n");
  REQUIRE(from_array.size() == 2);
  CHECK(from_array == from_lines);
  CHECK(read_forms("").empty());
  CHECK_THROWS_AS(read_forms("{not json"), ParseError);
}

TEST_CASE("points and matrices") {
  const auto p = ProjectivePoint::normalize({3, -4, 5});
  CHECK(point_from_json(point_to_json(p)) == p);
  const IntegralMatrix m(2, {2, 1, 0, 3});
  CHECK(matrix_to_json(m).dump() == "[2,1,0,3]");
  CHECK(matrix_from_json(matrix_to_json(m)) == m);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[1,2,3]")), ParseError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[1,2,2,4]")), ParseError);
}

TEST_CASE("partition JSON round trip") {
  CensusQuery q;
  q.d = 3;
  q.B = 2;
  q.constraint = DiscEquals{-27};
  const auto forms = collect_forms(q);
  const auto p = partition_orbits(forms, OrbitGroup::sl2z());
  const Json j = partition_to_json(p);
  CHECK(j["group"] == "sl2z");
  CHECK(j["entry_bound"] == p.entry_bound);
  REQUIRE(j["classes"].size() == p.size());
  CHECK(j["classes"][0]["size"] == p.classes[0].members.size());
  const auto back = partition_from_json(Json::parse(j.dump()));
  REQUIRE(back.size() == p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(back.classes[i].representative == p.classes[i].representative);
    CHECK(back.classes[i].members == p.classes[i].members);
    CHECK(back.classes[i].member_indices == p.classes[i].member_indices);
    CHECK(back.classes[i].witnesses == p.classes[i].witnesses);
  }
  CHECK(!verify_partition(back));
  CHECK(partition_to_json(back).dump() == j.dump());

  const std::vector<HomogeneousForm> s_forms{HomogeneousForm::binary({2, 0, 0, 1}), HomogeneousForm::binary({16, 0, 0, 1})};
  const auto sp = partition_orbits(s_forms, OrbitGroup::gl2zs(PrimeSet{2, 3}));
  const auto sj = partition_to_json(sp);
  CHECK(sj["primes"] == Json::array({2, 3}));
  const auto sback = partition_from_json(sj);
  CHECK(sback.group.kind == GroupKind::GL2ZS);
  CHECK(!verify_partition(sback));
  CHECK(partition_to_json(sback).dump() == sj.dump());
}

TEST_CASE("cover JSON round trip") {
  HomogeneousForm conic(3, 2);
  conic.add({2, 0, 0}, 1);
  conic.add({0, 2, 0}, 1);
  conic.add({0, 0, 2}, -1);
  const PlaneCurve curve(conic);
  const auto c = cover(curve, 12, 2);
  const auto j = cover_to_json(c);
  const auto back = cover_from_json(Json::parse(j.dump()));
  CHECK(back.parameters.p == c.parameters.p);
  CHECK(back.parameters.e == c.parameters.e);
  CHECK(back.point_count == c.point_count);
  REQUIRE(back.classes.size() == c.classes.size());
  for (std::size_t i = 0; i < c.classes.size(); ++i) {
    CHECK(back.classes[i].cls.members == c.classes[i].cls.members);
    CHECK(back.classes[i].cls.center == c.classes[i].cls.center);
    CHECK(back.classes[i].divisor == c.classes[i].divisor);
  }
  CHECK(verify_cover(curve, back).ok());
  CHECK(cover_to_json(back).dump() == j.dump());
}

TEST_CASE("fixed-point logarithm") {
  const Integer one = Integer(1) << 64;
  CHECK(log2_fixed(1) == 0);
  CHECK(log2_fixed(2) == one);
  CHECK(log2_fixed(Integer(1) << 300) == 300 * one);
  for (long n : {3L, 5L, 10L, 17L, 80L, 1000L, 123456789L}) {
    const Integer v = log2_fixed(n);
    const long double approx = static_cast<long double>(v.get_d()) / std::ldexp(1.0L, 64);
    CHECK(std::fabs(static_cast<double>(approx - std::log2(static_cast<long double>(n)))) < 1e-12);
    CHECK(v < log2_fixed(n + 1));
  }
  CHECK_THROWS_AS(log2_fixed(0), std::domain_error);
}

TEST_CASE("log-log slope fit") {
  std::vector<std::pair<Integer, Integer>> cube;
  for (long k : {1, 2, 3, 4}) cube.emplace_back(Integer(1) << k, Integer(1) << (3 * k));
  CHECK(fit_loglog_slope(cube) == Rational(3));

  std::vector<std::pair<Integer, Integer>> flat{{10, 17}, {20, 17}, {40, 17}, {80, 17}};
  CHECK(fit_loglog_slope(flat) == Rational(0));

  std::vector<std::pair<Integer, Integer>> quartic;
  for (long B : {10, 20, 40, 80}) quartic.emplace_back(B, Integer(B) * B * B * B);
  const auto s = fit_loglog_slope(quartic);
  REQUIRE(s);
  CHECK(format_decimal(*s) == "4.000");

  CHECK_FALSE(fit_loglog_slope({{10, 5}}));
  CHECK_FALSE(fit_loglog_slope({{10, 0}, {20, 5}}));
  CHECK_FALSE(fit_loglog_slope({{10, 5}, {10, 7}}));
}

TEST_CASE("decimal formatting") {
  CHECK(format_decimal(Rational(1)) == "1.000");
  CHECK(format_decimal(Rational(-1, 4)) == "-0.250");
  CHECK(format_decimal(Rational(1, 2000)) == "0.001");
  CHECK(format_decimal(Rational(-1, 2000)) == "-0.001");
  CHECK(format_decimal(Rational(1, 3000)) == "0.000");
  CHECK(format_decimal(Rational(-1, 3000)) == "0.000");
  CHECK(format_decimal(Rational(22, 7), 0) == "3");
  CHECK(format_decimal(Rational(123456, 10), 1) == "12345.6");
}

TEST_CASE("sparsity report") {
  SparsityOptions options;
  options.record_timing = false;
  const auto constraint = parse_constraint("sunit=2,3");
  const auto group = parse_group("gl2zs", PrimeSet{2, 3});
  const auto a = run_sparsity(3, constraint, {1, 2, 4}, group, options);
  const auto b = run_sparsity(3, constraint, {1, 2, 4}, group, options);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_json().dump() == b.to_json().dump());
  REQUIRE(a.rows.size() == 3);
  for (const auto& row : a.rows) {
    CHECK(row.raw_count == count_forms(CensusQuery{3, row.B, DiscNonzero{}, true}));
    CHECK(row.wall_ms == 0);
  }
  CHECK(a.to_csv().starts_with("B,raw_count,orbit_count,wall_ms\n1,"));
  CHECK(SparsityReport::rows_from_csv(a.to_csv()) == a.rows);
  const auto back = SparsityReport::from_json(Json::parse(a.to_json().dump()));
  CHECK(back.rows == a.rows);
  CHECK(back.fitted_slope_raw == a.fitted_slope_raw);
  CHECK(back.fitted_slope_orbits == a.fitted_slope_orbits);
  REQUIRE(a.fitted_slope_raw);
  CHECK(*a.fitted_slope_raw > 2);

  CHECK_THROWS_AS(run_sparsity(3, constraint, {4, 2}, group, options), std::invalid_argument);
  CHECK_THROWS_AS(run_sparsity(3, constraint, {}, group, options), std::invalid_argument);
  CHECK_THROWS_AS(SparsityReport::rows_from_csv("B,raw\n"), ParseError);
  CHECK_THROWS_AS(SparsityReport::rows_from_csv("B,raw_count,orbit_count,wall_ms\n1,2,3\n"), ParseError);
}

TEST_CASE("constraint and group parsing") {
  CHECK(std::holds_alternative<DiscNonzero>(parse_constraint("nonzero")));
  CHECK(std::get<DiscEquals>(parse_constraint("disc=-27")).value == -27);
  CHECK(std::get<DiscSUnit>(parse_constraint("sunit=2,3")).primes.primes() == std::vector<Integer>{2, 3});
  CHECK(std::get<DiscSUnit>(parse_constraint("sunit=")).primes.empty());
  CHECK_THROWS_AS(parse_constraint("disc=0"), ParseError);
  CHECK_THROWS_AS(parse_constraint("disc=abc"), ParseError);
  CHECK_THROWS_AS(parse_constraint("sunit=4"), ParseError);
  CHECK_THROWS_AS(parse_constraint("bogus"), ParseError);
  CHECK(parse_group("sl2z", {}).kind == GroupKind::SL2Z);
  CHECK(parse_group("gl2zs", PrimeSet{5}).primes.primes() == std::vector<Integer>{5});
  CHECK_THROWS_AS(parse_group("gl3z", {}), ParseError);
}
