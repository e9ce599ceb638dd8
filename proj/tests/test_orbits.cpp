#include "detcensus/enumeration.hpp"
#include "detcensus/orbits.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace detcensus;

namespace {

const auto cube_sum = HomogeneousForm::binary({1, 0, 0, 1});

UnimodularMatrix random_sl2(std::mt19937_64& g, int length) {
  const UnimodularMatrix gens[] = {UnimodularMatrix::from_rows({{0, -1}, {1, 0}}),
                                   UnimodularMatrix::from_rows({{1, 1}, {0, 1}}),
                                   UnimodularMatrix::from_rows({{1, -1}, {0, 1}})};
  UnimodularMatrix w = UnimodularMatrix::identity(2);
  for (int i = 0; i < length; ++i) w = w * gens[oracle::uniform(g, 0, 2)];
  return w;
}

std::vector<oracle::Dense> dense_all(const std::vector<HomogeneousForm>& forms) {
  std::vector<oracle::Dense> out;
  for (const auto& f : forms) out.push_back(f.dense());
  return out;
}

/// Class label per input position.
std::vector<std::size_t> labels_of(const OrbitPartition& p, std::size_t n) {
  std::vector<std::size_t> out(n, ~std::size_t{0});
  for (std::size_t c = 0; c < p.classes.size(); ++c) {
    for (auto i : p.classes[c].member_indices) out[i] = c;
  }
  return out;
}

bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("default entry bound") {
  CHECK(default_entry_bound(1, 3) == 8);
  CHECK(default_entry_bound(2, 2) == 32);
  CHECK(default_entry_bound(2, 4) == 16);
  CHECK(default_entry_bound(100, 3) >= 4 * 27);
}

TEST_CASE("equivalent examples") {
  CHECK(equivalent(cube_sum, cube_sum, 3) == UnimodularMatrix::identity(2));
  const auto sheared = HomogeneousForm::binary({2, 3, 3, 1});
  const auto g = equivalent(cube_sum, sheared, 4);
  REQUIRE(g);
  CHECK(*g == UnimodularMatrix::from_rows({{1, 0}, {1, 1}}));
  CHECK(act(*g, cube_sum) == sheared);
  for (long bound : {1, 4, 16}) CHECK_FALSE(equivalent(cube_sum, HomogeneousForm::binary({1, 0, 0, 2}), bound));
  CHECK_THROWS(equivalent(cube_sum, HomogeneousForm::binary({1, 0, 1}), 3));
}

TEST_CASE("equivalent recovers random SL2(Z) images") {
  auto g = oracle::rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<long> c(4);
    for (auto& x : c) x = oracle::uniform(g, -3, 3);
    const auto f = HomogeneousForm::binary(c);
    if (f.is_zero() || oracle::disc_cubic(c[0], c[1], c[2], c[3]) == 0) continue;
    const auto w = random_sl2(g, static_cast<int>(oracle::uniform(g, 0, 5)));
    const auto h = act(w, f);
    const long bound = std::max<long>(w.max_entry().get_si(), 1);
    const auto found = equivalent(f, h, bound);
    REQUIRE(found);
    CHECK(found->det() == 1);
    CHECK(found->max_entry() <= bound);
    CHECK(act(*found, f) == h);
  }
}

TEST_CASE("equivalent_gl admits orientation reversal") {
  // Reaching the mirror image of a generic cubic needs the reflection.
  const auto f = HomogeneousForm::binary({1, 2, 0, 3});
  const auto mirror = act(UnimodularMatrix::from_rows({{0, 1}, {1, 0}}), f);
  const auto g = equivalent_gl(f, mirror, 4);
  REQUIRE(g);
  CHECK(act(*g, f) == mirror);
}

TEST_CASE("canonical_rep examples and invariance") {
  CHECK(canonical_rep(cube_sum).rep == cube_sum);
  const auto shear = UnimodularMatrix::from_rows({{1, 5}, {0, 1}});
  const auto far = act(shear, cube_sum);
  const auto c = canonical_rep(far);
  CHECK(c.rep == cube_sum);
  CHECK(act(c.witness, far) == c.rep);
  CHECK(canonical_rep(-cube_sum).rep == cube_sum);
  CHECK_THROWS_AS(canonical_rep(HomogeneousForm::binary({0, 1, 0, 0})), std::domain_error);

  auto g = oracle::rng(32);
  for (int trial = 0; trial < 80; ++trial) {
    std::vector<long> coeffs(4);
    for (auto& x : coeffs) x = oracle::uniform(g, -2, 2);
    if (oracle::disc_cubic(coeffs[0], coeffs[1], coeffs[2], coeffs[3]) == 0) continue;
    const auto f = HomogeneousForm::binary(coeffs);
    const auto base = canonical_rep(f, 16);
    CHECK(act(base.witness, f) == base.rep);
    CHECK(compare_forms(base.rep, f) <= 0);
    const auto image = act(random_sl2(g, 3), f);
    CHECK(canonical_rep(image, 16).rep == base.rep);
  }
}

TEST_CASE("compare_forms is a total order led by height") {
  const auto a = HomogeneousForm::binary({1, 0, 0, 1});
  const auto b = HomogeneousForm::binary({1, 0, 0, -1});
  const auto c = HomogeneousForm::binary({2, 0, 0, 1});
  CHECK(compare_forms(a, a) == 0);
  CHECK(compare_forms(a, c) < 0);
  CHECK(compare_forms(c, a) > 0);
  CHECK(compare_forms(a, b) < 0);
  CHECK(compare_forms(b, a) > 0);
}

TEST_CASE("stabilizer examples") {
  const auto identity = UnimodularMatrix::identity(2);
  CHECK(stabilizer(cube_sum, 3) == std::vector<UnimodularMatrix>{identity});

  const auto triangle = HomogeneousForm::binary({0, 1, 1, 0});  // xy(x+y)
  const auto stab = stabilizer(triangle, 3);
  const auto cycle = UnimodularMatrix::from_rows({{0, 1}, {-1, -1}});
  CHECK(std::find(stab.begin(), stab.end(), cycle) != stab.end());
  CHECK(cycle * cycle * cycle == identity);
  // The transpose cycles the roots under the row-vector substitution x -> x g.
  const auto transpose = UnimodularMatrix::from_rows({{0, -1}, {1, -1}});
  CHECK(oracle::substitute(triangle.dense(), 0, 1, -1, -1) == triangle.dense());
  CHECK(act(transpose, triangle) != triangle);

  const auto quartic = HomogeneousForm::binary({1, 0, 0, 0, 1});
  const auto rot = stabilizer(quartic, 2);
  CHECK(std::find(rot.begin(), rot.end(), UnimodularMatrix::from_rows({{0, -1}, {1, 0}})) != rot.end());

  CHECK_THROWS(stabilizer(HomogeneousForm::binary({1, 0, 1}), 2));
  CHECK_THROWS(stabilizer(HomogeneousForm::binary({1, 1, 0, 0}), 2));
}

TEST_CASE("stabilizers verify and are closed within the bound") {
  auto g = oracle::rng(33);
  std::vector<HomogeneousForm> samples{HomogeneousForm::binary({0, 1, 1, 0}), HomogeneousForm::binary({1, 0, 0, 0, 1}),
                                       HomogeneousForm::binary({0, 1, 0, -1, 0}), HomogeneousForm::binary({1, 0, -1, 0})};
  for (int i = 0; i < 10; ++i) {
    std::vector<long> c(4);
    for (auto& x : c) x = oracle::uniform(g, -2, 2);
    if (oracle::disc_cubic(c[0], c[1], c[2], c[3]) != 0) samples.push_back(HomogeneousForm::binary(c));
  }
  for (const auto& f : samples) {
    const long bound = 3;
    const auto stab = stabilizer(f, bound);
    const std::set<UnimodularMatrix> members(stab.begin(), stab.end());
    CHECK(members.count(UnimodularMatrix::identity(2)) == 1);
    CHECK(std::is_sorted(stab.begin(), stab.end()));
    for (const auto& s : stab) {
      CHECK(s.det() == 1);
      CHECK(act(s, f) == f);
      const auto inv = s.inverse();
      if (inv.max_entry() <= bound) CHECK(members.count(inv) == 1);
      for (const auto& t : stab) {
        const auto prod = s * t;
        if (prod.max_entry() <= bound) CHECK(members.count(prod) == 1);
      }
    }
  }
}

TEST_CASE("partition_orbits small cases") {
  CHECK(partition_orbits(std::vector<HomogeneousForm>{}, OrbitGroup::sl2z()).size() == 0);

  const auto w = UnimodularMatrix::from_rows({{2, 1}, {1, 1}});
  const std::vector<HomogeneousForm> pair{cube_sum, act(w, cube_sum)};
  const auto p = partition_orbits(pair, OrbitGroup::sl2z());
  REQUIRE(p.size() == 1);
  CHECK(p.classes[0].members == pair);
  CHECK(!verify_partition(p));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(act(p.classes[0].witnesses[i], p.classes[0].representative) == pair[i]);
  }

  const std::vector<HomogeneousForm> mixed{cube_sum, HomogeneousForm::binary({1, 0, 1})};
  CHECK_THROWS_AS(partition_orbits(mixed, OrbitGroup::sl2z()), std::invalid_argument);
  const std::vector<HomogeneousForm> singular{HomogeneousForm::binary({1, 1, 0, 0})};
  CHECK_THROWS_AS(partition_orbits(singular, OrbitGroup::sl2z()), std::domain_error);
}

TEST_CASE("partition of the disc -27 cubics matches the BFS oracle") {
  CensusQuery q;
  q.d = 3;
  q.B = 2;
  q.constraint = DiscEquals{-27};
  const auto forms = collect_forms(q);
  REQUIRE(!forms.empty());
  const auto oracle_labels = oracle::bfs_components(dense_all(forms), 60);
  const auto p = partition_orbits(forms, OrbitGroup::sl2z());
  CHECK(p.size() == oracle::distinct(oracle_labels));
  CHECK(same_partition(labels_of(p, forms.size()), oracle_labels));
  CHECK(!verify_partition(p));
}

TEST_CASE("partition methods agree with each other and with the BFS oracle") {
  CensusQuery q;
  q.d = 3;
  q.B = 1;
  const auto forms = collect_forms(q);
  const auto oracle_labels = oracle::bfs_components(dense_all(forms), 40);
  for (auto method : {PartitionMethod::Canonical, PartitionMethod::Pairwise}) {
    PartitionOptions options;
    options.method = method;
    const auto p = partition_orbits(forms, OrbitGroup::sl2z(), options);
    CHECK(same_partition(labels_of(p, forms.size()), oracle_labels));
    CHECK(!verify_partition(p));
    for (const auto& c : p.classes) {
      for (const auto& m : c.members) CHECK(discriminant_binary(m) == discriminant_binary(c.representative));
    }
  }
  const auto gl = partition_orbits(forms, OrbitGroup::gl2z());
  const auto gl_oracle = oracle::bfs_components(dense_all(forms), 40, true);
  CHECK(same_partition(labels_of(gl, forms.size()), gl_oracle));
  CHECK(!verify_partition(gl));
}

TEST_CASE("partition ordering is deterministic and input-ordered") {
  CensusQuery q;
  q.d = 3;
  q.B = 1;
  const auto forms = collect_forms(q);
  const auto a = partition_orbits(forms, OrbitGroup::sl2z());
  const auto b = partition_orbits(forms, OrbitGroup::sl2z());
  REQUIRE(a.size() == b.size());
  std::size_t last_first = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.classes[i].representative == b.classes[i].representative);
    CHECK(a.classes[i].member_indices == b.classes[i].member_indices);
    if (i > 0) CHECK(a.classes[i].member_indices.front() > last_first);
    last_first = a.classes[i].member_indices.front();
  }
}

TEST_CASE("verify_partition detects a corrupted witness") {
  const std::vector<HomogeneousForm> pair{cube_sum, HomogeneousForm::binary({2, 3, 3, 1})};
  auto p = partition_orbits(pair, OrbitGroup::sl2z());
  REQUIRE(p.size() == 1);
  p.classes[0].witnesses[1] = UnimodularMatrix::from_rows({{1, 1}, {0, 1}});
  CHECK(verify_partition(p));
}

TEST_CASE("S-minimal models") {
  const PrimeSet s{2, 3};
  const auto f = HomogeneousForm::binary({16, 0, 0, 1});
  const auto models = s_minimal_models(f, s);
  REQUIRE(!models.empty());
  for (const auto& m : models) {
    CHECK(act(m.transform, f) == m.form.scaled(m.scale.get_num()).divided(m.scale.get_den()));
    CHECK(s_unit_factor(m.transform.det(), s));
    CHECK(abs(discriminant_binary(m.form)) <= abs(discriminant_binary(f)));
  }
  CHECK(abs(discriminant_binary(models.front().form)) == 108);
  CHECK_THROWS_AS(s_minimal_models(HomogeneousForm::binary({1, 0, 0, 5}), s), std::domain_error);
}

TEST_CASE("GL2(Z[1/S]) partition") {
  const PrimeSet s{2};
  const auto two = HomogeneousForm::binary({2, 0, 0, 1});
  const auto sixteen = HomogeneousForm::binary({16, 0, 0, 1});
  const std::vector<HomogeneousForm> forms{two, sixteen, HomogeneousForm::binary({1, 0, 0, 1}).scaled(1)};
  const auto p3 = partition_orbits(forms, OrbitGroup::gl2zs(PrimeSet{2, 3}));
  CHECK(p3.size() == 2);
  CHECK(labels_of(p3, 3)[0] == labels_of(p3, 3)[1]);
  CHECK(!verify_partition(p3));

  // Random S-integral transforms of a fixed form stay in one class.
  auto g = oracle::rng(34);
  const auto base = HomogeneousForm::binary({1, 1, -2, 0});  // x (x - y)(x + 2y), disc 36
  std::vector<HomogeneousForm> images{base};
  for (int i = 0; i < 8; ++i) {
    auto m = IntegralMatrix(random_sl2(g, 3));
    const std::vector<Integer> diag{oracle::uniform(g, 0, 1) ? 2 : 1, 0, 0, oracle::uniform(g, 0, 1) ? 3 : 1};
    const auto scaled = substitute(diag, act(m, base));
    images.push_back(scaled.divided(scaled.content()));
  }
  const auto p = partition_orbits(images, OrbitGroup::gl2zs(PrimeSet{2, 3}));
  CHECK(p.size() == 1);
  CHECK(!verify_partition(p));
  CHECK_THROWS_AS(partition_orbits(std::vector<HomogeneousForm>{HomogeneousForm::binary({1, 0, 0, 5})},
                                   OrbitGroup::gl2zs(s)),
                  std::domain_error);
}
