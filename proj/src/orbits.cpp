#include "detcensus/orbits.hpp"

#include "detcensus/invariants.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <set>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace detcensus {

std::string OrbitGroup::name() const {
  switch (kind) {
    case GroupKind::SL2Z:
      return "SL2(Z)";
    case GroupKind::GL2Z:
      return "GL2(Z)";
    case GroupKind::GL2ZS:
      return "GL2(Z[1/S]) S=" + primes.to_string();
  }
  return "?";
}

long default_entry_bound(const Integer& height, int d) {
  if (d < 1) throw std::invalid_argument("default_entry_bound: degree must be positive");
  // 2^m > 4 (2H)^{2/d}  <=>  2^{(m-2) d} > 4 H^2
  const Integer target = 4 * height * height;
  for (long m = 0;; ++m) {
    if (m >= 2 && power(Integer(2), static_cast<unsigned long>((m - 2) * d)) > target) {
      return 1L << m;
    }
  }
}

namespace {

constexpr int kMaxBinaryDegree = 15;

using Matrix2 = std::array<long, 4>;  // row-major [[p, q], [r, s]]

template <class Int>
struct Binary {
  int d = 0;
  std::array<Int, kMaxBinaryDegree + 1> a{};

  Int height() const {
    Int h = 0;
    for (int i = 0; i <= d; ++i) {
      const Int m = abs_value(a[static_cast<std::size_t>(i)]);
      if (m > h) h = m;
    }
    return h;
  }

  bool operator==(const Binary& other) const {
    if (d != other.d) return false;
    for (int i = 0; i <= d; ++i) {
      if (a[static_cast<std::size_t>(i)] != other.a[static_cast<std::size_t>(i)]) return false;
    }
    return true;
  }

  Binary negated() const {
    Binary out = *this;
    for (int i = 0; i <= d; ++i) out.a[static_cast<std::size_t>(i)] = -a[static_cast<std::size_t>(i)];
    return out;
  }
};

template <class Int>
Int convert(const Integer& x);
template <>
int128 convert<int128>(const Integer& x) {
  return to_int128(x);
}
template <>
Integer convert<Integer>(const Integer& x) {
  return x;
}

Integer to_big(int128 x) { return from_int128(x); }
Integer to_big(const Integer& x) { return x; }

std::size_t hash_value(int128 x) {
  const auto u = static_cast<unsigned __int128>(x);
  return std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(u) ^
                                    (static_cast<std::uint64_t>(u >> 64) * 0x9E3779B97F4A7C15ULL));
}
std::size_t hash_value(const Integer& x) {
  return std::hash<long>{}(mpz_get_si(x.get_mpz_t())) ^ static_cast<std::size_t>(mpz_sgn(x.get_mpz_t()) + 7);
}

template <class Int>
struct BinaryHash {
  std::size_t operator()(const Binary<Int>& f) const {
    std::size_t h = static_cast<std::size_t>(f.d);
    for (int i = 0; i <= f.d; ++i) {
      h = h * 1000003u ^ hash_value(f.a[static_cast<std::size_t>(i)]);
    }
    return h;
  }
};

template <class Int>
Binary<Int> to_binary(const HomogeneousForm& f) {
  if (f.vars() != 2) throw std::invalid_argument("orbit operations require binary forms");
  if (f.degree() > kMaxBinaryDegree) throw std::invalid_argument("binary form degree too large");
  Binary<Int> out;
  out.d = f.degree();
  const auto dense = f.dense();
  for (int i = 0; i <= out.d; ++i) {
    out.a[static_cast<std::size_t>(i)] = convert<Int>(dense[static_cast<std::size_t>(i)]);
  }
  return out;
}

template <class Int>
HomogeneousForm to_form(const Binary<Int>& f) {
  std::vector<Integer> dense;
  for (int i = 0; i <= f.d; ++i) dense.push_back(to_big(f.a[static_cast<std::size_t>(i)]));
  return HomogeneousForm::from_dense(2, f.d, dense);
}

UnimodularMatrix to_matrix(const Matrix2& g) {
  return UnimodularMatrix(2, std::vector<Integer>{g[0], g[1], g[2], g[3]});
}

template <class Int>
Int evaluate_at(const Binary<Int>& f, long x, long y) {
  const Int xi = x;
  const Int yi = y;
  Int acc = f.a[0];
  Int ypow = 1;
  for (int i = 1; i <= f.d; ++i) {
    ypow *= yi;
    acc = acc * xi + f.a[static_cast<std::size_t>(i)] * ypow;
  }
  return acc;
}

// x -> p x + q y, y -> r x + s y.
template <class Int>
Binary<Int> transform(const Binary<Int>& f, const Matrix2& g) {
  const int d = f.d;
  using Row = std::array<Int, kMaxBinaryDegree + 1>;
  std::array<Row, kMaxBinaryDegree + 1> first{};
  std::array<Row, kMaxBinaryDegree + 1> second{};
  auto build = [d](std::array<Row, kMaxBinaryDegree + 1>& pows, long u, long v) {
    pows[0][0] = 1;
    for (int e = 1; e <= d; ++e) {
      auto& cur = pows[static_cast<std::size_t>(e)];
      const auto& prev = pows[static_cast<std::size_t>(e - 1)];
      for (int j = 0; j <= e; ++j) {
        Int c = 0;
        if (j < e) c += prev[static_cast<std::size_t>(j)] * Int(u);
        if (j > 0) c += prev[static_cast<std::size_t>(j - 1)] * Int(v);
        cur[static_cast<std::size_t>(j)] = c;
      }
    }
  };
  build(first, g[0], g[1]);
  build(second, g[2], g[3]);
  Binary<Int> out;
  out.d = d;
  for (int i = 0; i <= d; ++i) {
    const Int& c = f.a[static_cast<std::size_t>(i)];
    if (c == 0) continue;
    const auto& p1 = first[static_cast<std::size_t>(d - i)];
    const auto& p2 = second[static_cast<std::size_t>(i)];
    for (int j1 = 0; j1 <= d - i; ++j1) {
      if (p1[static_cast<std::size_t>(j1)] == 0) continue;
      const Int left = c * p1[static_cast<std::size_t>(j1)];
      for (int j2 = 0; j2 <= i; ++j2) {
        out.a[static_cast<std::size_t>(j1 + j2)] += left * p2[static_cast<std::size_t>(j2)];
      }
    }
  }
  return out;
}

template <class Int>
int compare_binary(const Binary<Int>& x, const Binary<Int>& y) {
  const Int hx = x.height();
  const Int hy = y.height();
  if (hx != hy) return hx < hy ? -1 : 1;
  for (int i = 0; i <= x.d; ++i) {
    const Int& u = x.a[static_cast<std::size_t>(i)];
    const Int& v = y.a[static_cast<std::size_t>(i)];
    const Int mu = abs_value(u);
    const Int mv = abs_value(v);
    if (mu != mv) return mu < mv ? -1 : 1;
    if (u != v) return u > 0 ? -1 : 1;
  }
  return 0;
}

Matrix2 multiply(const Matrix2& x, const Matrix2& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
          x[2] * y[1] + x[3] * y[3]};
}

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
long ceil_div(long a, long b) { return -floor_div(-a, b); }

// x * a + y * c = gcd(a, c)
long extended_gcd(long a, long c, long& x, long& y) {
  long old_r = a, r = c, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const long q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
    std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  x = old_s;
  y = old_t;
  return old_r;
}

// Columns (a, c) with |a|, |c| <= bound, gcd 1 and accept(f(a, c)).
template <class Int, class Accept>
std::vector<std::pair<long, long>> candidate_columns(const Binary<Int>& f, long bound,
                                                     Accept accept) {
  std::vector<std::pair<long, long>> out;
  for (long a = -bound; a <= bound; ++a) {
    for (long c = -bound; c <= bound; ++c) {
      if (!accept(evaluate_at(f, a, c))) continue;
      if (std::gcd(a, c) != 1) continue;
      out.emplace_back(a, c);
    }
  }
  return out;
}

class ColumnSet {
 public:
  ColumnSet(long bound, const std::vector<std::pair<long, long>>& columns)
      : bound_(bound), width_(2 * bound + 1), bits_(static_cast<std::size_t>(width_ * width_), 0) {
    for (const auto& [a, c] : columns) bits_[index(a, c)] = 1;
  }
  bool contains(long a, long c) const {
    if (a < -bound_ || a > bound_ || c < -bound_ || c > bound_) return false;
    return bits_[index(a, c)] != 0;
  }

 private:
  std::size_t index(long a, long c) const {
    return static_cast<std::size_t>((a + bound_) * width_ + (c + bound_));
  }
  long bound_;
  long width_;
  std::vector<char> bits_;
};

// Calls visit(g) for every matrix [[a, q], [c, s]] with first column from
// `firsts`, second column from `seconds`, determinant in dets and entries
// bounded by `bound`.
template <class Visit>
void pair_columns(const std::vector<std::pair<long, long>>& firsts, const ColumnSet& seconds,
                  long bound, bool allow_negative_det, Visit visit) {
  for (const auto& [a, c] : firsts) {
    long x = 0, y = 0;
    extended_gcd(a, c, x, y);  // a x + c y = 1
    for (long det : {1L, -1L}) {
      if (det == -1 && !allow_negative_det) continue;
      // a s - q c = det with (q, s) = (-det y, det x) + t (a, c)
      const long q0 = -det * y;
      const long s0 = det * x;
      long lo = -bound * 4 - 4;
      long hi = bound * 4 + 4;
      auto restrict = [&](long base, long step) {
        if (step == 0) {
          if (base < -bound || base > bound) hi = lo - 1;
          return;
        }
        long t1, t2;
        if (step > 0) {
          t1 = ceil_div(-bound - base, step);
          t2 = floor_div(bound - base, step);
        } else {
          t1 = ceil_div(bound - base, step);
          t2 = floor_div(-bound - base, step);
        }
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
      };
      restrict(q0, a);
      restrict(s0, c);
      for (long t = lo; t <= hi; ++t) {
        const long q = q0 + t * a;
        const long s = s0 + t * c;
        if (!seconds.contains(q, s)) continue;
        visit(Matrix2{a, q, c, s});
      }
    }
  }
}

// Every g with entries <= bound (det 1, or +-1) such that height(g.f) <= cap.
template <class Int, class Visit>
void enumerate_transforms(const Binary<Int>& f, long bound, const Int& cap, bool allow_negative_det,
                          Visit visit) {
  const auto columns =
      candidate_columns(f, bound, [&cap](const Int& v) { return abs_value(v) <= cap; });
  const ColumnSet set(bound, columns);
  pair_columns(columns, set, bound, allow_negative_det, [&](const Matrix2& g) {
    Binary<Int> image = transform(f, g);
    if (image.height() <= cap) visit(g, image);
  });
}

template <class Int>
std::vector<Matrix2> all_equivalences(const Binary<Int>& f1, const Binary<Int>& f2, long bound,
                                      bool allow_negative_det) {
  std::vector<Matrix2> out;
  if (f1.d != f2.d) return out;
  const Int& first_target = f2.a[0];
  const Int& last_target = f2.a[static_cast<std::size_t>(f2.d)];
  const auto firsts =
      candidate_columns(f1, bound, [&](const Int& v) { return v == first_target; });
  const auto seconds =
      candidate_columns(f1, bound, [&](const Int& v) { return v == last_target; });
  const ColumnSet second_set(bound, seconds);
  pair_columns(firsts, second_set, bound, allow_negative_det, [&](const Matrix2& g) {
    if (transform(f1, g) == f2) out.push_back(g);
  });
  return out;
}

bool matrix_less(const Matrix2& x, const Matrix2& y) {
  auto size = [](const Matrix2& g) {
    long m = 0;
    for (long e : g) m = std::max(m, std::labs(e));
    return m;
  };
  const long sx = size(x);
  const long sy = size(y);
  if (sx != sy) return sx < sy;
  return x < y;
}

template <class Int>
struct Descent {
  Binary<Int> rep;
  Matrix2 witness;  // act(witness, start) == rep
};

template <class Int>
Descent<Int> descend(const Binary<Int>& start, long bound, bool allow_negative_det) {
  Descent<Int> out{start, Matrix2{1, 0, 0, 1}};
  for (;;) {
    Binary<Int> best = out.rep;
    Matrix2 best_g{1, 0, 0, 1};
    enumerate_transforms(out.rep, bound, out.rep.height(), allow_negative_det,
                         [&](const Matrix2& g, const Binary<Int>& image) {
                           if (compare_binary(image, best) < 0) {
                             best = image;
                             best_g = g;
                           }
                         });
    if (best == out.rep) return out;
    out.rep = best;
    out.witness = multiply(out.witness, best_g);
  }
}

// int128 is safe when every intermediate value stays below 2^120.
bool fits_fast_path(const Integer& height, int d, long bound) {
  const std::size_t height_bits = mpz_sizeinbase(height.get_mpz_t(), 2);
  std::size_t bound_bits = 1;
  while ((1L << bound_bits) <= 2 * bound + 1) ++bound_bits;
  return height_bits + 5 + static_cast<std::size_t>(d) * (bound_bits + 1) < 118;
}

void require_nondegenerate(const HomogeneousForm& f) {
  if (f.vars() != 2) throw std::invalid_argument("orbit operations require binary forms");
  if (f.degree() < 2) throw std::invalid_argument("orbit operations require degree >= 2");
  if (f.is_zero() || discriminant_binary(f) == 0) {
    throw std::domain_error("form has zero discriminant: " + f.to_string());
  }
}

template <class Int>
std::optional<UnimodularMatrix> equivalent_impl(const HomogeneousForm& f1,
                                                const HomogeneousForm& f2, long bound,
                                                bool allow_negative_det) {
  auto found = all_equivalences(to_binary<Int>(f1), to_binary<Int>(f2), bound, allow_negative_det);
  if (found.empty()) return std::nullopt;
  return to_matrix(*std::min_element(found.begin(), found.end(), matrix_less));
}

std::optional<UnimodularMatrix> equivalent_any(const HomogeneousForm& f1,
                                               const HomogeneousForm& f2, long bound,
                                               bool allow_negative_det) {
  if (f1.vars() != 2 || f2.vars() != 2) throw std::invalid_argument("equivalent: forms must be binary");
  if (f1.degree() != f2.degree()) throw std::invalid_argument("equivalent: degree mismatch");
  if (bound < 1) throw std::invalid_argument("equivalent: entry bound must be >= 1");
  const Integer h = std::max(f1.height(), f2.height());
  if (fits_fast_path(h, f1.degree(), bound)) {
    return equivalent_impl<int128>(f1, f2, bound, allow_negative_det);
  }
  return equivalent_impl<Integer>(f1, f2, bound, allow_negative_det);
}

// Orbit partition engine ----------------------------------------------------

struct Prepared {
  HomogeneousForm form;  // scale * member
  Rational scale;
};

Integer s_part(Integer value, const PrimeSet& s) {
  Integer out = 1;
  for (const auto& p : s.primes()) {
    while (value != 0 && mpz_divisible_p(value.get_mpz_t(), p.get_mpz_t())) {
      mpz_divexact(value.get_mpz_t(), value.get_mpz_t(), p.get_mpz_t());
      out *= p;
    }
  }
  return out;
}

Prepared prepare(const HomogeneousForm& f, const OrbitGroup& group) {
  require_nondegenerate(f);
  if (group.kind != GroupKind::GL2ZS) return {f, Rational(1)};
  // Validates the S-unit discriminant; the integral representative below
  // spans the same S-unit scaling class as the window-normalized form.
  (void)s_unit_rescale(f, group.primes);
  const Integer strip = s_part(f.content(), group.primes);
  const bool negate = f.terms().begin()->second < 0;
  Rational scale(negate ? Integer(-1) : Integer(1), strip);
  scale.canonicalize();
  HomogeneousForm form = f.divided(strip);
  if (negate) form = -form;
  return {std::move(form), scale};
}

template <class Int>
class PartitionEngine {
 public:
  PartitionEngine(std::span<const HomogeneousForm> forms, const OrbitGroup& group, long bound)
      : forms_(forms), group_(group), bound_(bound) {
    prepared_.reserve(forms.size());
    binaries_.reserve(forms.size());
    for (std::size_t i = 0; i < forms.size(); ++i) {
      prepared_.push_back(prepare(forms[i], group));
      binaries_.push_back(to_binary<Int>(prepared_.back().form));
      const Int h = binaries_.back().height();
      if (h > cap_) cap_ = h;
    }
  }

  std::vector<OrbitClass> canonical() {
    const bool orientation = group_.kind != GroupKind::SL2Z;
    const bool scalars = group_.kind == GroupKind::GL2ZS;
    std::unordered_map<Binary<Int>, std::vector<std::size_t>, BinaryHash<Int>> lookup;
    for (std::size_t i = 0; i < binaries_.size(); ++i) lookup[binaries_[i]].push_back(i);
    std::unordered_map<Binary<Int>, std::size_t, BinaryHash<Int>> rep_to_class;
    std::vector<long> class_of(binaries_.size(), -1);
    std::vector<OrbitClass> classes;
    std::vector<Binary<Int>> reps;

    auto assign = [&](std::size_t member, std::size_t cls, const Matrix2& g, int sign) {
      class_of[member] = static_cast<long>(cls);
      auto& c = classes[cls];
      c.member_indices.push_back(member);
      c.members.push_back(forms_[member]);
      c.witnesses.push_back(to_matrix(g));
      c.scales.push_back(prepared_[member].scale * sign);
    };

    for (std::size_t i = 0; i < binaries_.size(); ++i) {
      if (class_of[i] >= 0) continue;
      Descent<Int> best = descend(binaries_[i], bound_, orientation);
      int sign = 1;  // act(best.witness, P_i) == sign * rep
      if (scalars) {
        Descent<Int> flipped = descend(binaries_[i].negated(), bound_, orientation);
        if (compare_binary(flipped.rep, best.rep) < 0) {
          best = flipped;
          sign = -1;
        }
      }
      auto [it, created] = rep_to_class.try_emplace(best.rep, classes.size());
      const std::size_t cls = it->second;
      if (created) {
        classes.push_back(OrbitClass{to_form(best.rep), {}, {}, {}, {}});
        reps.push_back(best.rep);
      }
      const Matrix2 w = best.witness;
      const long det = w[0] * w[3] - w[1] * w[2];
      const Matrix2 inverse = det == 1 ? Matrix2{w[3], -w[1], -w[2], w[0]}
                                       : Matrix2{-w[3], w[1], w[2], -w[0]};
      assign(i, cls, inverse, sign);
      if (!created) continue;
      // Bulk-assign every input form in the bounded ball around the new representative.
      enumerate_transforms(best.rep, bound_, cap_, orientation,
                           [&](const Matrix2& g, const Binary<Int>& image) {
                             auto visit = [&](const Binary<Int>& key, int s) {
                               auto hit = lookup.find(key);
                               if (hit == lookup.end()) return;
                               for (std::size_t j : hit->second) {
                                 if (class_of[j] < 0) assign(j, cls, g, s);
                               }
                             };
                             visit(image, 1);
                             if (scalars) visit(image.negated(), -1);
                           });
    }
    return order_classes(std::move(classes));
  }

  std::vector<OrbitClass> pairwise() {
    const bool orientation = group_.kind != GroupKind::SL2Z;
    const bool scalars = group_.kind == GroupKind::GL2ZS;
    const std::size_t n = binaries_.size();
    std::vector<Integer> discs;
    discs.reserve(n);
    for (const auto& p : prepared_) discs.push_back(discriminant_binary(p.form));

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    struct Edge {
      std::size_t to;
      Matrix2 g;  // act(g, P_from) == sign * P_to
      int sign;
    };
    std::vector<std::vector<Edge>> tree(n);

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (discs[i] != discs[j] || find(i) == find(j)) continue;
        std::optional<std::pair<Matrix2, int>> hit;
        for (int sign : {1, -1}) {
          if (sign == -1 && !scalars) break;
          const Binary<Int> target = sign == 1 ? binaries_[j] : binaries_[j].negated();
          auto found = all_equivalences(binaries_[i], target, bound_, orientation);
          if (!found.empty()) {
            hit.emplace(*std::min_element(found.begin(), found.end(), matrix_less), sign);
            break;
          }
        }
        if (!hit) continue;
        const Matrix2 g = hit->first;
        const long det = g[0] * g[3] - g[1] * g[2];
        const Matrix2 inverse = det == 1 ? Matrix2{g[3], -g[1], -g[2], g[0]}
                                         : Matrix2{-g[3], g[1], g[2], -g[0]};
        tree[i].push_back({j, g, hit->second});
        tree[j].push_back({i, inverse, hit->second});
        parent[find(j)] = find(i);
      }
    }

    std::vector<OrbitClass> classes;
    std::vector<bool> seen(n, false);
    for (std::size_t root = 0; root < n; ++root) {
      if (seen[root]) continue;
      OrbitClass cls{prepared_[root].form, {}, {}, {}, {}};
      std::vector<std::tuple<std::size_t, Matrix2, int>> stack{{root, Matrix2{1, 0, 0, 1}, 1}};
      seen[root] = true;
      while (!stack.empty()) {
        auto [u, w, s] = stack.back();
        stack.pop_back();
        cls.member_indices.push_back(u);
        cls.members.push_back(forms_[u]);
        cls.witnesses.push_back(to_matrix(w));
        cls.scales.push_back(prepared_[u].scale * s);
        for (const auto& e : tree[u]) {
          if (seen[e.to]) continue;
          seen[e.to] = true;
          stack.emplace_back(e.to, multiply(w, e.g), s * e.sign);
        }
      }
      classes.push_back(std::move(cls));
    }
    return order_classes(std::move(classes));
  }

 private:
  static std::vector<OrbitClass> order_classes(std::vector<OrbitClass> classes) {
    for (auto& c : classes) {
      std::vector<std::size_t> order(c.member_indices.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return c.member_indices[x] < c.member_indices[y];
      });
      OrbitClass sorted{c.representative, {}, {}, {}, {}};
      for (std::size_t k : order) {
        sorted.member_indices.push_back(c.member_indices[k]);
        sorted.members.push_back(std::move(c.members[k]));
        sorted.witnesses.push_back(std::move(c.witnesses[k]));
        sorted.scales.push_back(std::move(c.scales[k]));
      }
      c = std::move(sorted);
    }
    std::sort(classes.begin(), classes.end(), [](const OrbitClass& x, const OrbitClass& y) {
      return x.member_indices.front() < y.member_indices.front();
    });
    return classes;
  }

  std::span<const HomogeneousForm> forms_;
  OrbitGroup group_;
  long bound_;
  std::vector<Prepared> prepared_;
  std::vector<Binary<Int>> binaries_;
  Int cap_ = 0;
};

std::vector<OrbitClass> run_engine(std::span<const HomogeneousForm> forms, const OrbitGroup& group, long bound,
                                   PartitionMethod method, const Integer& max_height, int d) {
  auto run = [&](auto tag) {
    using Int = decltype(tag);
    PartitionEngine<Int> engine(forms, group, bound);
    return method == PartitionMethod::Canonical ? engine.canonical() : engine.pairwise();
  };
  return fits_fast_path(max_height, d, bound) ? run(int128{}) : run(Integer{});
}

// S-minimal models ------------------------------------------------------------

using Dense = std::vector<Integer>;  // a_0..a_d, a_i the coefficient of x^{d-i} y^i
using Matrix2Z = std::array<Integer, 4>;

// a(p x + j y, y), or a(x, p y) when j < 0.
Dense sublattice_image(const Dense& a, const Integer& p, long j) {
  const std::size_t d = a.size() - 1;
  Dense out(a.size());
  if (j < 0) {
    Integer scale = 1;
    for (std::size_t i = 0; i <= d; ++i, scale *= p) out[i] = a[i] * scale;
    return out;
  }
  // c[k] is the coefficient of t^k in a(t, 1); shift t -> t + j, then scale t -> p t.
  Dense c(a.size());
  for (std::size_t k = 0; k <= d; ++k) c[k] = a[d - k];
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = d; k-- > i;) c[k] += j * c[k + 1];
  }
  Integer scale = 1;
  for (std::size_t k = 0; k <= d; ++k, scale *= p) out[d - k] = c[k] * scale;
  return out;
}

unsigned long content_valuation(const Dense& a, const Integer& p) {
  unsigned long v = ~0UL;
  for (const auto& c : a) {
    if (c != 0) v = std::min<unsigned long>(v, valuation(c, p));
  }
  return v;
}

struct ModelState {
  Dense a;
  Matrix2Z m;      // f(m x) == scale * a(x)
  Rational scale;
};

// Divides out p^v and fixes the sign of the leading nonzero coefficient.
void normalize_state(ModelState& s, const Integer& p, unsigned long v) {
  if (v > 0) {
    const Integer divisor = power(p, v);
    for (auto& c : s.a) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), divisor.get_mpz_t());
    s.scale *= Rational(divisor);
  }
  const auto lead = std::find_if(s.a.begin(), s.a.end(), [](const Integer& c) { return c != 0; });
  if (*lead < 0) {
    for (auto& c : s.a) c = -c;
    s.scale = -s.scale;
  }
}

ModelState neighbour(const ModelState& s, const Integer& p, long j, unsigned long& v) {
  ModelState out{sublattice_image(s.a, p, j), {}, s.scale};
  // h = [[p, j], [0, 1]] or [[1, 0], [0, p]]
  const Matrix2Z h = j < 0 ? Matrix2Z{1, 0, 0, p} : Matrix2Z{p, j, 0, 1};
  out.m = {s.m[0] * h[0] + s.m[1] * h[2], s.m[0] * h[1] + s.m[1] * h[3], s.m[2] * h[0] + s.m[3] * h[2],
           s.m[2] * h[1] + s.m[3] * h[3]};
  v = content_valuation(out.a, p);
  return out;
}

// a(x + k y, y)
Dense shear_x(const Dense& a, const Integer& k) {
  const std::size_t d = a.size() - 1;
  Dense c(a.size());
  for (std::size_t i = 0; i <= d; ++i) c[i] = a[d - i];
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = d; j-- > i;) c[j] += k * c[j + 1];
  }
  Dense out(a.size());
  for (std::size_t i = 0; i <= d; ++i) out[d - i] = c[i];
  return out;
}

// a(x, y + k x)
Dense shear_y(const Dense& a, const Integer& k) {
  Dense reversed(a.rbegin(), a.rend());
  Dense out = shear_x(reversed, k);
  std::reverse(out.begin(), out.end());
  return out;
}

Integer dense_height(const Dense& a) {
  Integer h = 0;
  for (const auto& c : a) h = std::max(h, abs_value(c));
  return h;
}

Integer nearest(const Integer& num, const Integer& den) {
  // round(num / den), den != 0
  Integer q;
  Integer twice = 2 * num + den;
  Integer den2 = 2 * den;
  if (den2 < 0) {
    twice = -twice;
    den2 = -den2;
  }
  mpz_fdiv_q(q.get_mpz_t(), twice.get_mpz_t(), den2.get_mpz_t());
  return q;
}

// Greedy GL2(Z) height reduction by shears; keeps f(m x) == scale * a(x).
void reduce_state(ModelState& s) {
  const std::size_t d = s.a.size() - 1;
  Integer best = dense_height(s.a);
  for (;;) {
    std::optional<std::pair<Dense, Matrix2Z>> step;
    auto consider = [&](Dense candidate, const Matrix2Z& h) {
      const Integer height = dense_height(candidate);
      if (height < best) {
        best = height;
        step.emplace(std::move(candidate), h);
      }
    };
    std::vector<Integer> kx{1, -1}, ky{1, -1};
    if (s.a[0] != 0) kx.push_back(nearest(-s.a[1], Integer(static_cast<unsigned long>(d)) * s.a[0]));
    if (s.a[d] != 0) ky.push_back(nearest(-s.a[d - 1], Integer(static_cast<unsigned long>(d)) * s.a[d]));
    for (const auto& k : kx) {
      if (k != 0) consider(shear_x(s.a, k), Matrix2Z{1, k, 0, 1});
    }
    for (const auto& k : ky) {
      if (k != 0) consider(shear_y(s.a, k), Matrix2Z{1, 0, k, 1});
    }
    if (!step) return;
    s.a = std::move(step->first);
    const Matrix2Z& h = step->second;
    s.m = {s.m[0] * h[0] + s.m[1] * h[2], s.m[0] * h[1] + s.m[1] * h[3], s.m[2] * h[0] + s.m[3] * h[2],
           s.m[2] * h[1] + s.m[3] * h[3]};
  }
}

template <class Visit>
void for_each_sublattice(const Integer& p, Visit visit) {
  const long count = p.get_si();
  for (long j = 0; j < count; ++j) visit(j);
  visit(-1);
}

}  // namespace

std::vector<SMinimalModel> s_minimal_models(const HomogeneousForm& f, const PrimeSet& s,
                                            std::size_t max_models) {
  require_nondegenerate(f);
  if (!s_unit_factor(discriminant_binary(f), s)) {
    throw std::domain_error("s_minimal_models: discriminant of " + f.to_string() + " is not an S-unit");
  }
  if (max_models < 1) throw std::invalid_argument("s_minimal_models: max_models must be positive");
  for (const auto& p : s.primes()) {
    if (!p.fits_slong_p()) throw std::invalid_argument("s_minimal_models: prime too large");
  }
  const unsigned long d = static_cast<unsigned long>(f.degree());
  ModelState state{f.dense(), {1, 0, 0, 1}, Rational(1)};
  const Integer strip = s_part(f.content(), s);
  for (const auto& p : s.primes()) {
    const unsigned long v = valuation(strip, p);
    normalize_state(state, p, v);
  }
  normalize_state(state, 1, 0);
  reduce_state(state);

  // Each step lowers v_p(disc) by 2(d-1)v - d(d-1) > 0.
  for (bool improved = true; improved;) {
    improved = false;
    for (const auto& p : s.primes()) {
      std::optional<ModelState> best;
      unsigned long best_v = 0;
      for_each_sublattice(p, [&](long j) {
        unsigned long v = 0;
        ModelState next = neighbour(state, p, j, v);
        if (2 * v > d && v > best_v) {
          best_v = v;
          best = std::move(next);
        }
      });
      if (best) {
        normalize_state(*best, p, best_v);
        reduce_state(*best);
        state = std::move(*best);
        improved = true;
      }
    }
  }

  std::vector<ModelState> found{state};
  std::set<Dense> seen{state.a};
  for (std::size_t head = 0; head < found.size() && d % 2 == 0; ++head) {
    for (const auto& p : s.primes()) {
      for_each_sublattice(p, [&](long j) {
        if (found.size() >= max_models) return;
        unsigned long v = 0;
        ModelState next = neighbour(found[head], p, j, v);
        if (2 * v != d) return;
        normalize_state(next, p, v);
        reduce_state(next);
        if (seen.insert(next.a).second) found.push_back(std::move(next));
      });
    }
  }

  std::vector<SMinimalModel> out;
  for (auto& m : found) {
    out.push_back({HomogeneousForm::from_dense(2, static_cast<int>(d), m.a),
                   IntegralMatrix(2, {m.m[0], m.m[1], m.m[2], m.m[3]}), m.scale});
  }
  return out;
}

namespace {

// Orbits of GL2(Z[1/S]): classes of S-minimal models under GL2(Z) and sign.
std::vector<OrbitClass> s_orbit_classes(std::span<const HomogeneousForm> forms, const OrbitGroup& group,
                                        long& bound, PartitionMethod method) {
  const int d = forms.front().degree();
  std::vector<std::vector<SMinimalModel>> models;
  std::vector<std::vector<std::size_t>> model_ids;
  std::map<Dense, std::size_t> id_of;
  std::vector<HomogeneousForm> minimal;
  Integer max_height = 0;
  for (const auto& f : forms) {
    models.push_back(s_minimal_models(f, group.primes));
    auto& ids = model_ids.emplace_back();
    for (const auto& m : models.back()) {
      auto [it, inserted] = id_of.try_emplace(m.form.dense(), minimal.size());
      if (inserted) {
        minimal.push_back(m.form);
        max_height = std::max(max_height, m.form.height());
      }
      ids.push_back(it->second);
    }
  }
  bound = std::max(bound, default_entry_bound(max_height, d));
  const std::vector<OrbitClass> base = run_engine(minimal, group, bound, method, max_height, d);
  std::vector<std::pair<std::size_t, std::size_t>> where(minimal.size());  // (class, position)
  for (std::size_t c = 0; c < base.size(); ++c) {
    for (std::size_t k = 0; k < base[c].member_indices.size(); ++k) where[base[c].member_indices[k]] = {c, k};
  }

  std::vector<OrbitClass> classes;
  std::map<std::size_t, std::size_t> class_for_base;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    std::size_t pick = 0;
    for (std::size_t t = 1; t < model_ids[i].size(); ++t) {
      const std::size_t c_new = where[model_ids[i][t]].first, c_old = where[model_ids[i][pick]].first;
      const int cmp = compare_forms(base[c_new].representative, base[c_old].representative);
      if (cmp < 0 || (cmp == 0 && c_new < c_old)) pick = t;
    }
    const SMinimalModel& model = models[i][pick];
    const auto [c, k] = where[model_ids[i][pick]];
    const auto [it, created] = class_for_base.try_emplace(c, classes.size());
    if (created) classes.push_back(OrbitClass{base[c].representative, {}, {}, {}, {}});
    OrbitClass& cls = classes[it->second];

    // act(w, rep) == sigma * g and f(M x) == scale * g(x), so with N = M w^{-1}
    // act(adj N, rep) == det(N)^d / (scale * sigma) * f.
    const IntegralMatrix& w = base[c].witnesses[k];
    const Rational& sigma = base[c].scales[k];
    const auto& M = model.transform;
    const Integer wd = w.det();
    const Matrix2Z w_inv = {w.at(1, 1) * wd, -w.at(0, 1) * wd, -w.at(1, 0) * wd, w.at(0, 0) * wd};
    const Matrix2Z n = {M.at(0, 0) * w_inv[0] + M.at(0, 1) * w_inv[2], M.at(0, 0) * w_inv[1] + M.at(0, 1) * w_inv[3],
                        M.at(1, 0) * w_inv[0] + M.at(1, 1) * w_inv[2], M.at(1, 0) * w_inv[1] + M.at(1, 1) * w_inv[3]};
    const Integer det_n = n[0] * n[3] - n[1] * n[2];
    Rational scale(power(det_n, static_cast<unsigned long>(d)));
    scale /= model.scale * sigma;
    cls.member_indices.push_back(i);
    cls.members.push_back(forms[i]);
    cls.witnesses.push_back(IntegralMatrix(2, {n[3], -n[1], -n[2], n[0]}));
    cls.scales.push_back(scale);
  }
  return classes;
}

}  // namespace

int compare_forms(const HomogeneousForm& a, const HomogeneousForm& b) {
  const Integer ha = a.height();
  const Integer hb = b.height();
  if (ha != hb) return ha < hb ? -1 : 1;
  const auto da = a.dense();
  const auto db = b.dense();
  for (std::size_t i = 0; i < std::min(da.size(), db.size()); ++i) {
    const Integer ma = abs_value(da[i]);
    const Integer mb = abs_value(db[i]);
    if (ma != mb) return ma < mb ? -1 : 1;
    if (da[i] != db[i]) return da[i] > 0 ? -1 : 1;
  }
  return da.size() == db.size() ? 0 : (da.size() < db.size() ? -1 : 1);
}

std::optional<UnimodularMatrix> equivalent(const HomogeneousForm& f1, const HomogeneousForm& f2,
                                           long entry_bound) {
  return equivalent_any(f1, f2, entry_bound, false);
}

std::optional<UnimodularMatrix> equivalent_gl(const HomogeneousForm& f1,
                                              const HomogeneousForm& f2, long entry_bound) {
  return equivalent_any(f1, f2, entry_bound, true);
}

CanonicalForm canonical_rep(const HomogeneousForm& f, long entry_bound,
                            bool allow_orientation_reversal) {
  require_nondegenerate(f);
  const long bound = entry_bound > 0 ? entry_bound : default_entry_bound(f.height(), f.degree());
  auto run = [&](auto tag) {
    using Int = decltype(tag);
    const Descent<Int> result = descend(to_binary<Int>(f), bound, allow_orientation_reversal);
    return CanonicalForm{to_form(result.rep), to_matrix(result.witness), bound};
  };
  if (fits_fast_path(f.height(), f.degree(), bound)) return run(int128{});
  return run(Integer{});
}

std::vector<UnimodularMatrix> stabilizer(const HomogeneousForm& f, long entry_bound) {
  require_nondegenerate(f);
  if (f.degree() < 3) throw std::invalid_argument("stabilizer: degree must be at least 3");
  if (entry_bound < 1) throw std::invalid_argument("stabilizer: entry bound must be >= 1");
  auto run = [&](auto tag) {
    using Int = decltype(tag);
    const auto b = to_binary<Int>(f);
    auto found = all_equivalences(b, b, entry_bound, false);
    std::sort(found.begin(), found.end(), matrix_less);
    std::vector<UnimodularMatrix> out;
    for (const auto& g : found) out.push_back(to_matrix(g));
    return out;
  };
  if (fits_fast_path(f.height(), f.degree(), entry_bound)) return run(int128{});
  return run(Integer{});
}

OrbitPartition partition_orbits(std::span<const HomogeneousForm> forms, const OrbitGroup& group,
                                const PartitionOptions& options) {
  OrbitPartition out;
  out.group = group;
  if (forms.empty()) {
    out.entry_bound = options.entry_bound;
    return out;
  }
  const int d = forms.front().degree();
  Integer max_height = 0;
  for (const auto& f : forms) {
    if (f.vars() != 2) throw std::invalid_argument("partition_orbits: forms must be binary");
    if (f.degree() != d) throw std::invalid_argument("partition_orbits: mixed degrees");
    max_height = std::max(max_height, f.height());
  }
  long bound = options.entry_bound > 0 ? options.entry_bound : default_entry_bound(max_height, d);
  if (group.kind == GroupKind::GL2ZS) {
    out.classes = s_orbit_classes(forms, group, bound, options.method);
  } else {
    out.classes = run_engine(forms, group, bound, options.method, max_height, d);
  }
  out.entry_bound = bound;
  return out;
}

std::optional<std::string> verify_partition(const OrbitPartition& partition) {
  for (std::size_t c = 0; c < partition.classes.size(); ++c) {
    const auto& cls = partition.classes[c];
    for (std::size_t k = 0; k < cls.members.size(); ++k) {
      const auto& g = cls.witnesses[k];
      const Rational& scale = cls.scales[k];
      const std::string label = "class " + std::to_string(c) + ", member " + std::to_string(k);
      switch (partition.group.kind) {
        case GroupKind::SL2Z:
        case GroupKind::GL2Z:
          if (g.det() != 1 && (partition.group.kind == GroupKind::SL2Z || g.det() != -1)) {
            return label + ": witness determinant " + g.det().get_str() + " outside " + partition.group.name();
          }
          if (scale != 1) return label + ": nontrivial scale for " + partition.group.name();
          break;
        case GroupKind::GL2ZS:
          if (!s_unit_factor(g.det(), partition.group.primes) || !s_unit_factor(scale.get_num(), partition.group.primes) ||
              !s_unit_factor(scale.get_den(), partition.group.primes)) {
            return label + ": witness determinant or scale is not an S-unit";
          }
          break;
      }
      const HomogeneousForm image = act(g, cls.representative);
      HomogeneousForm expected = cls.members[k].scaled(scale.get_num());
      HomogeneousForm lhs = image.scaled(scale.get_den());
      if (!(lhs == expected)) {
        return "class " + std::to_string(c) + ": witness " + g.to_string() + " maps " +
               cls.representative.to_string() + " to " + image.to_string() + ", expected " +
               cls.members[k].to_string();
      }
    }
  }
  return std::nullopt;
}

}  // namespace detcensus
