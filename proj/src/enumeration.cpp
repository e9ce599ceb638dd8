#include "detcensus/enumeration.hpp"

#include "detcensus/invariants.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace detcensus {

std::string describe(const DiscConstraint& constraint) {
  struct Visitor {
    std::string operator()(const DiscNonzero&) const { return "disc != 0"; }
    std::string operator()(const DiscEquals& c) const { return "disc = " + c.value.get_str(); }
    std::string operator()(const DiscSUnit& c) const {
      return "disc S-unit, S = " + c.primes.to_string();
    }
  };
  return std::visit(Visitor{}, constraint);
}

void CensusQuery::validate() const {
  if (d < 2) throw std::invalid_argument("census query: degree must be at least 2");
  if (B < 1) throw std::invalid_argument("census query: height bound must be at least 1");
  if (d <= 3 && B > (1L << 24)) {
    throw std::invalid_argument("census query: height bound exceeds the 128-bit range");
  }
  if (const auto* eq = std::get_if<DiscEquals>(&constraint); eq && eq->value == 0) {
    throw std::invalid_argument("census query: fixed discriminant must be nonzero");
  }
}

OrbitGroup default_group(const CensusQuery& q) {
  if (const auto* s = std::get_if<DiscSUnit>(&q.constraint)) return OrbitGroup::gl2zs(s->primes);
  return OrbitGroup::sl2z();
}

namespace {

// Membership test for S-units, with a residue prefilter at auxiliary primes q
// where the subgroup generated by -1 and S is proper in (Z/q)^*.
class SUnitTest {
 public:
  explicit SUnitTest(const PrimeSet& s) {
    for (const auto& p : s.primes()) {
      if (!fits_int64(p)) {
        fast_ = false;
        return;
      }
      primes_.push_back(p.get_si());
    }
    for (long q = 3; q < 400 && filters_.size() < 3; q += 2) {
      if (!is_prime(Integer(q)) || std::find(primes_.begin(), primes_.end(), q) != primes_.end()) {
        continue;
      }
      std::vector<char> allowed(static_cast<std::size_t>(q), 0);
      std::vector<long> frontier{1};
      allowed[1] = 1;
      std::vector<long> generators{q - 1};
      for (long p : primes_) generators.push_back(p % q);
      while (!frontier.empty()) {
        const long x = frontier.back();
        frontier.pop_back();
        for (long g : generators) {
          const long y = x * g % q;
          if (!allowed[static_cast<std::size_t>(y)]) {
            allowed[static_cast<std::size_t>(y)] = 1;
            frontier.push_back(y);
          }
        }
      }
      const long size = std::count(allowed.begin(), allowed.end(), 1);
      if (size * 2 <= q - 1) filters_.push_back({q, std::move(allowed)});
    }
  }

  bool operator()(int128 disc) const {
    if (disc == 0) return false;
    for (const auto& [q, allowed] : filters_) {
      long r = static_cast<long>(disc % q);
      if (r < 0) r += q;
      if (!allowed[static_cast<std::size_t>(r)]) return false;
    }
    int128 rest = disc < 0 ? -disc : disc;
    for (long p : primes_) {
      if (p == 2) {
        while ((rest & 1) == 0) rest >>= 1;
      } else {
        while (rest % p == 0) rest /= p;
      }
    }
    return rest == 1;
  }

  bool fast() const { return fast_; }

 private:
  struct Filter {
    long q;
    std::vector<char> allowed;
  };
  bool fast_ = true;
  std::vector<long> primes_;
  std::vector<Filter> filters_;
};

long gcd_of(const long* a, int count) {
  long g = 0;
  for (int i = 0; i < count; ++i) g = std::gcd(g, a[i]);
  return g;
}

// Exact floor square root of a non-negative int128.
int128 isqrt(int128 n) {
  if (n < 0) return -1;
  auto r = static_cast<int128>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Scans one slab (fixed leading coefficient) and calls emit(coeffs) for every
// accepted tuple in lexicographic order.
class SlabScanner {
 public:
  explicit SlabScanner(const CensusQuery& q) : q_(q) {
    if (const auto* s = std::get_if<DiscSUnit>(&q.constraint)) {
      kind_ = Kind::SUnit;
      primes_ = &s->primes;
      sunit_.emplace(s->primes);
      if (!sunit_->fast()) sunit_.reset();
    }
    if (const auto* eq = std::get_if<DiscEquals>(&q.constraint)) {
      kind_ = Kind::Equals;
      target_ = eq->value;
      target_fits_ = mpz_sizeinbase(eq->value.get_mpz_t(), 2) < 120;
      if (target_fits_) target128_ = to_int128(eq->value);
    }
  }

  template <class Emit>
  void scan(long leading, Emit&& emit) const {
    std::vector<long> a(static_cast<std::size_t>(q_.d) + 1, 0);
    a[0] = leading;
    recurse(a, 1, leading != 0, emit);
  }

  std::vector<long> slab_values() const {
    std::vector<long> out;
    for (long v = q_.primitive_only ? 0 : -q_.B; v <= q_.B; ++v) out.push_back(v);
    return out;
  }

 private:
  template <class Emit>
  void recurse(std::vector<long>& a, int pos, bool nonzero_seen, Emit& emit) const {
    const long lo = (q_.primitive_only && !nonzero_seen) ? 0 : -q_.B;
    if (pos == q_.d) {
      last(a, lo, nonzero_seen, emit);
      return;
    }
    for (long v = lo; v <= q_.B; ++v) {
      a[static_cast<std::size_t>(pos)] = v;
      recurse(a, pos + 1, nonzero_seen || v != 0, emit);
    }
  }

  template <class Emit>
  void accept(std::vector<long>& a, Emit& emit) const {
    if (q_.primitive_only && gcd_of(a.data(), q_.d + 1) != 1) return;
    emit(a);
  }

  bool check(const std::vector<long>& a) const {
    if (q_.d <= 3) {
      const int128 disc =
          q_.d == 2 ? static_cast<int128>(a[1]) * a[1] - 4 * static_cast<int128>(a[0]) * a[2]
                    : cubic_discriminant(a[0], a[1], a[2], a[3]);
      switch (kind_) {
        case Kind::Nonzero:
          return disc != 0;
        case Kind::Equals:
          return target_fits_ && disc == target128_;
        case Kind::SUnit:
          if (sunit_) return (*sunit_)(disc);
          return disc != 0 && s_unit_factor(from_int128(disc), *primes_).has_value();
      }
    }
    const Integer disc = discriminant_binary(HomogeneousForm::binary(std::span<const long>(a)));
    switch (kind_) {
      case Kind::Nonzero:
        return disc != 0;
      case Kind::Equals:
        return disc == target_;
      case Kind::SUnit:
        return disc != 0 && s_unit_factor(disc, *primes_).has_value();
    }
    return false;
  }

  template <class Emit>
  void last(std::vector<long>& a, long lo, bool nonzero_seen, Emit& emit) const {
    const auto pos = static_cast<std::size_t>(q_.d);
    if (target_fits_ && (q_.d == 2 || q_.d == 3)) {
      for (long v : solve_last(a, lo)) {
        a[pos] = v;
        if (!nonzero_seen && v == 0) continue;
        if (check(a)) accept(a, emit);
      }
      return;
    }
    for (long v = lo; v <= q_.B; ++v) {
      if (!nonzero_seen && v == 0) continue;
      a[pos] = v;
      if (check(a)) accept(a, emit);
    }
  }

  // Integer values of the last coefficient in [lo, B] where the discriminant,
  // a polynomial of degree <= 2 in that coefficient, equals the target.
  std::vector<long> solve_last(const std::vector<long>& a, long lo) const {
    int128 qa = 0, qb = 0, qc = 0;  // qa t^2 + qb t + qc = 0
    if (q_.d == 2) {
      // b^2 - 4 a t - N
      qb = -4 * static_cast<int128>(a[0]);
      qc = static_cast<int128>(a[1]) * a[1] - target128_;
    } else {
      const int128 A = a[0], B = a[1], C = a[2];
      qa = -27 * A * A;
      qb = 18 * A * B * C - 4 * B * B * B;
      qc = B * B * C * C - 4 * A * C * C * C - target128_;
    }
    std::vector<long> out;
    auto keep = [&](int128 t) {
      if (t >= lo && t <= q_.B) out.push_back(static_cast<long>(t));
    };
    if (qa == 0) {
      if (qb == 0) {
        if (qc == 0) {
          for (long v = lo; v <= q_.B; ++v) out.push_back(v);
        }
        return out;
      }
      if (qc % qb == 0) keep(-qc / qb);
      return out;
    }
    const int128 disc = qb * qb - 4 * qa * qc;
    if (disc < 0) return out;
    const int128 root = isqrt(disc);
    if (root * root != disc) return out;
    for (int128 numerator : {-qb - root, -qb + root}) {
      if (numerator % (2 * qa) == 0) keep(numerator / (2 * qa));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  enum class Kind { Nonzero, Equals, SUnit };

  const CensusQuery& q_;
  Kind kind_ = Kind::Nonzero;
  const PrimeSet* primes_ = nullptr;
  std::optional<SUnitTest> sunit_;
  Integer target_;
  bool target_fits_ = false;
  int128 target128_ = 0;
};

// Runs work(slab_index) for every slab on `threads` workers.
template <class Work>
void for_each_slab(std::size_t slabs, unsigned threads, Work work) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(slabs)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < slabs; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < slabs; i = next++) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next = slabs;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

CoefficientRows enumerate_coefficients(const CensusQuery& q, const EnumerationOptions& options) {
  q.validate();
  const SlabScanner scanner(q);
  const auto slabs = scanner.slab_values();
  std::vector<CoefficientRows> results(slabs.size());
  std::atomic<std::uint64_t> total{0};
  for_each_slab(slabs.size(), options.threads, [&](std::size_t i) {
    scanner.scan(slabs[i], [&](const std::vector<long>& a) {
      results[i].push_back(a);
      if (options.max_forms != 0 && ++total > options.max_forms) {
        throw ResourceLimitExceeded("enumeration exceeded max_forms = " +
                                        std::to_string(options.max_forms),
                                    options.max_forms);
      }
    });
  });
  CoefficientRows merged;
  for (auto& slab : results) {
    merged.insert(merged.end(), std::make_move_iterator(slab.begin()),
                  std::make_move_iterator(slab.end()));
  }
  return merged;
}

void enumerate_forms(const CensusQuery& q, const std::function<void(const HomogeneousForm&)>& sink,
                     const EnumerationOptions& options) {
  for (const auto& row : enumerate_coefficients(q, options)) {
    sink(HomogeneousForm::binary(std::span<const long>(row)));
  }
}

std::vector<HomogeneousForm> collect_forms(const CensusQuery& q, const EnumerationOptions& options) {
  std::vector<HomogeneousForm> out;
  enumerate_forms(q, [&out](const HomogeneousForm& f) { out.push_back(f); }, options);
  return out;
}

std::uint64_t count_forms(const CensusQuery& q, unsigned threads) {
  q.validate();
  const SlabScanner scanner(q);
  const auto slabs = scanner.slab_values();
  std::vector<std::uint64_t> counts(slabs.size(), 0);
  for_each_slab(slabs.size(), threads, [&](std::size_t i) {
    scanner.scan(slabs[i], [&](const std::vector<long>&) { ++counts[i]; });
  });
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

CensusResult count_census(const CensusQuery& q, const OrbitGroup& group,
                          const EnumerationOptions& options,
                          const PartitionOptions& partition_options) {
  const auto forms = collect_forms(q, options);
  CensusResult out;
  out.raw_count = forms.size();
  PartitionOptions popts = partition_options;
  if (popts.entry_bound <= 0) popts.entry_bound = default_entry_bound(Integer(q.B), q.d);
  out.partition = partition_orbits(forms, group, popts);
  out.orbit_count = out.partition.size();
  return out;
}

}  // namespace detcensus
