#include "detcensus/detmethod.hpp"

#include "detcensus/invariants.hpp"
#include "detcensus/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <numeric>
#include <thread>

namespace detcensus {

namespace {

void require_ternary(const HomogeneousForm& f, const char* where) {
  if (f.vars() != 3) throw std::invalid_argument(std::string(where) + ": form must be ternary");
}

long checked_prime(const Integer& p) {
  if (!fits_int64(p) || !is_prime(p)) {
    throw std::invalid_argument("expected a prime fitting in 64 bits, got " + p.get_str());
  }
  return p.get_si();
}

long mod(long a, long p) {
  const long r = a % p;
  return r < 0 ? r + p : r;
}

long inverse_mod(long a, long p) {
  long t = 0, new_t = 1, r = p, new_r = mod(a, p);
  while (new_r != 0) {
    const long q = r / new_r;
    std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
    std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
  }
  return mod(t, p);
}

// A form with coefficients reduced mod p, for fast evaluation over F_p.
class ModForm {
 public:
  ModForm(const HomogeneousForm& f, long p) : p_(p) {
    const Integer modulus = p;
    for (const auto& [index, c] : f.terms()) {
      Integer r = c % modulus;
      if (r < 0) r += modulus;
      if (r != 0) terms_.push_back({index, r.get_si()});
    }
  }

  long operator()(const std::vector<long>& x) const {
    long sum = 0;
    for (const auto& [index, c] : terms_) {
      long term = c;
      for (std::size_t v = 0; v < index.size(); ++v) {
        for (int e = 0; e < index[v]; ++e) term = static_cast<long>(static_cast<int128>(term) * x[v] % p_);
      }
      sum = (sum + term) % p_;
    }
    return sum;
  }

  bool is_zero() const { return terms_.empty(); }

 private:
  long p_;
  std::vector<std::pair<MultiIndex, long>> terms_;
};

struct GradientModP {
  GradientModP(const HomogeneousForm& f, long p)
      : value(f, p), dx(f.derivative(0), p), dy(f.derivative(1), p), dz(f.derivative(2), p) {}

  bool singular_at(const std::vector<long>& x) const {
    return value(x) == 0 && dx(x) == 0 && dy(x) == 0 && dz(x) == 0;
  }
  bool gradient_vanishes(const std::vector<long>& x) const {
    return dx(x) == 0 && dy(x) == 0 && dz(x) == 0;
  }

  ModForm value, dx, dy, dz;
};

// Calls visit(point) for every normalized point of P^2(F_p).
template <class Visit>
void for_each_projective_point(long p, Visit visit) {
  std::vector<long> x(3);
  x = {0, 0, 1};
  visit(x);
  for (long z = 0; z < p; ++z) {
    x = {0, 1, z};
    visit(x);
  }
  for (long y = 0; y < p; ++y) {
    for (long z = 0; z < p; ++z) {
      x = {1, y, z};
      visit(x);
    }
  }
}

// Binary form F(s, t, a s + b t).
HomogeneousForm restrict_to_line(const HomogeneousForm& f, long a, long b) {
  const int d = f.degree();
  HomogeneousForm out(2, d);
  for (const auto& [index, c] : f.terms()) {
    const int i = index[0], j = index[1], l = index[2];
    // (a s + b t)^l = sum_m C(l, m) a^{l-m} b^m s^{l-m} t^m
    for (int m = 0; m <= l; ++m) {
      const Integer term = c * binomial(static_cast<unsigned long>(l), static_cast<unsigned long>(m)) *
                           power(Integer(a), static_cast<unsigned long>(l - m)) *
                           power(Integer(b), static_cast<unsigned long>(m));
      out.add({i + l - m, j + m}, term);
    }
  }
  return out;
}

IntMatrix evaluation_matrix(const std::vector<MultiIndex>& basis,
                            std::span<const ProjectivePoint> points) {
  IntMatrix m(points.size(), basis.size());
  for (std::size_t r = 0; r < points.size(); ++r) {
    const auto& coords = points[r].coords();
    if (coords.size() != 3) throw std::invalid_argument("evaluation matrix: points must lie in P^2");
    for (std::size_t c = 0; c < basis.size(); ++c) {
      Integer value = 1;
      for (std::size_t v = 0; v < 3; ++v) {
        value *= power(coords[v], static_cast<unsigned long>(basis[c][v]));
      }
      m(r, c) = std::move(value);
    }
  }
  return m;
}

IntMatrix multiples_of(const HomogeneousForm& f, int k, const std::vector<MultiIndex>& columns) {
  if (k < f.degree()) return IntMatrix(0, columns.size());
  const auto multipliers = monomials_of_degree(3, k - f.degree());
  std::map<MultiIndex, std::size_t, GrevlexFirst> column_of;
  for (std::size_t c = 0; c < columns.size(); ++c) column_of.emplace(columns[c], c);
  IntMatrix m(multipliers.size(), columns.size());
  for (std::size_t r = 0; r < multipliers.size(); ++r) {
    for (const auto& [index, c] : f.terms()) {
      MultiIndex product = index;
      for (std::size_t v = 0; v < 3; ++v) product[v] += multipliers[r][v];
      m(r, column_of.at(product)) = c;
    }
  }
  return m;
}

}  // namespace

bool is_squarefree(const HomogeneousForm& f) {
  require_ternary(f, "is_squarefree");
  if (f.is_zero()) return false;
  const int d = f.degree();
  if (d <= 1) return true;
  const long grid = 2L * d * (d - 1) + 1;
  for (long a = 0; a < grid; ++a) {
    for (long b = 0; b < grid; ++b) {
      const HomogeneousForm line = restrict_to_line(f, a, b);
      if (!line.is_zero() && discriminant_binary(line) != 0) return true;
    }
  }
  return false;
}

PlaneCurve::PlaneCurve(HomogeneousForm f) : f_(std::move(f)) {
  require_ternary(f_, "PlaneCurve");
  if (f_.is_zero() || f_.degree() < 1) throw std::invalid_argument("PlaneCurve: need a nonzero form of degree >= 1");
  if (!f_.is_primitive()) throw std::invalid_argument("PlaneCurve: equation is not primitive");
  if (!is_squarefree(f_)) throw std::invalid_argument("PlaneCurve: equation is not squarefree");
}

std::vector<ProjectivePoint> curve_points(const PlaneCurve& curve, long H, unsigned threads,
                                          std::uint64_t max_points) {
  if (H < 1) throw std::invalid_argument("curve_points: height bound must be at least 1");
  const HomogeneousForm& f = curve.equation();
  const int d = f.degree();
  // |F(x)| <= sum |c| * H^d must stay inside 128 bits.
  Integer coefficient_mass = 0;
  for (const auto& [index, c] : f.terms()) coefficient_mass += abs_value(c);
  const bool fast = mpz_sizeinbase(Integer(coefficient_mass * power(Integer(H), static_cast<unsigned long>(d))).get_mpz_t(), 2) < 118;

  // coeff_by_z[l] lists (i, j, c) for terms c x^i y^j z^l.
  struct Term {
    int i, j;
    Integer c;
  };
  std::vector<std::vector<Term>> by_z(static_cast<std::size_t>(d) + 1);
  for (const auto& [index, c] : f.terms()) by_z[static_cast<std::size_t>(index[2])].push_back({index[0], index[1], c});

  std::vector<std::vector<ProjectivePoint>> slabs(static_cast<std::size_t>(H) + 1);
  std::atomic<std::uint64_t> found{0};
  auto scan_slab = [&](long x) {
    auto& out = slabs[static_cast<std::size_t>(x)];
    const long y_lo = x == 0 ? 0 : -H;
    for (long y = y_lo; y <= H; ++y) {
      // Coefficients of F(x, y, z) as a polynomial in z.
      std::vector<Integer> poly(static_cast<std::size_t>(d) + 1);
      for (int l = 0; l <= d; ++l) {
        Integer sum = 0;
        for (const auto& t : by_z[static_cast<std::size_t>(l)]) {
          sum += t.c * power(Integer(x), static_cast<unsigned long>(t.i)) *
                 power(Integer(y), static_cast<unsigned long>(t.j));
        }
        poly[static_cast<std::size_t>(l)] = sum;
      }
      long z_lo = -H, z_hi = H;
      if (x == 0 && y == 0) z_lo = z_hi = 1;
      std::vector<int128> small;
      if (fast) {
        for (const auto& c : poly) small.push_back(to_int128(c));
      }
      for (long z = z_lo; z <= z_hi; ++z) {
        bool zero;
        if (fast) {
          int128 acc = 0;
          for (int l = d; l >= 0; --l) acc = acc * z + small[static_cast<std::size_t>(l)];
          zero = acc == 0;
        } else {
          Integer acc = 0;
          for (int l = d; l >= 0; --l) acc = acc * z + poly[static_cast<std::size_t>(l)];
          zero = acc == 0;
        }
        if (!zero) continue;
        if (std::gcd(std::gcd(x, y), z) != 1) continue;
        out.push_back(ProjectivePoint::normalize({x, y, z}));
        if (max_points != 0 && ++found > max_points) {
          throw ResourceLimitExceeded("curve_points exceeded max_points = " + std::to_string(max_points),
                                      max_points);
        }
      }
    }
  };

  const auto slab_count = static_cast<std::size_t>(H) + 1;
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(slab_count)));
  if (workers == 1) {
    for (long x = 0; x <= H; ++x) scan_slab(x);
  } else {
    std::atomic<long> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (long x = next++; x <= H; x = next++) scan_slab(x);
        } catch (...) {
          errors[t] = std::current_exception();
          next = H + 1;
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<ProjectivePoint> out;
  for (auto& slab : slabs) out.insert(out.end(), slab.begin(), slab.end());
  return out;
}

long hilbert_dimension(const PlaneCurve& curve, int k) {
  if (k < 0) throw std::invalid_argument("hilbert_dimension: k must be non-negative");
  const auto all = monomials_of_degree(3, k);
  const auto relations = multiples_of(curve.equation(), k, all);
  return static_cast<long>(all.size()) - static_cast<long>(rank(relations));
}

long hilbert_polynomial_value(int d, int k) { return static_cast<long>(d) * k - static_cast<long>(d) * (d - 3) / 2; }

MonomialBasis monomial_basis(const PlaneCurve& curve, int k) {
  if (k < 1) throw std::invalid_argument("monomial_basis: k must be at least 1");
  const auto all = monomials_of_degree(3, k);
  const MultiIndex& lead = curve.equation().leading_monomial();
  MonomialBasis out{k, {}};
  for (const auto& m : all) {
    bool divisible = true;
    for (std::size_t v = 0; v < 3; ++v) divisible = divisible && m[v] >= lead[v];
    if (!divisible) out.basis.push_back(m);
  }
  // The basis must complement the degree-k slice of (F) exactly.
  const auto relations = multiples_of(curve.equation(), k, all);
  const std::size_t relation_rank = rank(relations);
  if (all.size() - relation_rank != out.basis.size()) {
    throw VerificationFailure("monomial_basis: basis size " + std::to_string(out.basis.size()) +
                              " does not match quotient dimension " +
                              std::to_string(all.size() - relation_rank));
  }
  IntMatrix stacked(relations.rows + out.basis.size(), all.size());
  for (std::size_t r = 0; r < relations.rows; ++r) {
    for (std::size_t c = 0; c < all.size(); ++c) stacked(r, c) = relations(r, c);
  }
  for (std::size_t b = 0; b < out.basis.size(); ++b) {
    const auto pos = static_cast<std::size_t>(std::find(all.begin(), all.end(), out.basis[b]) - all.begin());
    stacked(relations.rows + b, pos) = 1;
  }
  if (rank(std::move(stacked)) != all.size()) {
    throw VerificationFailure("monomial_basis: basis monomials are dependent modulo F");
  }
  return out;
}

std::vector<long> reduce_mod_p(const ProjectivePoint& point, long p) {
  std::vector<long> out;
  const Integer modulus = p;
  for (const auto& c : point.coords()) {
    Integer r = c % modulus;
    if (r < 0) r += modulus;
    out.push_back(r.get_si());
  }
  auto first = std::find_if(out.begin(), out.end(), [](long v) { return v != 0; });
  if (first == out.end()) throw std::invalid_argument("point reduces to zero mod p");
  const long scale = inverse_mod(*first, p);
  for (auto& v : out) v = static_cast<long>(static_cast<int128>(v) * scale % p);
  return out;
}

std::vector<ResidueClass> partition_by_reduction(std::span<const ProjectivePoint> points,
                                                 const Integer& p, const PlaneCurve& curve) {
  const long prime = checked_prime(p);
  const GradientModP gradient(curve.equation(), prime);
  std::map<std::vector<long>, ResidueClass> classes;
  for (const auto& point : points) {
    auto center = reduce_mod_p(point, prime);
    auto [it, inserted] = classes.try_emplace(center);
    if (inserted) {
      it->second.p = p;
      it->second.center = center;
      it->second.smooth_center = !gradient.gradient_vanishes(center);
    }
    it->second.members.push_back(point);
  }
  std::vector<ResidueClass> out;
  for (auto& [center, cls] : classes) out.push_back(std::move(cls));
  return out;
}

Integer evaluation_determinant(const MonomialBasis& basis, std::span<const ProjectivePoint> points) {
  if (points.size() != basis.size()) {
    throw std::invalid_argument("evaluation_determinant: need exactly e = " +
                                std::to_string(basis.size()) + " points, got " +
                                std::to_string(points.size()));
  }
  return determinant(evaluation_matrix(basis.basis, points));
}

Integer valuation_lower_bound(long e) {
  if (e < 1) throw std::invalid_argument("valuation_lower_bound: e must be positive");
  return Integer(e) * (e - 1) / 2;
}

ValuationRate asymptotic_valuation_rate(int d, int k) {
  if (d < 2 || k < d) throw std::invalid_argument("asymptotic_valuation_rate: need d >= 2, k >= d");
  ValuationRate out;
  out.e = hilbert_polynomial_value(d, k);
  out.bound = valuation_lower_bound(out.e);
  out.rate = Rational(Integer(k) * out.e * d, 2);
  out.rate.canonicalize();
  out.ratio = Rational(out.bound) / out.rate;
  return out;
}

bool divides(const HomogeneousForm& f, const HomogeneousForm& g) {
  if (f.vars() != g.vars()) throw std::invalid_argument("divides: variable count mismatch");
  if (f.is_zero()) return g.is_zero();
  if (g.is_zero()) return true;
  if (g.degree() < f.degree()) return false;
  const MultiIndex& lead = f.leading_monomial();
  const Rational lead_coeff(f.terms().begin()->second);
  std::map<MultiIndex, Rational, GrevlexFirst> rest;
  for (const auto& [index, c] : g.terms()) rest.emplace(index, Rational(c));
  while (!rest.empty()) {
    const auto [index, c] = *rest.begin();
    MultiIndex shift = index;
    for (std::size_t v = 0; v < shift.size(); ++v) {
      shift[v] -= lead[v];
      if (shift[v] < 0) return false;
    }
    const Rational factor = c / lead_coeff;
    for (const auto& [fi, fc] : f.terms()) {
      MultiIndex product = fi;
      for (std::size_t v = 0; v < product.size(); ++v) product[v] += shift[v];
      Rational& slot = rest[product];
      slot -= factor * Rational(fc);
      if (slot == 0) rest.erase(product);
    }
  }
  return true;
}

AuxiliaryDivisor auxiliary_divisor(const PlaneCurve& curve, const MonomialBasis& basis,
                                   const ResidueClass& cls) {
  if (cls.members.empty()) throw std::invalid_argument("auxiliary_divisor: empty residue class");
  const IntMatrix m = evaluation_matrix(basis.basis, cls.members);
  const auto null_space = kernel(m);
  if (null_space.empty()) return SpannedDirectly{};
  const auto coeffs = primitive_integer_vector(null_space.front());
  HomogeneousForm g(3, basis.k);
  for (std::size_t i = 0; i < coeffs.size(); ++i) g.set(basis.basis[i], coeffs[i]);
  if (divides(curve.equation(), g)) {
    std::string centre;
    for (long v : cls.center) centre += (centre.empty() ? "" : ":") + std::to_string(v);
    throw DivisorInIdeal("auxiliary divisor " + g.to_string() + " is a multiple of F for class [" +
                         centre + "] mod " + cls.p.get_str());
  }
  return g;
}

bool has_smooth_reduction(const PlaneCurve& curve, long p) {
  if (!is_prime(Integer(p))) throw std::invalid_argument("has_smooth_reduction: modulus is not prime");
  const GradientModP gradient(curve.equation(), p);
  if (gradient.value.is_zero()) return false;
  bool smooth = true;
  for_each_projective_point(p, [&](const std::vector<long>& x) {
    if (smooth && gradient.singular_at(x)) smooth = false;
  });
  return smooth;
}

long count_points_mod_p(const PlaneCurve& curve, long p) {
  if (!is_prime(Integer(p))) throw std::invalid_argument("count_points_mod_p: modulus is not prime");
  const ModForm f(curve.equation(), p);
  long count = 0;
  for_each_projective_point(p, [&](const std::vector<long>& x) {
    if (f(x) == 0) ++count;
  });
  return count;
}

ParameterChoice choose_parameters(const PlaneCurve& curve, long H, int k) {
  if (H < 1) throw std::invalid_argument("choose_parameters: H must be at least 1");
  if (k < curve.degree()) throw std::invalid_argument("choose_parameters: need k >= d");
  ParameterChoice out;
  out.k = k;
  out.H = H;
  out.e = static_cast<long>(monomial_basis(curve, k).size());
  out.valuation = valuation_lower_bound(out.e);
  out.hadamard_squared = power(Integer(out.e), static_cast<unsigned long>(out.e)) *
                         power(Integer(H), static_cast<unsigned long>(2L * k * out.e));
  const unsigned long exponent = 2 * out.valuation.get_ui();

  for (long q = 2; q < 200 && !out.required_smooth_reduction; q = next_prime(Integer(q)).get_si()) {
    out.required_smooth_reduction = has_smooth_reduction(curve, q);
  }
  // Smallest p with p^exponent > hadamard_squared, starting from the integer root.
  Integer p;
  mpz_root(p.get_mpz_t(), out.hadamard_squared.get_mpz_t(), exponent);
  if (!is_prime(p)) p = next_prime(p);
  for (;; p = next_prime(p)) {
    if (power(p, exponent) <= out.hadamard_squared) continue;
    if (out.required_smooth_reduction && !has_smooth_reduction(curve, p.get_si())) continue;
    break;
  }
  out.p = p;
  out.description = "p^" + out.valuation.get_str() + " > " + std::to_string(out.e) + "^(" +
                    std::to_string(out.e) + "/2) * " + std::to_string(H) + "^" +
                    std::to_string(static_cast<long>(k) * out.e) +
                    (out.required_smooth_reduction ? ", smooth reduction mod p" : "");
  return out;
}

DivisorCover cover(const PlaneCurve& curve, long H, int k, const CoverOptions& options) {
  DivisorCover out;
  out.parameters = choose_parameters(curve, H, k);
  const MonomialBasis basis = monomial_basis(curve, k);
  const auto points = curve_points(curve, H, options.threads, options.max_points);
  out.point_count = points.size();
  out.reduced_point_count = count_points_mod_p(curve, out.parameters.p.get_si());
  for (auto& cls : partition_by_reduction(points, out.parameters.p, curve)) {
    auto divisor = auxiliary_divisor(curve, basis, cls);
    CoverClass entry{std::move(cls), std::nullopt};
    if (auto* g = std::get_if<HomogeneousForm>(&divisor)) entry.divisor = std::move(*g);
    out.classes.push_back(std::move(entry));
  }
  return out;
}

CoverVerification verify_cover(const PlaneCurve& curve, const DivisorCover& cover) {
  CoverVerification out;
  const long p = cover.parameters.p.get_si();
  const long d = curve.degree();
  for (const auto& entry : cover.classes) {
    const auto& cls = entry.cls;
    for (const auto& member : cls.members) {
      if (reduce_mod_p(member, p) != cls.center) {
        out.failures.push_back(member.to_string() + " does not reduce to its class center");
      }
    }
    if (!entry.divisor) {
      ++out.spanned_directly;
      if (cls.smooth_center) {
        out.failures.push_back("class of size " + std::to_string(cls.members.size()) +
                               " with smooth center is spanned directly");
      }
      continue;
    }
    ++out.divisors;
    const HomogeneousForm& g = *entry.divisor;
    if (g.is_zero() || g.degree() != cover.parameters.k) {
      out.failures.push_back("divisor has the wrong degree or is zero");
    }
    if (divides(curve.equation(), g)) out.failures.push_back("divisor " + g.to_string() + " is a multiple of F");
    for (const auto& member : cls.members) {
      ++out.pairs_checked;
      if (evaluate(g, member.coords()) != 0) {
        out.failures.push_back("divisor " + g.to_string() + " does not vanish at " + member.to_string());
      }
    }
  }
  const auto classes = static_cast<long>(cover.classes.size());
  if (classes > cover.reduced_point_count) {
    out.failures.push_back("more residue classes than points of the reduced curve");
  }
  if (cover.reduced_point_count > d * (p + 1)) {
    out.failures.push_back("reduced curve has more than d(p+1) points");
  }
  return out;
}

}  // namespace detcensus
