#pragma once

// The determinant method for plane curves over Q.
//
// Points of height <= H on a curve F = 0 are grouped by their reduction mod a
// prime p. For a basis f_1..f_e of degree-k forms on the curve, the e x e
// evaluation determinant of points in one class centered at a smooth point is
// divisible by p^{e(e-1)/2}, while Hadamard bounds it by e^{e/2} H^{ke}. Once
// p is large enough the determinant must vanish and each class lies on the
// zero set of an explicit degree-k form.

#include "detcensus/errors.hpp"
#include "detcensus/forms.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace detcensus {

/// Rigorous squarefreeness test for a ternary form: restrictions to the
/// lines z = a x + b y over a grid larger than the degree of the
/// discriminant-of-restriction polynomial cannot all be singular unless F has
/// a repeated factor.
bool is_squarefree(const HomogeneousForm& f);

class PlaneCurve {
 public:
  /// Throws std::invalid_argument unless f is a nonzero, primitive, squarefree ternary form of degree >= 1.
  explicit PlaneCurve(HomogeneousForm f);

  const HomogeneousForm& equation() const { return f_; }
  int degree() const { return f_.degree(); }

 private:
  HomogeneousForm f_;
};

/// Every primitive sign-canonical [x:y:z] with max |coordinate| <= H on the curve,
/// in lexicographic order. Throws ResourceLimitExceeded past max_points (0 = no cap).
std::vector<ProjectivePoint> curve_points(const PlaneCurve& curve, long H, unsigned threads = 1,
                                          std::uint64_t max_points = 0);

struct MonomialBasis {
  int k = 0;
  std::vector<MultiIndex> basis;

  std::size_t size() const { return basis.size(); }
};

/// Degree-k monomials not divisible by the leading monomial of F. The size is
/// checked against the exact rank of the degree-k slice of the ideal (F);
/// throws VerificationFailure on a mismatch.
MonomialBasis monomial_basis(const PlaneCurve& curve, int k);

/// dim of the degree-k part of Q[x,y,z]/(F), by exact rank of the multiples of F.
long hilbert_dimension(const PlaneCurve& curve, int k);

/// e(k) = dk - d(d-3)/2, valid for k >= d - 2.
long hilbert_polynomial_value(int d, int k);

struct ResidueClass {
  Integer p;
  /// Reduction in P^2(F_p), scaled so the first nonzero entry is 1.
  std::vector<long> center;
  std::vector<ProjectivePoint> members;
  /// The gradient of F mod p does not vanish at the center.
  bool smooth_center = false;
};

/// Image of a primitive point in P^2(F_p), normalized as in ResidueClass::center.
std::vector<long> reduce_mod_p(const ProjectivePoint& point, long p);

/// Groups points by reduction mod p; classes sorted by center. Throws
/// std::invalid_argument when p is not a prime that fits in a long.
std::vector<ResidueClass> partition_by_reduction(std::span<const ProjectivePoint> points,
                                                 const Integer& p, const PlaneCurve& curve);

/// det [f_i(P_j)] with one row per point and one column per basis monomial.
/// Throws std::invalid_argument unless there are exactly e points.
Integer evaluation_determinant(const MonomialBasis& basis, std::span<const ProjectivePoint> points);

/// e(e-1)/2: the guaranteed p-adic valuation of the evaluation determinant of
/// e points in one residue class around a smooth point of a curve.
Integer valuation_lower_bound(long e);

struct ValuationRate {
  long e = 0;
  Integer bound;   ///< e(e-1)/2
  Rational rate;   ///< k e d / 2
  Rational ratio;  ///< bound / rate
};

ValuationRate asymptotic_valuation_rate(int d, int k);

struct SpannedDirectly {};
using AuxiliaryDivisor = std::variant<HomogeneousForm, SpannedDirectly>;

/// Thrown when the kernel form is a multiple of F.
class DivisorInIdeal : public VerificationFailure {
 public:
  using VerificationFailure::VerificationFailure;
};

/// A nonzero degree-k form vanishing on every member of the class, built from
/// the first reduced-echelon kernel vector of the evaluation matrix, or
/// SpannedDirectly when the evaluation matrix has full rank e.
AuxiliaryDivisor auxiliary_divisor(const PlaneCurve& curve, const MonomialBasis& basis,
                                   const ResidueClass& cls);

/// True iff F divides G in Q[x, y, z].
bool divides(const HomogeneousForm& f, const HomogeneousForm& g);

/// Reduction of the curve mod p has no singular point in P^2(F_p).
bool has_smooth_reduction(const PlaneCurve& curve, long p);

/// Number of points of the reduced curve in P^2(F_p).
long count_points_mod_p(const PlaneCurve& curve, long p);

struct ParameterChoice {
  Integer p;
  long e = 0;
  int k = 0;
  long H = 0;
  /// Exponent of p guaranteed to divide every full-class determinant.
  Integer valuation;
  /// Squared Hadamard bound e^e H^{2ke}, compared against p^{2 * valuation}.
  Integer hadamard_squared;
  /// Whether the smooth-reduction requirement was applied.
  bool required_smooth_reduction = false;
  std::string description;
};

/// Smallest prime p with p^{e(e-1)/2} > e^{e/2} H^{ke} at which the curve has
/// smooth reduction (when the curve has smooth reduction somewhere; otherwise
/// only the inequality is used). Requires k >= d and H >= 1.
ParameterChoice choose_parameters(const PlaneCurve& curve, long H, int k);

struct CoverClass {
  ResidueClass cls;
  std::optional<HomogeneousForm> divisor;  ///< nullopt: spanned directly
};

struct DivisorCover {
  ParameterChoice parameters;
  std::vector<CoverClass> classes;
  std::size_t point_count = 0;
  long reduced_point_count = 0;  ///< #C(F_p)
};

struct CoverOptions {
  unsigned threads = 1;
  std::uint64_t max_points = 0;
};

/// Full pipeline: parameters, point search, residue classes and one auxiliary
/// divisor per class.
DivisorCover cover(const PlaneCurve& curve, long H, int k, const CoverOptions& options = {});

struct CoverVerification {
  std::size_t pairs_checked = 0;
  std::size_t divisors = 0;
  std::size_t spanned_directly = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// Re-evaluates every (divisor, member) pair, checks each divisor is not a
/// multiple of F, that every class member reduces to its center, and the
/// class-count bounds #classes <= #C(F_p) <= d (p + 1).
CoverVerification verify_cover(const PlaneCurve& curve, const DivisorCover& cover);

}  // namespace detcensus
