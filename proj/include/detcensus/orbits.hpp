#pragma once

// Equivalence, canonical representatives, stabilizers and orbit partitions of
// binary forms under SL2(Z), GL2(Z) and GL2(Z[1/S]).
//
// All searches are exhaustive over matrices whose entries are bounded by an
// explicit entry bound. "Not equivalent" therefore always means "not
// equivalent within that bound", and every partition records the bound used.

#include "detcensus/forms.hpp"
#include "detcensus/invariants.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace detcensus {

enum class GroupKind { SL2Z, GL2Z, GL2ZS };

struct OrbitGroup {
  GroupKind kind = GroupKind::SL2Z;
  /// Only used by GL2ZS.
  PrimeSet primes;

  static OrbitGroup sl2z() { return {GroupKind::SL2Z, {}}; }
  static OrbitGroup gl2z() { return {GroupKind::GL2Z, {}}; }
  static OrbitGroup gl2zs(PrimeSet s) { return {GroupKind::GL2ZS, std::move(s)}; }

  std::string name() const;
};

/// Smallest power of two exceeding 4 * (2 * height)^(2/d).
long default_entry_bound(const Integer& height, int d);

/// A g in SL2(Z) with max |entry| <= entry_bound and act(g, f1) == f2, or
/// nullopt. Among several witnesses the smallest under (max entry, row-major
/// lexicographic) is returned.
std::optional<UnimodularMatrix> equivalent(const HomogeneousForm& f1, const HomogeneousForm& f2,
                                           long entry_bound);

/// Same search over GL2(Z) (determinant +-1).
std::optional<UnimodularMatrix> equivalent_gl(const HomogeneousForm& f1,
                                              const HomogeneousForm& f2, long entry_bound);

struct CanonicalForm {
  HomogeneousForm rep;
  /// act(witness, f) == rep.
  UnimodularMatrix witness;
  long entry_bound;
};

/// Total order used to pick representatives: height first, then the grevlex
/// coefficient vector compared entrywise by absolute value with a positive
/// entry ranked before its negative. Returns <0, 0, >0.
int compare_forms(const HomogeneousForm& a, const HomogeneousForm& b);

/// Iterated descent to the smallest form (under compare_forms) reachable by
/// matrices with entries <= entry_bound; stops at a form that is minimal in
/// its own ball. entry_bound <= 0 selects default_entry_bound(height(f), d).
/// Throws std::domain_error on a zero discriminant.
CanonicalForm canonical_rep(const HomogeneousForm& f, long entry_bound = 0,
                            bool allow_orientation_reversal = false);

/// Every g in SL2(Z) with entries <= entry_bound fixing f, sorted.
/// Requires d >= 3 and nonzero discriminant.
std::vector<UnimodularMatrix> stabilizer(const HomogeneousForm& f, long entry_bound);

struct OrbitClass {
  HomogeneousForm representative;
  /// Positions of the members in the partitioned input.
  std::vector<std::size_t> member_indices;
  std::vector<HomogeneousForm> members;
  /// act(witnesses[i], representative) == scales[i] * members[i]. For SL2(Z)
  /// and GL2(Z) the witness is unimodular and the scale is 1; for GL2(Z[1/S])
  /// the witness is an integral matrix whose determinant and the scale are
  /// S-units (an integral multiple of an element of GL2(Z[1/S])).
  std::vector<IntegralMatrix> witnesses;
  std::vector<Rational> scales;
};

struct OrbitPartition {
  OrbitGroup group;
  long entry_bound = 0;
  std::vector<OrbitClass> classes;

  std::size_t size() const { return classes.size(); }
};

enum class PartitionMethod {
  /// Canonical representatives, with orbit expansion to assign members in bulk.
  Canonical,
  /// Union-find over pairwise bounded equivalence searches.
  Pairwise,
};

struct PartitionOptions {
  long entry_bound = 0;  ///< <= 0: derived from the largest input height.
  PartitionMethod method = PartitionMethod::Canonical;
};

/// A model of f over Z[1/S]: f(transform x) == scale * form, with form
/// integral, S-primitive and sign-normalized.
struct SMinimalModel {
  HomogeneousForm form;
  IntegralMatrix transform;
  Rational scale;
};

/// The models of f of least discriminant among all f(Mx) with M integral of
/// S-unit determinant, normalized to be S-primitive. They are found by
/// descending through the p + 1 index-p sublattices for each p in S and then
/// collecting every neighbour with the same discriminant (possible only for
/// even degree). At most max_models are returned; the first is the descent
/// endpoint. Throws std::domain_error unless disc(f) is a nonzero S-unit.
std::vector<SMinimalModel> s_minimal_models(const HomogeneousForm& f, const PrimeSet& s,
                                            std::size_t max_models = 256);

/// Partitions binary forms of a single degree into orbits. For GL2(Z[1/S])
/// two forms share a class when their S-minimal models meet a common
/// GL2(Z)-class up to sign. Classes are
/// ordered by their first member's position in the input. Throws
/// std::invalid_argument on mixed degrees or non-binary input and
/// std::domain_error on zero discriminants (or non-S-unit discriminants for GL2ZS).
OrbitPartition partition_orbits(std::span<const HomogeneousForm> forms, const OrbitGroup& group,
                                const PartitionOptions& options = {});

/// Re-checks every witness exactly; returns a description of the first
/// failure, or nullopt when all witnesses verify.
std::optional<std::string> verify_partition(const OrbitPartition& partition);

}  // namespace detcensus
