#pragma once

// Serialization of forms, partitions and covers, and the sparsity experiment
// harness behind the command-line tool.

#include "detcensus/detmethod.hpp"
#include "detcensus/enumeration.hpp"
#include "detcensus/errors.hpp"
#include "detcensus/orbits.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace detcensus {

using Json = nlohmann::ordered_json;

// Forms: {"n": 2, "d": 3, "coeffs": {"3,0": "1", "0,3": "1"}}.
Json form_to_json(const HomogeneousForm& f);
/// Throws ParseError on a malformed object.
HomogeneousForm form_from_json(const Json& j);

Json point_to_json(const ProjectivePoint& p);
ProjectivePoint point_from_json(const Json& j);

/// Row-major entry list.
Json matrix_to_json(const IntegralMatrix& g);
IntegralMatrix matrix_from_json(const Json& j);

/// {"group", "primes", "entry_bound", "classes": [{"rep", "size", "witnesses",
/// "members", "member_indices", "scales"}]}.
Json partition_to_json(const OrbitPartition& partition);
OrbitPartition partition_from_json(const Json& j);

/// {"p", "k", "e", "H", "point_count", "reduced_point_count", "classes":
/// [{"center", "members", "divisor", "smooth_center"}]}.
Json cover_to_json(const DivisorCover& cover);
DivisorCover cover_from_json(const Json& j);

/// Reads either a JSON array of forms or one form per line.
std::vector<HomogeneousForm> read_forms(const std::string& text);

/// floor(log2(n) * 2^64) computed with 128 guard bits; n must be positive.
Integer log2_fixed(const Integer& n);

/// Exact least-squares slope of log2(y) against log2(x) over pairs with
/// y > 0, using log2_fixed for the logarithms. nullopt with fewer than two
/// usable pairs or when all x coincide.
std::optional<Rational> fit_loglog_slope(const std::vector<std::pair<Integer, Integer>>& points);

/// Rounds half away from zero to `places` decimals, e.g. "1.000" or "-0.250".
std::string format_decimal(const Rational& value, int places = 3);

struct SparsityRow {
  long B = 0;
  std::uint64_t raw_count = 0;
  std::uint64_t orbit_count = 0;
  std::uint64_t wall_ms = 0;

  friend bool operator==(const SparsityRow&, const SparsityRow&) = default;
};

/// raw_count is the number of primitive forms of nonzero discriminant in the
/// coefficient box (the unconstrained baseline); orbit_count is the number of
/// orbits among the forms that satisfy the constraint.
struct SparsityReport {
  int d = 3;
  std::string constraint;
  std::string group;
  std::vector<SparsityRow> rows;
  std::optional<Rational> fitted_slope_raw;
  std::optional<Rational> fitted_slope_orbits;

  /// Recomputes both slopes from the rows.
  void refit();

  std::string to_csv() const;
  Json to_json() const;
  static SparsityReport from_json(const Json& j);
  /// Rows only; the metadata fields stay at their defaults.
  static std::vector<SparsityRow> rows_from_csv(const std::string& text);
};

struct SparsityOptions {
  EnumerationOptions enumeration;
  PartitionMethod method = PartitionMethod::Canonical;
  /// Record wall_ms as 0 so reruns are byte-identical.
  bool record_timing = true;
  /// Abort with ResourceLimitExceeded once a row starts after this many ms; 0 disables.
  std::uint64_t time_budget_ms = 0;
};

/// One row per B (strictly increasing), orbits taken under `group`.
SparsityReport run_sparsity(int d, const DiscConstraint& constraint, const std::vector<long>& Bs,
                            const OrbitGroup& group, const SparsityOptions& options = {});

/// Parses "nonzero", "disc=N" or "sunit=2,3". Throws ParseError.
DiscConstraint parse_constraint(const std::string& text);

/// Parses "sl2z", "gl2z" or "gl2zs" (with the primes for the last). Throws ParseError.
OrbitGroup parse_group(const std::string& text, const PrimeSet& primes);

}  // namespace detcensus
