#pragma once

// Height-bounded enumeration of integer binary forms with discriminant
// constraints, and the orbit census built on top of it.

#include "detcensus/errors.hpp"
#include "detcensus/forms.hpp"
#include "detcensus/orbits.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace detcensus {

struct DiscNonzero {};
struct DiscEquals {
  Integer value;
};
struct DiscSUnit {
  PrimeSet primes;
};
using DiscConstraint = std::variant<DiscNonzero, DiscEquals, DiscSUnit>;

std::string describe(const DiscConstraint& constraint);

struct CensusQuery {
  int d = 3;
  long B = 1;  ///< max |coefficient|
  DiscConstraint constraint = DiscNonzero{};
  /// Keep only forms with content 1 whose first nonzero coefficient is positive.
  bool primitive_only = true;

  /// Throws std::invalid_argument when B < 1, d < 2, or the fixed discriminant is zero.
  void validate() const;
};

struct EnumerationOptions {
  unsigned threads = 1;
  /// Materialized forms allowed before ResourceLimitExceeded; 0 disables the cap.
  std::uint64_t max_forms = 2'000'000;
};

/// Dense coefficient tuples (a_0, ..., a_d), in stream order.
using CoefficientRows = std::vector<std::vector<long>>;

/// Exactly the forms of the query, each once. The order is lexicographic in
/// (a_0, ..., a_d) and independent of the thread count.
CoefficientRows enumerate_coefficients(const CensusQuery& q, const EnumerationOptions& options = {});

/// Streams the forms of the query to `sink` in stream order.
void enumerate_forms(const CensusQuery& q, const std::function<void(const HomogeneousForm&)>& sink,
                     const EnumerationOptions& options = {});

std::vector<HomogeneousForm> collect_forms(const CensusQuery& q,
                                           const EnumerationOptions& options = {});

/// Number of forms the query would stream, without materializing them.
std::uint64_t count_forms(const CensusQuery& q, unsigned threads = 1);

struct CensusResult {
  std::uint64_t raw_count = 0;
  std::uint64_t orbit_count = 0;
  OrbitPartition partition;
};

/// Enumerates the query and partitions the result into orbits of `group`.
CensusResult count_census(const CensusQuery& q, const OrbitGroup& group,
                          const EnumerationOptions& options = {},
                          const PartitionOptions& partition_options = {});

/// The group a query is censused under by default: GL2(Z[1/S]) for S-unit
/// constraints, SL2(Z) otherwise.
OrbitGroup default_group(const CensusQuery& q);

}  // namespace detcensus
