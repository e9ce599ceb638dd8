// detcensus: command-line front end for discriminants, orbit censuses,
// sparsity experiments and determinant-method covers.

#include "detcensus/detmethod.hpp"
#include "detcensus/enumeration.hpp"
#include "detcensus/invariants.hpp"
#include "detcensus/orbits.hpp"
#include "detcensus/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace detcensus;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kParse = 2, kResource = 3, kVerification = 4 };

struct Common {
  std::string out;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::uint64_t max_forms = 2'000'000;
  std::uint64_t max_points = 1'000'000;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

HomogeneousForm read_form(const std::string& path) {
  try {
    return form_from_json(Json::parse(read_file(path)));
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

PlaneCurve read_curve(const std::string& path) {
  HomogeneousForm f = read_form(path);
  try {
    return PlaneCurve(std::move(f));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
}

PrimeSet parse_primes(const std::string& text) {
  if (text.empty()) return {};
  const auto c = parse_constraint("sunit=" + text);
  return std::get<DiscSUnit>(c).primes;
}

std::vector<long> parse_b_list(const std::string& text) {
  std::vector<long> out;
  std::istringstream in(text);
  std::string piece;
  while (std::getline(in, piece, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stol(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw ParseError("malformed B list entry \"" + piece + "\"");
    }
  }
  if (out.empty()) throw ParseError("empty B list");
  return out;
}

std::string factorization_text(const SUnitFactorization& f) {
  std::string out = f.sign < 0 ? "-1" : "1";
  for (const auto& [p, e] : f.exponents) {
    if (e) out += " * " + p.get_str() + (e > 1 ? "^" + std::to_string(e) : "");
  }
  return out;
}

// Trial division to 10^6; any leftover cofactor is reported as prime or composite.
std::string full_factorization(const Integer& n) {
  Integer rest = abs_value(n);
  std::string out = n < 0 ? "-1" : "1";
  for (unsigned long p = 2; p <= 1'000'000 && rest > 1; p = (p == 2 ? 3 : p + 2)) {
    unsigned e = 0;
    while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
      rest /= p;
      ++e;
    }
    if (e) out += " * " + std::to_string(p) + (e > 1 ? "^" + std::to_string(e) : "");
  }
  if (rest > 1) out += " * " + rest.get_str() + (is_prime(rest) ? "" : " (composite, unfactored)");
  return out;
}

void emit(const Common& common, const std::string& text) {
  if (common.out.empty()) {
    std::cout << text;
  } else {
    write_file(common.out, text);
  }
}

int cmd_disc(const Common& common, const std::string& path, const std::string& primes_text, int samples) {
  const HomogeneousForm f = read_form(path);
  if (f.vars() != 2) throw ParseError("disc: the form must be binary");
  if (f.degree() < 2) throw ParseError("disc: the form must have degree at least 2");
  const Integer disc = discriminant_binary(f);
  std::ostringstream out;
  out << "form: " << f.to_string() << "\n";
  out << "discriminant: " << disc.get_str() << "\n";
  if (disc == 0) {
    out << "factorization: none (zero discriminant)\n";
  } else if (!primes_text.empty()) {
    const PrimeSet s = parse_primes(primes_text);
    const auto factored = s_unit_factor(disc, s);
    out << "S-unit over " << s.to_string() << ": "
        << (factored ? factorization_text(*factored) : std::string("no")) << "\n";
  } else {
    out << "factorization: " << full_factorization(disc) << "\n";
  }
  if (samples > 0) {
    std::mt19937_64 rng(common.seed);
    std::uniform_int_distribution<int> pick(0, 3);
    const auto S = UnimodularMatrix::from_rows({{0, -1}, {1, 0}});
    const auto T = UnimodularMatrix::from_rows({{1, 1}, {0, 1}});
    const auto Ti = UnimodularMatrix::from_rows({{1, -1}, {0, 1}});
    const auto R = UnimodularMatrix::from_rows({{1, 0}, {0, -1}});
    const UnimodularMatrix gens[] = {S, T, Ti, R};
    for (int i = 0; i < samples; ++i) {
      UnimodularMatrix g = UnimodularMatrix::identity(2);
      for (int step = 0; step < 8; ++step) g = g * gens[pick(rng)];
      if (discriminant_binary(act(g, f)) != disc) {
        throw VerificationFailure("discriminant changed under " + g.to_string());
      }
    }
    out << "invariance: " << samples << " random GL2(Z) words verified (seed " << common.seed << ")\n";
  }
  emit(common, out.str());
  return kOk;
}

int cmd_census(const Common& common, int d, long B, const std::string& constraint_text,
               const std::string& group_text, const std::string& forms_out, bool no_timing) {
  CensusQuery q{d, B, parse_constraint(constraint_text), true};
  try {
    q.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  const PrimeSet primes =
      std::holds_alternative<DiscSUnit>(q.constraint) ? std::get<DiscSUnit>(q.constraint).primes : PrimeSet{};
  const OrbitGroup group = group_text.empty() ? default_group(q) : parse_group(group_text, primes);
  const EnumerationOptions options{common.threads, common.max_forms};

  const auto start = std::chrono::steady_clock::now();
  const CensusResult result = count_census(q, group, options);
  const auto ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
  if (auto failure = verify_partition(result.partition)) throw VerificationFailure(*failure);

  SparsityReport row;
  row.rows.push_back({B, result.raw_count, result.orbit_count, no_timing ? 0 : ms});
  std::cout << row.to_csv();
  if (!common.out.empty()) write_file(common.out, partition_to_json(result.partition).dump(2) + "\n");
  if (!forms_out.empty()) {
    std::string lines;
    for (const auto& cls : result.partition.classes) {
      for (const auto& m : cls.members) lines += form_to_json(m).dump() + "\n";
    }
    write_file(forms_out, lines);
  }
  return kOk;
}

int cmd_sparsity(const Common& common, int d, const std::string& constraint_text, const std::string& group_text,
                 const std::string& b_text, bool no_timing, std::uint64_t budget_s) {
  const DiscConstraint constraint = parse_constraint(constraint_text);
  const PrimeSet primes =
      std::holds_alternative<DiscSUnit>(constraint) ? std::get<DiscSUnit>(constraint).primes : PrimeSet{};
  const OrbitGroup group = group_text.empty() ? default_group(CensusQuery{d, 1, constraint, true})
                                              : parse_group(group_text, primes);
  SparsityOptions options;
  options.enumeration = {common.threads, common.max_forms};
  options.record_timing = !no_timing;
  options.time_budget_ms = budget_s * 1000;
  std::vector<long> Bs = parse_b_list(b_text);
  SparsityReport report;
  try {
    report = run_sparsity(d, constraint, Bs, group, options);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  std::cout << report.to_csv();
  std::cout << "slope_raw," << (report.fitted_slope_raw ? format_decimal(*report.fitted_slope_raw) : "undefined")
            << "\n";
  std::cout << "slope_orbits,"
            << (report.fitted_slope_orbits ? format_decimal(*report.fitted_slope_orbits) : "undefined") << "\n";
  if (!common.out.empty()) {
    write_file(common.out + ".csv", report.to_csv());
    write_file(common.out + ".json", report.to_json().dump(2) + "\n");
  }
  return kOk;
}

int cmd_cover(const Common& common, const std::string& path, long H, int k) {
  const PlaneCurve curve = read_curve(path);
  if (H < 1 || k < curve.degree()) throw ParseError("cover: need H >= 1 and k >= deg F");
  const DivisorCover result = cover(curve, H, k, {common.threads, common.max_points});
  const CoverVerification check = verify_cover(curve, result);
  std::ostringstream summary;
  summary << "curve: " << curve.equation().to_string() << "\n"
          << "parameters: p = " << result.parameters.p.get_str() << ", k = " << k << ", e = " << result.parameters.e
          << " (" << result.parameters.description << ")\n"
          << "points: " << result.point_count << ", classes: " << result.classes.size()
          << ", #C(F_p) = " << result.reduced_point_count << "\n"
          << "divisors: " << check.divisors << ", spanned directly: " << check.spanned_directly
          << ", pairs checked: " << check.pairs_checked << "\n"
          << "verification: " << (check.ok() ? "ok" : "FAILED") << "\n";
  for (const auto& failure : check.failures) summary << "  " << failure << "\n";
  std::cout << summary.str();
  if (!common.out.empty()) write_file(common.out, cover_to_json(result).dump(2) + "\n");
  return check.ok() ? kOk : kVerification;
}

int cmd_hilbert(const Common& common, const std::string& path, int k_min, int k_max) {
  const PlaneCurve curve = read_curve(path);
  if (k_min < 0 || k_max < k_min) throw ParseError("hilbert: need 0 <= k-min <= k-max");
  std::ostringstream out;
  out << "k,e,difference\n";
  long previous = -1;
  for (int k = k_min; k <= k_max; ++k) {
    const long e = hilbert_dimension(curve, k);
    out << k << "," << e << "," << (previous < 0 ? std::string("") : std::to_string(e - previous)) << "\n";
    previous = e;
  }
  emit(common, out.str());
  return kOk;
}

int cmd_orbits(const Common& common, const std::string& path, const std::string& group_text,
               const std::string& primes_text, long bound, bool pairwise) {
  const auto forms = read_forms(read_file(path));
  const OrbitGroup group = parse_group(group_text, parse_primes(primes_text));
  OrbitPartition partition;
  try {
    partition = partition_orbits(forms, group, {bound, pairwise ? PartitionMethod::Pairwise : PartitionMethod::Canonical});
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  } catch (const std::domain_error& e) {
    throw ParseError(e.what());
  }
  if (auto failure = verify_partition(partition)) throw VerificationFailure(*failure);
  emit(common, partition_to_json(partition).dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orbit censuses of binary forms and determinant-method covers of plane curves"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output path");
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--seed", common.seed, "Seed for randomized self-checks");
    sub->add_option("--max-forms", common.max_forms, "Cap on materialized forms (0 = none)");
    sub->add_option("--max-points", common.max_points, "Cap on curve points (0 = none)");
  };

  std::string form_path, primes_text;
  int samples = 0;
  auto* disc = app.add_subcommand("disc", "Discriminant and its factorization");
  disc->add_option("form", form_path, "Binary form JSON file")->required();
  disc->add_option("--primes", primes_text, "Comma-separated primes S for an S-unit test");
  disc->add_option("--invariance-samples", samples, "Random GL2(Z) words to check invariance against");
  add_common(disc);

  int d = 3;
  long B = 1;
  std::string constraint_text = "nonzero", group_text, forms_out, b_text;
  bool no_timing = false;
  auto* census = app.add_subcommand("census", "Enumerate forms and partition them into orbits");
  census->add_option("--d", d, "Degree")->check(CLI::Range(2, 15));
  census->add_option("-B,--B", B, "Coefficient bound")->required();
  census->add_option("--constraint", constraint_text, "nonzero | disc=N | sunit=p1,p2,...");
  census->add_option("--group", group_text, "sl2z | gl2z | gl2zs");
  census->add_option("--forms-out", forms_out, "Write the enumerated forms as JSON lines");
  census->add_flag("--no-timing", no_timing, "Report wall_ms as 0");
  add_common(census);

  std::uint64_t budget_s = 0;
  auto* sparsity = app.add_subcommand("sparsity", "Counts and log-log slopes over a list of B");
  sparsity->add_option("--d", d, "Degree")->check(CLI::Range(2, 15));
  sparsity->add_option("--constraint", constraint_text, "nonzero | disc=N | sunit=p1,p2,...");
  sparsity->add_option("--group", group_text, "sl2z | gl2z | gl2zs");
  sparsity->add_option("--B-list", b_text, "Increasing comma-separated bounds")->required();
  sparsity->add_option("--time-budget", budget_s, "Seconds before further rows are refused (0 = none)");
  sparsity->add_flag("--no-timing", no_timing, "Report wall_ms as 0");
  add_common(sparsity);

  std::string curve_path;
  long H = 1;
  int k = 0;
  auto* cover_cmd = app.add_subcommand("cover", "Auxiliary divisors covering the points of bounded height");
  cover_cmd->add_option("curve", curve_path, "Ternary form JSON file")->required();
  cover_cmd->add_option("-H,--H", H, "Height bound")->required();
  cover_cmd->add_option("-k,--k", k, "Degree of the auxiliary forms")->required();
  add_common(cover_cmd);

  int k_min = 0, k_max = 0;
  auto* hilbert = app.add_subcommand("hilbert", "Hilbert function of the curve and its first differences");
  hilbert->add_option("curve", curve_path, "Ternary form JSON file")->required();
  hilbert->add_option("--k-min", k_min, "First degree")->required();
  hilbert->add_option("--k-max", k_max, "Last degree")->required();
  add_common(hilbert);

  std::string forms_path;
  long bound = 0;
  bool pairwise = false;
  auto* orbits = app.add_subcommand("orbits", "Partition a list of binary forms into orbits");
  orbits->add_option("forms", forms_path, "JSON array or JSON lines of forms")->required();
  orbits->add_option("--group", group_text, "sl2z | gl2z | gl2zs")->required();
  orbits->add_option("--primes", primes_text, "Primes S for gl2zs");
  orbits->add_option("--bound", bound, "Witness entry bound (0 = automatic)");
  orbits->add_flag("--pairwise", pairwise, "Use pairwise equivalence search");
  add_common(orbits);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*disc) return cmd_disc(common, form_path, primes_text, samples);
    if (*census) return cmd_census(common, d, B, constraint_text, group_text, forms_out, no_timing);
    if (*sparsity) return cmd_sparsity(common, d, constraint_text, group_text, b_text, no_timing, budget_s);
    if (*cover_cmd) return cmd_cover(common, curve_path, H, k);
    if (*hilbert) return cmd_hilbert(common, curve_path, k_min, k_max);
    if (*orbits) return cmd_orbits(common, forms_path, group_text, primes_text, bound, pairwise);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const ResourceLimitExceeded& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResource;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kVerification;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
