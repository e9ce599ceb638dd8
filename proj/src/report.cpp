#include "detcensus/report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

namespace detcensus {

namespace {

Json integer_to_json(const Integer& v) {
  if (fits_int64(v)) return Json(static_cast<std::int64_t>(v.get_si()));
  return Json(v.get_str());
}

Integer integer_from_json(const Json& j) {
  if (j.is_number_integer()) return Integer(static_cast<long>(j.get<std::int64_t>()));
  if (j.is_string()) return parse_integer(j.get<std::string>());
  throw ParseError("expected an integer or a decimal string");
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw ParseError(std::string("missing field \"") + name + "\"");
  return j.at(name);
}

long small_integer(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) throw ParseError(std::string("field \"") + name + "\" must be an integer");
  return static_cast<long>(v.get<std::int64_t>());
}

// Rethrows input-shape errors raised by the core types as ParseError.
template <class F>
auto parsing(F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ParseError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ParseError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  } catch (const std::domain_error& e) {
    throw ParseError(e.what());
  }
}

std::string group_key(GroupKind kind) {
  switch (kind) {
    case GroupKind::SL2Z:
      return "sl2z";
    case GroupKind::GL2Z:
      return "gl2z";
    case GroupKind::GL2ZS:
      return "gl2zs";
  }
  return "?";
}

Json primes_to_json(const PrimeSet& s) {
  Json out = Json::array();
  for (const auto& p : s.primes()) out.push_back(integer_to_json(p));
  return out;
}

PrimeSet primes_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("primes must be an array");
  std::vector<Integer> primes;
  for (const auto& p : j) primes.push_back(integer_from_json(p));
  return PrimeSet(std::move(primes));
}

Json rational_to_json(const std::optional<Rational>& r) {
  if (!r) return nullptr;
  return Json{{"num", r->get_num().get_str()}, {"den", r->get_den().get_str()}, {"decimal", format_decimal(*r)}};
}

std::optional<Rational> rational_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  Rational r(integer_from_json(field(j, "num")), integer_from_json(field(j, "den")));
  if (r.get_den() == 0) throw ParseError("zero denominator");
  r.canonicalize();
  return r;
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ParseError("malformed unsigned integer: " + std::string(text));
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string piece;
  std::istringstream in(text);
  while (std::getline(in, piece, sep)) out.push_back(piece);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

Json form_to_json(const HomogeneousForm& f) {
  Json coeffs = Json::object();
  for (const auto& [index, c] : f.terms()) {
    std::string key;
    for (std::size_t i = 0; i < index.size(); ++i) key += (i ? "," : "") + std::to_string(index[i]);
    coeffs[key] = c.get_str();
  }
  return Json{{"n", f.vars()}, {"d", f.degree()}, {"coeffs", std::move(coeffs)}};
}

HomogeneousForm form_from_json(const Json& j) {
  return parsing([&] {
    const long n = small_integer(j, "n");
    const long d = small_integer(j, "d");
    if (n < 1 || n > 64 || d < 0 || d > 4096) throw ParseError("form: n or d out of range");
    const Json& coeffs = field(j, "coeffs");
    if (!coeffs.is_object()) throw ParseError("form: coeffs must be an object");
    HomogeneousForm f(static_cast<int>(n), static_cast<int>(d));
    for (const auto& [key, value] : coeffs.items()) {
      MultiIndex index;
      for (const auto& part : split(key, ',')) index.push_back(static_cast<int>(parse_u64(part)));
      if (f.coeff(index) != 0) throw ParseError("form: duplicate monomial " + key);
      f.set(index, integer_from_json(value));
    }
    return f;
  });
}

Json point_to_json(const ProjectivePoint& p) {
  Json out = Json::array();
  for (const auto& c : p.coords()) out.push_back(integer_to_json(c));
  return out;
}

ProjectivePoint point_from_json(const Json& j) {
  return parsing([&] {
    if (!j.is_array() || j.empty()) throw ParseError("point must be a nonempty array");
    std::vector<Integer> coords;
    for (const auto& c : j) coords.push_back(integer_from_json(c));
    return ProjectivePoint::normalize(coords);
  });
}

Json matrix_to_json(const IntegralMatrix& g) {
  Json out = Json::array();
  for (const auto& e : g.entries()) out.push_back(integer_to_json(e));
  return out;
}

IntegralMatrix matrix_from_json(const Json& j) {
  return parsing([&] {
    if (!j.is_array()) throw ParseError("matrix must be an array");
    std::vector<Integer> entries;
    for (const auto& e : j) entries.push_back(integer_from_json(e));
    int n = 1;
    while (static_cast<std::size_t>(n * n) < entries.size()) ++n;
    if (static_cast<std::size_t>(n * n) != entries.size()) throw ParseError("matrix entry count is not a square");
    return IntegralMatrix(n, std::move(entries));
  });
}

Json partition_to_json(const OrbitPartition& partition) {
  Json classes = Json::array();
  for (const auto& cls : partition.classes) {
    Json witnesses = Json::array(), members = Json::array(), scales = Json::array();
    for (const auto& w : cls.witnesses) witnesses.push_back(matrix_to_json(w));
    for (const auto& m : cls.members) members.push_back(form_to_json(m));
    for (const auto& s : cls.scales) scales.push_back(s.get_str());
    classes.push_back(Json{{"rep", form_to_json(cls.representative)},
                           {"size", cls.members.size()},
                           {"witnesses", std::move(witnesses)},
                           {"members", std::move(members)},
                           {"member_indices", cls.member_indices},
                           {"scales", std::move(scales)}});
  }
  return Json{{"group", group_key(partition.group.kind)},
              {"primes", primes_to_json(partition.group.primes)},
              {"entry_bound", partition.entry_bound},
              {"classes", std::move(classes)}};
}

OrbitPartition partition_from_json(const Json& j) {
  return parsing([&] {
    OrbitPartition out;
    out.group = parse_group(field(j, "group").get<std::string>(), primes_from_json(field(j, "primes")));
    out.entry_bound = small_integer(j, "entry_bound");
    for (const auto& c : field(j, "classes")) {
      OrbitClass cls{form_from_json(field(c, "rep")), {}, {}, {}, {}};
      for (const auto& w : field(c, "witnesses")) cls.witnesses.push_back(matrix_from_json(w));
      for (const auto& m : field(c, "members")) cls.members.push_back(form_from_json(m));
      for (const auto& i : field(c, "member_indices")) cls.member_indices.push_back(i.get<std::size_t>());
      for (const auto& s : field(c, "scales")) {
        Rational r;
        if (!s.is_string() || r.set_str(s.get<std::string>(), 10) != 0) throw ParseError("malformed scale");
        r.canonicalize();
        cls.scales.push_back(r);
      }
      const auto size = static_cast<std::size_t>(small_integer(c, "size"));
      if (cls.members.size() != size || cls.witnesses.size() != size || cls.scales.size() != size ||
          cls.member_indices.size() != size) {
        throw ParseError("partition class lists disagree with its size");
      }
      out.classes.push_back(std::move(cls));
    }
    return out;
  });
}

Json cover_to_json(const DivisorCover& cover) {
  Json classes = Json::array();
  for (const auto& entry : cover.classes) {
    Json members = Json::array();
    for (const auto& m : entry.cls.members) members.push_back(point_to_json(m));
    classes.push_back(Json{{"center", entry.cls.center},
                           {"members", std::move(members)},
                           {"divisor", entry.divisor ? form_to_json(*entry.divisor) : Json(nullptr)},
                           {"smooth_center", entry.cls.smooth_center}});
  }
  const auto& par = cover.parameters;
  return Json{{"p", integer_to_json(par.p)},
              {"k", par.k},
              {"e", par.e},
              {"H", par.H},
              {"valuation", integer_to_json(par.valuation)},
              {"required_smooth_reduction", par.required_smooth_reduction},
              {"point_count", cover.point_count},
              {"reduced_point_count", cover.reduced_point_count},
              {"classes", std::move(classes)}};
}

DivisorCover cover_from_json(const Json& j) {
  return parsing([&] {
    DivisorCover out;
    auto& par = out.parameters;
    par.p = integer_from_json(field(j, "p"));
    par.k = static_cast<int>(small_integer(j, "k"));
    if (j.contains("e")) par.e = small_integer(j, "e");
    if (j.contains("H")) par.H = small_integer(j, "H");
    if (j.contains("valuation")) par.valuation = integer_from_json(j.at("valuation"));
    if (j.contains("required_smooth_reduction")) {
      par.required_smooth_reduction = j.at("required_smooth_reduction").get<bool>();
    }
    if (j.contains("point_count")) out.point_count = j.at("point_count").get<std::size_t>();
    if (j.contains("reduced_point_count")) out.reduced_point_count = small_integer(j, "reduced_point_count");
    for (const auto& c : field(j, "classes")) {
      CoverClass entry;
      entry.cls.p = par.p;
      entry.cls.center = field(c, "center").get<std::vector<long>>();
      for (const auto& m : field(c, "members")) entry.cls.members.push_back(point_from_json(m));
      entry.cls.smooth_center = field(c, "smooth_center").get<bool>();
      const Json& divisor = field(c, "divisor");
      if (!divisor.is_null()) entry.divisor = form_from_json(divisor);
      out.classes.push_back(std::move(entry));
    }
    return out;
  });
}

std::vector<HomogeneousForm> read_forms(const std::string& text) {
  return parsing([&] {
    std::vector<HomogeneousForm> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
      for (const auto& f : Json::parse(text)) out.push_back(form_from_json(f));
      return out;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.push_back(form_from_json(Json::parse(line)));
    }
    return out;
  });
}

Integer log2_fixed(const Integer& n) {
  if (n <= 0) throw std::domain_error("log2_fixed: argument must be positive");
  constexpr unsigned long guard = 128;
  constexpr unsigned long fraction_bits = 64;
  const unsigned long integer_part = mpz_sizeinbase(n.get_mpz_t(), 2) - 1;
  // x = n / 2^integer_part in [1, 2), held with `guard` fractional bits.
  Integer x = n;
  if (integer_part <= guard) {
    x <<= (guard - integer_part);
  } else {
    x >>= (integer_part - guard);
  }
  const Integer two = Integer(1) << (guard + 1);
  Integer bits = 0;
  for (unsigned long i = 0; i < fraction_bits; ++i) {
    x = (x * x) >> guard;
    bits <<= 1;
    if (x >= two) {
      x >>= 1;
      bits += 1;
    }
  }
  return (Integer(integer_part) << fraction_bits) + bits;
}

std::optional<Rational> fit_loglog_slope(const std::vector<std::pair<Integer, Integer>>& points) {
  std::vector<std::pair<Integer, Integer>> logs;
  for (const auto& [x, y] : points) {
    if (y > 0) {
      if (x <= 0) throw std::domain_error("fit_loglog_slope: abscissae must be positive");
      logs.emplace_back(log2_fixed(x), log2_fixed(y));
    }
  }
  if (logs.size() < 2) return std::nullopt;
  const Integer n = static_cast<unsigned long>(logs.size());
  Integer sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : logs) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const Integer denominator = n * sxx - sx * sx;
  if (denominator == 0) return std::nullopt;
  Rational slope(n * sxy - sx * sy, denominator);
  slope.canonicalize();
  return slope;
}

std::string format_decimal(const Rational& value, int places) {
  if (places < 0) throw std::invalid_argument("format_decimal: negative precision");
  const Integer scale = power(Integer(10), static_cast<unsigned long>(places));
  const Integer num = abs_value(value.get_num()) * scale;
  const Integer den = value.get_den();
  Integer rounded = (2 * num + den) / (2 * den);
  std::string digits = rounded.get_str();
  if (digits.size() <= static_cast<std::size_t>(places)) {
    digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
  }
  std::string out = (value < 0 && rounded != 0) ? "-" : "";
  out += digits.substr(0, digits.size() - static_cast<std::size_t>(places));
  if (places > 0) out += "." + digits.substr(digits.size() - static_cast<std::size_t>(places));
  return out;
}

void SparsityReport::refit() {
  std::vector<std::pair<Integer, Integer>> raw, orbits;
  for (const auto& row : rows) {
    raw.emplace_back(Integer(row.B), Integer(static_cast<unsigned long>(row.raw_count)));
    orbits.emplace_back(Integer(row.B), Integer(static_cast<unsigned long>(row.orbit_count)));
  }
  fitted_slope_raw = fit_loglog_slope(raw);
  fitted_slope_orbits = fit_loglog_slope(orbits);
}

std::string SparsityReport::to_csv() const {
  std::string out = "B,raw_count,orbit_count,wall_ms\n";
  for (const auto& r : rows) {
    out += std::to_string(r.B) + "," + std::to_string(r.raw_count) + "," + std::to_string(r.orbit_count) +
           "," + std::to_string(r.wall_ms) + "\n";
  }
  return out;
}

Json SparsityReport::to_json() const {
  Json out_rows = Json::array();
  for (const auto& r : rows) {
    out_rows.push_back(
        Json{{"B", r.B}, {"raw_count", r.raw_count}, {"orbit_count", r.orbit_count}, {"wall_ms", r.wall_ms}});
  }
  return Json{{"d", d},
              {"constraint", constraint},
              {"group", group},
              {"rows", std::move(out_rows)},
              {"fitted_slope_raw", rational_to_json(fitted_slope_raw)},
              {"fitted_slope_orbits", rational_to_json(fitted_slope_orbits)}};
}

SparsityReport SparsityReport::from_json(const Json& j) {
  return parsing([&] {
    SparsityReport out;
    out.d = static_cast<int>(small_integer(j, "d"));
    out.constraint = field(j, "constraint").get<std::string>();
    out.group = field(j, "group").get<std::string>();
    for (const auto& r : field(j, "rows")) {
      out.rows.push_back({small_integer(r, "B"), field(r, "raw_count").get<std::uint64_t>(),
                          field(r, "orbit_count").get<std::uint64_t>(), field(r, "wall_ms").get<std::uint64_t>()});
    }
    out.fitted_slope_raw = rational_from_json(field(j, "fitted_slope_raw"));
    out.fitted_slope_orbits = rational_from_json(field(j, "fitted_slope_orbits"));
    return out;
  });
}

std::vector<SparsityRow> SparsityReport::rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "B,raw_count,orbit_count,wall_ms") {
    throw ParseError("sparsity CSV: unexpected header");
  }
  std::vector<SparsityRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 4) throw ParseError("sparsity CSV: expected 4 cells in \"" + line + "\"");
    out.push_back({static_cast<long>(parse_u64(cells[0])), parse_u64(cells[1]), parse_u64(cells[2]),
                   parse_u64(cells[3])});
  }
  return out;
}

SparsityReport run_sparsity(int d, const DiscConstraint& constraint, const std::vector<long>& Bs,
                            const OrbitGroup& group, const SparsityOptions& options) {
  if (Bs.empty()) throw std::invalid_argument("run_sparsity: empty B list");
  for (std::size_t i = 1; i < Bs.size(); ++i) {
    if (Bs[i] <= Bs[i - 1]) throw std::invalid_argument("run_sparsity: B list must be strictly increasing");
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [](Clock::time_point since) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count());
  };

  SparsityReport report;
  report.d = d;
  report.constraint = describe(constraint);
  report.group = group.name();
  for (long B : Bs) {
    if (options.time_budget_ms != 0 && elapsed_ms(start) > options.time_budget_ms) {
      throw ResourceLimitExceeded("sparsity run exceeded its time budget of " +
                                      std::to_string(options.time_budget_ms) + " ms before B = " +
                                      std::to_string(B),
                                  options.time_budget_ms);
    }
    const auto row_start = Clock::now();
    CensusQuery baseline{d, B, DiscNonzero{}, true};
    CensusQuery query{d, B, constraint, true};
    const std::uint64_t raw = count_forms(baseline, options.enumeration.threads);
    const CensusResult census = count_census(query, group, options.enumeration, {0, options.method});
    SparsityRow row{B, raw, census.orbit_count, options.record_timing ? elapsed_ms(row_start) : 0};
    if (!report.rows.empty() && (row.raw_count < report.rows.back().raw_count ||
                                 row.orbit_count < report.rows.back().orbit_count)) {
      throw VerificationFailure("sparsity counts decreased at B = " + std::to_string(B));
    }
    report.rows.push_back(row);
  }
  report.refit();
  return report;
}

DiscConstraint parse_constraint(const std::string& text) {
  return parsing([&]() -> DiscConstraint {
    if (text == "nonzero") return DiscNonzero{};
    if (text.starts_with("disc=")) {
      Integer n = parse_integer(text.substr(5));
      if (n == 0) throw ParseError("constraint disc=0 is not allowed");
      return DiscEquals{n};
    }
    if (text.starts_with("sunit=")) {
      std::vector<Integer> primes;
      const std::string list = text.substr(6);
      if (!list.empty()) {
        for (const auto& p : split(list, ',')) primes.push_back(parse_integer(p));
      }
      return DiscSUnit{PrimeSet(std::move(primes))};
    }
    throw ParseError("unknown constraint \"" + text + "\"; expected nonzero, disc=N or sunit=p1,p2,...");
  });
}

OrbitGroup parse_group(const std::string& text, const PrimeSet& primes) {
  if (text == "sl2z") return OrbitGroup::sl2z();
  if (text == "gl2z") return OrbitGroup::gl2z();
  if (text == "gl2zs") return OrbitGroup::gl2zs(primes);
  throw ParseError("unknown group \"" + text + "\"; expected sl2z, gl2z or gl2zs");
}

}  // namespace detcensus
