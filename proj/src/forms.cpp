#include "detcensus/forms.hpp"

#include "detcensus/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace detcensus {

int total_degree(const MultiIndex& index) {
  return std::accumulate(index.begin(), index.end(), 0);
}

bool GrevlexFirst::operator()(const MultiIndex& a, const MultiIndex& b) const {
  const int da = total_degree(a);
  const int db = total_degree(b);
  if (da != db) return da > db;
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

namespace {

void append_monomials(int n, int d, MultiIndex& suffix, std::vector<MultiIndex>& out) {
  if (n == 1) {
    MultiIndex index{d};
    index.insert(index.end(), suffix.rbegin(), suffix.rend());
    out.push_back(std::move(index));
    return;
  }
  // A smaller exponent on the last variable ranks higher under grevlex.
  for (int last = 0; last <= d; ++last) {
    suffix.push_back(last);
    append_monomials(n - 1, d - last, suffix, out);
    suffix.pop_back();
  }
}

std::string matrix_text(int n, const std::vector<Integer>& entries) {
  std::string out = "[";
  for (int i = 0; i < n; ++i) {
    out += i ? ",[" : "[";
    for (int j = 0; j < n; ++j) {
      if (j) out += ",";
      out += entries[static_cast<std::size_t>(i * n + j)].get_str();
    }
    out += "]";
  }
  return out + "]";
}


}  // namespace

std::vector<MultiIndex> monomials_of_degree(int n, int d) {
  if (n < 1 || d < 0) throw std::invalid_argument("monomials_of_degree: need n >= 1, d >= 0");
  std::vector<MultiIndex> out;
  MultiIndex suffix;
  append_monomials(n, d, suffix, out);
  return out;
}

HomogeneousForm::HomogeneousForm(int n, int d) : n_(n), d_(d) {
  if (n < 1 || d < 0) throw std::invalid_argument("HomogeneousForm: need n >= 1, d >= 0");
}

HomogeneousForm HomogeneousForm::from_dense(int n, int d, std::span<const Integer> coeffs) {
  HomogeneousForm f(n, d);
  const auto monomials = monomials_of_degree(n, d);
  if (coeffs.size() != monomials.size()) {
    throw std::invalid_argument("from_dense: expected " + std::to_string(monomials.size()) +
                                " coefficients");
  }
  for (std::size_t i = 0; i < monomials.size(); ++i) f.set(monomials[i], coeffs[i]);
  return f;
}

HomogeneousForm HomogeneousForm::from_dense(int n, int d, std::span<const long> coeffs) {
  std::vector<Integer> big(coeffs.begin(), coeffs.end());
  return from_dense(n, d, big);
}

HomogeneousForm HomogeneousForm::binary(std::span<const long> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("binary form needs at least one coefficient");
  return from_dense(2, static_cast<int>(coeffs.size()) - 1, coeffs);
}

HomogeneousForm HomogeneousForm::binary(std::initializer_list<long> coeffs) {
  return binary(std::span<const long>(coeffs.begin(), coeffs.size()));
}

void HomogeneousForm::check_index(const MultiIndex& index) const {
  if (static_cast<int>(index.size()) != n_ || total_degree(index) != d_ ||
      std::any_of(index.begin(), index.end(), [](int e) { return e < 0; })) {
    throw std::invalid_argument("multi-index does not match form shape");
  }
}

Integer HomogeneousForm::coeff(const MultiIndex& index) const {
  auto it = terms_.find(index);
  return it == terms_.end() ? Integer(0) : it->second;
}

void HomogeneousForm::set(const MultiIndex& index, Integer value) {
  check_index(index);
  if (value == 0) {
    terms_.erase(index);
  } else {
    terms_[index] = std::move(value);
  }
}

void HomogeneousForm::add(const MultiIndex& index, const Integer& value) {
  if (value == 0) return;
  check_index(index);
  auto [it, inserted] = terms_.try_emplace(index, value);
  if (!inserted) {
    it->second += value;
    if (it->second == 0) terms_.erase(it);
  }
}

std::vector<Integer> HomogeneousForm::dense() const {
  const auto monomials = monomials_of_degree(n_, d_);
  std::vector<Integer> out;
  out.reserve(monomials.size());
  for (const auto& m : monomials) out.push_back(coeff(m));
  return out;
}

Integer HomogeneousForm::height() const {
  Integer h = 0;
  for (const auto& [index, c] : terms_) h = std::max(h, abs_value(c));
  return h;
}

Integer HomogeneousForm::content() const {
  Integer g = 0;
  for (const auto& [index, c] : terms_) g = gcd(g, c);
  return g;
}

const MultiIndex& HomogeneousForm::leading_monomial() const {
  if (terms_.empty()) throw std::domain_error("leading monomial of the zero form");
  return terms_.begin()->first;
}

HomogeneousForm HomogeneousForm::scaled(const Integer& factor) const {
  HomogeneousForm out(n_, d_);
  if (factor == 0) return out;
  for (const auto& [index, c] : terms_) out.terms_.emplace_hint(out.terms_.end(), index, c * factor);
  return out;
}

HomogeneousForm HomogeneousForm::divided(const Integer& divisor) const {
  if (divisor == 0) throw std::domain_error("division of a form by zero");
  HomogeneousForm out(n_, d_);
  for (const auto& [index, c] : terms_) {
    if (!mpz_divisible_p(c.get_mpz_t(), divisor.get_mpz_t())) {
      throw std::domain_error("form coefficients not divisible by " + divisor.get_str());
    }
    Integer q;
    mpz_divexact(q.get_mpz_t(), c.get_mpz_t(), divisor.get_mpz_t());
    out.terms_.emplace_hint(out.terms_.end(), index, std::move(q));
  }
  return out;
}

HomogeneousForm HomogeneousForm::derivative(int i) const {
  if (i < 0 || i >= n_) throw std::invalid_argument("derivative: variable out of range");
  if (d_ == 0) return HomogeneousForm(n_, 0);
  HomogeneousForm out(n_, d_ - 1);
  for (const auto& [index, c] : terms_) {
    if (index[static_cast<std::size_t>(i)] == 0) continue;
    MultiIndex lowered = index;
    lowered[static_cast<std::size_t>(i)] -= 1;
    out.add(lowered, c * index[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::string HomogeneousForm::to_string() const {
  if (terms_.empty()) return "0";
  static const char* names3[] = {"x", "y", "z"};
  std::ostringstream out;
  bool first = true;
  for (const auto& [index, c] : terms_) {
    const bool negative = c < 0;
    const Integer magnitude = abs_value(c);
    if (first) {
      if (negative) out << "-";
    } else {
      out << (negative ? " - " : " + ");
    }
    first = false;
    const bool constant = total_degree(index) == 0;
    if (magnitude != 1 || constant) out << magnitude.get_str();
    bool need_star = magnitude != 1 || constant;
    for (int v = 0; v < n_; ++v) {
      const int e = index[static_cast<std::size_t>(v)];
      if (e == 0) continue;
      if (need_star) out << "*";
      need_star = true;
      if (n_ <= 3) {
        out << names3[v];
      } else {
        out << "x" << v;
      }
      if (e > 1) out << "^" << e;
    }
  }
  return out.str();
}

HomogeneousForm multiply(const HomogeneousForm& a, const HomogeneousForm& b) {
  if (a.vars() != b.vars()) throw std::invalid_argument("multiply: variable count mismatch");
  HomogeneousForm out(a.vars(), a.degree() + b.degree());
  MultiIndex index(static_cast<std::size_t>(a.vars()));
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      for (std::size_t v = 0; v < index.size(); ++v) index[v] = ia[v] + ib[v];
      out.add(index, ca * cb);
    }
  }
  return out;
}

Integer evaluate(const HomogeneousForm& f, std::span<const Integer> x) {
  if (static_cast<int>(x.size()) != f.vars()) {
    throw std::invalid_argument("evaluate: point has " + std::to_string(x.size()) +
                                " coordinates, form has " + std::to_string(f.vars()) + " variables");
  }
  // Power tables keep the cost at one multiplication per exponent unit.
  std::vector<std::vector<Integer>> powers(x.size());
  for (std::size_t v = 0; v < x.size(); ++v) {
    powers[v].reserve(static_cast<std::size_t>(f.degree()) + 1);
    powers[v].push_back(1);
    for (int e = 1; e <= f.degree(); ++e) powers[v].push_back(powers[v].back() * x[v]);
  }
  Integer sum = 0;
  Integer term;
  for (const auto& [index, c] : f.terms()) {
    term = c;
    for (std::size_t v = 0; v < x.size(); ++v) {
      if (index[v] != 0) term *= powers[v][static_cast<std::size_t>(index[v])];
    }
    sum += term;
  }
  return sum;
}

ProjectivePoint ProjectivePoint::normalize(std::span<const Integer> coords) {
  Integer g = 0;
  for (const auto& c : coords) g = gcd(g, c);
  if (g == 0) throw std::invalid_argument("normalize: all coordinates are zero");
  std::vector<Integer> out(coords.begin(), coords.end());
  auto first = std::find_if(out.begin(), out.end(), [](const Integer& c) { return c != 0; });
  if (*first < 0) g = -g;
  for (auto& c : out) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
  return ProjectivePoint(std::move(out));
}

ProjectivePoint ProjectivePoint::normalize(std::initializer_list<long> coords) {
  std::vector<Integer> big(coords.begin(), coords.end());
  return normalize(big);
}

Integer ProjectivePoint::height() const {
  Integer h = 0;
  for (const auto& c : coords_) h = std::max(h, abs_value(c));
  return h;
}

std::string ProjectivePoint::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (i) out += ":";
    out += coords_[i].get_str();
  }
  return out + "]";
}

UnimodularMatrix::UnimodularMatrix(int n, std::vector<Integer> entries)
    : n_(n), entries_(std::move(entries)), det_(0) {
  if (n < 1 || entries_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("UnimodularMatrix: expected n*n entries");
  }
  IntMatrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < entries_.size(); ++i) m.data[i] = entries_[i];
  const Integer det = determinant(m);
  if (det != 1 && det != -1) {
    throw std::invalid_argument("UnimodularMatrix: determinant is " + det.get_str());
  }
  det_ = det == 1 ? 1 : -1;
}

UnimodularMatrix UnimodularMatrix::from_rows(
    std::initializer_list<std::initializer_list<long>> rows) {
  const int n = static_cast<int>(rows.size());
  std::vector<Integer> entries;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("from_rows: ragged matrix");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return UnimodularMatrix(n, std::move(entries));
}

UnimodularMatrix UnimodularMatrix::identity(int n) {
  std::vector<Integer> entries(static_cast<std::size_t>(n * n), 0);
  for (int i = 0; i < n; ++i) entries[static_cast<std::size_t>(i * n + i)] = 1;
  return UnimodularMatrix(n, std::move(entries), 1);
}

UnimodularMatrix operator*(const UnimodularMatrix& a, const UnimodularMatrix& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("matrix product: size mismatch");
  const int n = a.n_;
  std::vector<Integer> out(static_cast<std::size_t>(n * n), 0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const Integer& aik = a.at(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i * n + j)] += aik * b.at(k, j);
    }
  }
  return UnimodularMatrix(n, std::move(out), a.det_ * b.det_);
}

UnimodularMatrix UnimodularMatrix::inverse() const {
  if (n_ == 2) {
    std::vector<Integer> out = {at(1, 1), -at(0, 1), -at(1, 0), at(0, 0)};
    if (det_ == -1) {
      for (auto& x : out) x = -x;
    }
    return UnimodularMatrix(2, std::move(out), det_);
  }
  IntMatrix m(static_cast<std::size_t>(n_), static_cast<std::size_t>(n_));
  for (std::size_t i = 0; i < entries_.size(); ++i) m.data[i] = entries_[i];
  const auto inv = inverse_rational(m);
  std::vector<Integer> out;
  out.reserve(inv.size());
  for (const auto& q : inv) {
    if (q.get_den() != 1) throw std::logic_error("unimodular inverse is not integral");
    out.push_back(q.get_num());
  }
  return UnimodularMatrix(n_, std::move(out), det_);
}

Integer UnimodularMatrix::max_entry() const {
  Integer h = 0;
  for (const auto& x : entries_) h = std::max(h, abs_value(x));
  return h;
}

std::string UnimodularMatrix::to_string() const { return matrix_text(n_, entries_); }


IntegralMatrix::IntegralMatrix(int n, std::vector<Integer> entries) : n_(n), entries_(std::move(entries)) {
  if (n < 1 || entries_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("IntegralMatrix: expected n*n entries");
  }
  IntMatrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < entries_.size(); ++i) m.data[i] = entries_[i];
  det_ = determinant(m);
  if (det_ == 0) throw std::invalid_argument("IntegralMatrix: singular matrix");
}

IntegralMatrix::IntegralMatrix(const UnimodularMatrix& g)
    : n_(g.size()), entries_(g.entries()), det_(g.det()) {}

std::optional<UnimodularMatrix> IntegralMatrix::unimodular() const {
  if (det_ != 1 && det_ != -1) return std::nullopt;
  return UnimodularMatrix(n_, entries_);
}

std::string IntegralMatrix::to_string() const { return matrix_text(n_, entries_); }

HomogeneousForm act(const UnimodularMatrix& g, const HomogeneousForm& f) {
  if (g.size() != f.vars()) throw std::invalid_argument("act: matrix size does not match form");
  return substitute(g.entries(), f);
}

HomogeneousForm act(const IntegralMatrix& g, const HomogeneousForm& f) {
  if (g.size() != f.vars()) throw std::invalid_argument("act: matrix size does not match form");
  return substitute(g.entries(), f);
}

HomogeneousForm substitute(std::span<const Integer> m, const HomogeneousForm& f) {
  const int n = f.vars();
  if (m.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("substitute: matrix size does not match form");
  }
  const int d = f.degree();
  // powers[i][e] = (sum_j g_ij x_j)^e
  std::vector<std::vector<HomogeneousForm>> powers(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    HomogeneousForm linear(n, 1);
    for (int j = 0; j < n; ++j) {
      MultiIndex unit(static_cast<std::size_t>(n), 0);
      unit[static_cast<std::size_t>(j)] = 1;
      linear.set(unit, m[static_cast<std::size_t>(i * n + j)]);
    }
    auto& row = powers[static_cast<std::size_t>(i)];
    HomogeneousForm one(n, 0);
    one.set(MultiIndex(static_cast<std::size_t>(n), 0), 1);
    row.push_back(one);
    for (int e = 1; e <= d; ++e) row.push_back(multiply(row.back(), linear));
  }
  HomogeneousForm out(n, d);
  for (const auto& [index, c] : f.terms()) {
    HomogeneousForm term(n, 0);
    term.set(MultiIndex(static_cast<std::size_t>(n), 0), c);
    for (int i = 0; i < n; ++i) {
      const int e = index[static_cast<std::size_t>(i)];
      if (e != 0) term = multiply(term, powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(e)]);
    }
    for (const auto& [m, v] : term.terms()) out.add(m, v);
  }
  return out;
}

PrimeSet::PrimeSet(std::vector<Integer> primes) : primes_(std::move(primes)) {
  std::sort(primes_.begin(), primes_.end());
  primes_.erase(std::unique(primes_.begin(), primes_.end()), primes_.end());
  for (const auto& p : primes_) {
    if (!is_prime(p)) throw std::invalid_argument("PrimeSet: " + p.get_str() + " is not prime");
  }
}

PrimeSet::PrimeSet(std::initializer_list<long> primes)
    : PrimeSet(std::vector<Integer>(primes.begin(), primes.end())) {}

bool PrimeSet::contains(const Integer& p) const {
  return std::binary_search(primes_.begin(), primes_.end(), p);
}

std::string PrimeSet::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    if (i) out += ",";
    out += primes_[i].get_str();
  }
  return out + "}";
}

}  // namespace detcensus
