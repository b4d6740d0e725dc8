#include "ffg/series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ffg {

namespace {

void require_same_shape(const Series& a, const Series& b, const char* op) {
  if (a.dim() != b.dim() || a.order() != b.order()) {
    throw ShapeMismatch(std::string(op) + ": operands differ in dimension or order (" +
                        std::to_string(a.dim()) + "/" + std::to_string(a.order()) + " vs " +
                        std::to_string(b.dim()) + "/" + std::to_string(b.order()) + ")");
  }
}

void check_shape(int n, int order) {
  if (n < 1 || n > kMaxVars) {
    throw InvalidArgument("series dimension must be in [1, " + std::to_string(kMaxVars) + "]");
  }
  if (order < 1 || order > kMaxOrder) {
    throw InvalidArgument("truncation order must be in [1, " + std::to_string(kMaxOrder) + "]");
  }
}

void enumerate_degree(int n, int var, int remaining, Exponent& current,
                      std::vector<Exponent>& out) {
  if (var == n - 1) {
    current.set(var, remaining);
    out.push_back(current);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    current.set(var, k);
    enumerate_degree(n, var + 1, remaining - k, current, out);
  }
  current.set(var, 0);
}

// Truncated product without zero normalization.
Series::Terms raw_product(const Series::Terms& a, const Series::Terms& b, int cap) {
  Series::Terms acc;
  for (const auto& [ea, ca] : a) {
    if (ea.degree() > cap) break;
    for (const auto& [eb, cb] : b) {
      if (ea.degree() + eb.degree() > cap) break;
      acc[ea + eb] += ca * cb;
    }
  }
  return acc;
}

}  // namespace

Exponent::Exponent(int n) : n_(n) {
  if (n < 0 || n > kMaxVars) throw InvalidArgument("exponent length out of range");
}

Exponent::Exponent(std::initializer_list<int> entries)
    : Exponent(std::span<const int>(entries.begin(), entries.size())) {}

Exponent::Exponent(std::span<const int> entries) : Exponent(static_cast<int>(entries.size())) {
  for (int i = 0; i < n_; ++i) set(i, entries[static_cast<std::size_t>(i)]);
}

Exponent Exponent::unit(int n, int i) {
  Exponent e(n);
  e.set(i, 1);
  return e;
}

void Exponent::set(int i, int value) {
  if (i < 0 || i >= n_) throw InvalidArgument("exponent index out of range");
  if (value < 0 || value > 255) throw InvalidArgument("exponent entry out of range");
  auto& slot = e_[static_cast<std::size_t>(i)];
  degree_ += value - slot;
  slot = static_cast<std::uint8_t>(value);
}

std::vector<int> Exponent::to_vector() const {
  std::vector<int> v(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) v[static_cast<std::size_t>(i)] = (*this)[i];
  return v;
}

Exponent Exponent::operator+(const Exponent& other) const {
  if (n_ != other.n_) throw ShapeMismatch("exponent lengths differ");
  Exponent r(n_);
  for (int i = 0; i < n_; ++i) r.set(i, (*this)[i] + other[i]);
  return r;
}

bool GradedLex::operator()(const Exponent& a, const Exponent& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const int n = std::min(a.size(), b.size());
  for (int i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return a.size() < b.size();
}

std::vector<Exponent> monomials_of_degree(int n, int degree) {
  std::vector<Exponent> out;
  if (n < 1 || degree < 0) return out;
  Exponent current(n);
  enumerate_degree(n, 0, degree, current, out);
  return out;
}

std::vector<Exponent> monomial_basis(int n, int lo, int hi) {
  std::vector<Exponent> out;
  for (int d = lo; d <= hi; ++d) {
    auto block = monomials_of_degree(n, d);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

Series::Series(int n, int order) : n_(n), order_(order) { check_shape(n, order); }

Series Series::constant(int n, int order, Complex c) {
  Series s(n, order);
  s.set_coeff(Exponent(n), c);
  return s;
}

Series Series::variable(int n, int order, int i) {
  if (i < 0 || i >= n) throw InvalidArgument("variable index out of range");
  Series s(n, order);
  s.set_coeff(Exponent::unit(n, i), 1.0);
  return s;
}

Series Series::monomial(int n, int order, const Exponent& e, Complex c) {
  Series s(n, order);
  s.set_coeff(e, c);
  return s;
}

Complex Series::coeff(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Complex{} : it->second;
}

void Series::set_coeff(const Exponent& e, Complex c) {
  if (e.size() != n_) throw ShapeMismatch("exponent length does not match series dimension");
  if (e.degree() > order_) return;
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
    throw InvalidArgument("non-finite coefficient");
  }
  if (c == Complex{}) {
    terms_.erase(e);
  } else {
    terms_[e] = c;
  }
}

void Series::add_to_coeff(const Exponent& e, Complex c) {
  if (e.degree() > order_) return;
  set_coeff(e, coeff(e) + c);
}

Series Series::homogeneous(int degree) const {
  Series r(n_, order_);
  for (const auto& [e, c] : terms_) {
    if (e.degree() == degree) r.terms_.emplace_hint(r.terms_.end(), e, c);
  }
  return r;
}

Series Series::truncated(int degree) const {
  Series r(n_, order_);
  for (const auto& [e, c] : terms_) {
    if (e.degree() > degree) break;
    r.terms_.emplace_hint(r.terms_.end(), e, c);
  }
  return r;
}

Series Series::with_order(int new_order) const {
  if (new_order > order_) {
    throw InvalidArgument("cannot raise truncation order from " + std::to_string(order_) + " to " +
                          std::to_string(new_order) + ": higher coefficients are unknown");
  }
  Series r(n_, new_order);
  for (const auto& [e, c] : terms_) {
    if (e.degree() > new_order) break;
    r.terms_.emplace_hint(r.terms_.end(), e, c);
  }
  return r;
}

int Series::lowest_degree() const {
  return terms_.empty() ? -1 : terms_.begin()->first.degree();
}

Series& Series::normalize(const Tolerance& tol) {
  double norm = 0.0;
  for (const auto& [e, c] : terms_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw InvalidArgument("non-finite coefficient");
    }
    norm = std::max(norm, std::abs(c));
  }
  const double threshold = tol.zero_tol * (1.0 + norm);
  std::erase_if(terms_, [&](const auto& kv) { return std::abs(kv.second) < threshold; });
  return *this;
}

Series Series::operator-() const {
  Series r = *this;
  for (auto& [e, c] : r.terms_) c = -c;
  return r;
}

Series& Series::operator+=(const Series& other) {
  require_same_shape(*this, other, "add");
  for (const auto& [e, c] : other.terms_) terms_[e] += c;
  return normalize();
}

Series& Series::operator-=(const Series& other) {
  require_same_shape(*this, other, "sub");
  for (const auto& [e, c] : other.terms_) terms_[e] -= c;
  return normalize();
}

Series& Series::operator*=(Complex c) {
  for (auto& [e, v] : terms_) v *= c;
  return normalize();
}

Series add(const Series& a, const Series& b) {
  Series r = a;
  r += b;
  return r;
}

Series sub(const Series& a, const Series& b) {
  Series r = a;
  r -= b;
  return r;
}

Series scale(const Series& a, Complex c) {
  Series r = a;
  r *= c;
  return r;
}

Series mul(const Series& a, const Series& b) { return mul(a, b, Tolerance{}); }

Series mul(const Series& a, const Series& b, const Tolerance& tol) {
  require_same_shape(a, b, "mul");
  Series r(a.dim(), a.order());
  for (const auto& [e, c] : raw_product(a.terms(), b.terms(), a.order())) r.set_coeff(e, c);
  return r.normalize(tol);
}

Series pow(const Series& a, int k) {
  if (k < 0) throw InvalidArgument("negative power of a series");
  Series result = Series::constant(a.dim(), a.order(), 1.0);
  Series base = a;
  while (k > 0) {
    if (k & 1) result = mul(result, base);
    k >>= 1;
    if (k > 0) {
      // Powers of a series without constant term vanish once past the order.
      if (base.lowest_degree() > 0 && base.lowest_degree() * 2 > base.order()) {
        base = Series(a.dim(), a.order());
      } else {
        base = mul(base, base);
      }
    }
  }
  return result;
}

Series substitute(const Series& p, std::span<const Series> u, const Tolerance& tol) {
  const int n = p.dim();
  if (static_cast<int>(u.size()) != n) {
    throw ShapeMismatch("substitute: expected " + std::to_string(n) + " series, got " +
                        std::to_string(u.size()));
  }
  const int order = p.order();
  for (const auto& ui : u) {
    if (ui.order() != order) throw ShapeMismatch("substitute: truncation orders differ");
    const double constant = std::abs(ui.coeff(Exponent(ui.dim())));
    if (constant > 0.0 && constant >= tol.zero_tol) {
      throw InvalidArgument("substitute: substituted series has a nonzero constant term");
    }
  }
  const int m = u.empty() ? 0 : u.front().dim();
  for (const auto& ui : u) {
    if (ui.dim() != m) throw ShapeMismatch("substitute: substituted series differ in dimension");
  }

  // powers[i][k] = u_i^k, filled on demand up to the largest exponent used.
  // Intermediate products are not normalized; only the result is.
  std::vector<int> max_exp(static_cast<std::size_t>(n), 0);
  for (const auto& [e, c] : p.terms()) {
    for (int i = 0; i < n; ++i) max_exp[static_cast<std::size_t>(i)] = std::max(max_exp[static_cast<std::size_t>(i)], e[i]);
  }
  Series::Terms one;
  one[Exponent(m)] = 1.0;
  std::vector<std::vector<Series::Terms>> powers(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& row = powers[static_cast<std::size_t>(i)];
    row.push_back(one);
    const int top = std::min(max_exp[static_cast<std::size_t>(i)], order);
    for (int k = 1; k <= top; ++k) row.push_back(raw_product(row.back(), u[static_cast<std::size_t>(i)].terms(), order));
  }

  std::map<Exponent, Complex, GradedLex> acc;
  for (const auto& [e, c] : p.terms()) {
    // Each u_i has no constant term, so a monomial of degree > order vanishes.
    if (e.degree() > order) break;
    Series::Terms term;
    term[Exponent(m)] = c;
    for (int i = 0; i < n; ++i) {
      if (e[i] > 0) term = raw_product(term, powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(e[i])], order);
    }
    for (const auto& [et, ct] : term) acc[et] += ct;
  }
  Series result(m, order);
  for (const auto& [e, c] : acc) {
    if (c != Complex{}) result.set_coeff(e, c);
  }
  return result.normalize(tol);
}

Series derivative(const Series& p, int i) {
  if (i < 0 || i >= p.dim()) throw InvalidArgument("derivative: variable index out of range");
  Series r(p.dim(), p.order());
  for (const auto& [e, c] : p.terms()) {
    const int k = e[i];
    if (k == 0) continue;
    Exponent d = e;
    d.set(i, k - 1);
    r.set_coeff(d, c * static_cast<double>(k));
  }
  return r;
}

double max_norm(const Series& a) {
  double norm = 0.0;
  for (const auto& [e, c] : a.terms()) norm = std::max(norm, std::abs(c));
  return norm;
}

}  // namespace ffg
