#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <vector>

#include "ffg/errors.hpp"

namespace ffg {

using Complex = std::complex<double>;

/// Largest supported number of variables.
inline constexpr int kMaxVars = 8;
/// Largest supported truncation degree.
inline constexpr int kMaxOrder = 60;
/// Default magnitude below which coefficients count as zero.
inline constexpr double kDefaultZeroTol = 1e-9;

struct Tolerance {
  double zero_tol = kDefaultZeroTol;
};

/// Multi-index (m_1, ..., m_n) of a monomial x_1^m_1 ... x_n^m_n.
class Exponent {
 public:
  Exponent() = default;
  explicit Exponent(int n);
  Exponent(std::initializer_list<int> entries);
  explicit Exponent(std::span<const int> entries);

  /// Unit exponent e_i in dimension n.
  static Exponent unit(int n, int i);

  int size() const { return n_; }
  int degree() const { return degree_; }
  int operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
  void set(int i, int value);
  std::vector<int> to_vector() const;

  Exponent operator+(const Exponent& other) const;

  bool operator==(const Exponent& other) const {
    return n_ == other.n_ && e_ == other.e_;
  }

 private:
  int n_ = 0;
  int degree_ = 0;
  std::array<std::uint8_t, kMaxVars> e_{};
};

/// Graded lexicographic order: lower degree first; within a degree the
/// exponent with the larger leading entry comes first (x1^2, x1 x2, x2^2).
struct GradedLex {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

/// All exponents of the given exact degree in graded-lex order.
std::vector<Exponent> monomials_of_degree(int n, int degree);
/// All exponents with degree in [lo, hi], graded-lex order.
std::vector<Exponent> monomial_basis(int n, int lo, int hi);

/// Truncated formal power series in n variables with complex coefficients.
///
/// Every stored exponent has degree <= order. Coefficients whose magnitude
/// falls below zero_tol * (1 + max_norm) are dropped after each operation.
class Series {
 public:
  using Terms = std::map<Exponent, Complex, GradedLex>;

  Series() = default;
  Series(int n, int order);

  static Series constant(int n, int order, Complex c);
  /// The coordinate function x_i (0-based).
  static Series variable(int n, int order, int i);
  static Series monomial(int n, int order, const Exponent& e, Complex c = 1.0);

  int dim() const { return n_; }
  int order() const { return order_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Complex coeff(const Exponent& e) const;
  /// Overwrites a coefficient; exponents beyond order are ignored.
  void set_coeff(const Exponent& e, Complex c);
  void add_to_coeff(const Exponent& e, Complex c);

  /// Homogeneous part of the given degree.
  Series homogeneous(int degree) const;
  /// Terms of degree <= d (the order cap is kept).
  Series truncated(int degree) const;
  /// Same terms carried at a smaller order cap; throws if new_order > order.
  Series with_order(int new_order) const;
  /// Lowest degree present, or -1 for the zero series.
  int lowest_degree() const;

  Series& normalize(const Tolerance& tol = {});

  Series operator-() const;
  Series& operator+=(const Series& other);
  Series& operator-=(const Series& other);
  Series& operator*=(Complex c);

  friend bool operator==(const Series& a, const Series& b) {
    return a.n_ == b.n_ && a.order_ == b.order_ && a.terms_ == b.terms_;
  }

 private:
  int n_ = 0;
  int order_ = 0;
  Terms terms_;
};

Series add(const Series& a, const Series& b);
Series sub(const Series& a, const Series& b);
Series mul(const Series& a, const Series& b);
/// Product normalized with the given tolerance (zero_tol = 0 keeps every term).
Series mul(const Series& a, const Series& b, const Tolerance& tol);
Series scale(const Series& a, Complex c);
/// Truncated power a^k for k >= 0.
Series pow(const Series& a, int k);
/// p(u_1, ..., u_n), truncated to the common order.
Series substitute(const Series& p, std::span<const Series> u, const Tolerance& tol = {});
/// Partial derivative with respect to variable i (0-based).
Series derivative(const Series& p, int i);
double max_norm(const Series& a);

inline Series operator+(const Series& a, const Series& b) { return add(a, b); }
inline Series operator-(const Series& a, const Series& b) { return sub(a, b); }
inline Series operator*(const Series& a, const Series& b) { return mul(a, b); }
inline Series operator*(Complex c, const Series& a) { return scale(a, c); }

}  // namespace ffg
