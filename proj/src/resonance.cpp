#include "ffg/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ffg {

namespace {

void check_index(std::span<const Complex> lambda, int s, const Exponent& m) {
  if (s < 0 || s >= static_cast<int>(lambda.size())) throw InvalidArgument("component index out of range");
  if (m.size() != static_cast<int>(lambda.size())) {
    throw InvalidArgument("multi-index length differs from the number of eigenvalues");
  }
}

Complex weighted_log(std::span<const Complex> lambda, const Exponent& m) {
  Complex sum{};
  for (int j = 0; j < m.size(); ++j) {
    if (m[j] != 0) sum += static_cast<double>(m[j]) * std::log(lambda[static_cast<std::size_t>(j)]);
  }
  return sum;
}

}  // namespace

bool ResonanceReport::has_obstructive() const {
  return std::any_of(witnesses.begin(), witnesses.end(),
                     [](const ResonanceWitness& w) { return w.obstructive; });
}

Complex monomial_value(std::span<const Complex> lambda, const Exponent& m) {
  Complex value = 1.0;
  for (int j = 0; j < m.size(); ++j) {
    for (int r = 0; r < m[j]; ++r) value *= lambda[static_cast<std::size_t>(j)];
  }
  return value;
}

ResonanceWitness classify_witness(std::span<const Complex> lambda, int s, const Exponent& m,
                                  double tol) {
  check_index(lambda, s, m);
  if (m.degree() < 2) throw InvalidArgument("resonance multi-index must have degree >= 2");
  const Complex delta = std::log(lambda[static_cast<std::size_t>(s)]) - weighted_log(lambda, m);
  const double two_pi = 2.0 * std::numbers::pi;
  const double k = std::round(delta.imag() / two_pi);
  const double residual = std::abs(delta - Complex(0.0, two_pi * k));
  // Rounding in the logarithms scales with |m|; allow that much on top of tol.
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + m.degree()) * (1.0 + std::abs(delta));
  if (residual > tol + slack) {
    throw InvalidArgument("inconsistent resonance witness: residual " + std::to_string(residual) +
                          " exceeds tolerance");
  }
  ResonanceWitness w;
  w.s = s;
  w.m = m;
  w.k = static_cast<long>(k);
  w.obstructive = w.k != 0;
  w.residual = residual;
  return w;
}

ResonanceReport find_resonances(std::span<const Complex> lambda, int max_degree, double tol) {
  if (max_degree < 2) throw InvalidArgument("find_resonances: max_degree must be >= 2");
  if (lambda.empty()) throw InvalidArgument("find_resonances: no eigenvalues");
  for (const Complex l : lambda) {
    if (std::abs(l) <= tol) throw InvalidArgument("find_resonances: zero eigenvalue");
  }
  ResonanceReport report;
  report.eigenvalues.assign(lambda.begin(), lambda.end());
  report.max_degree = max_degree;
  report.tol = tol;
  const int n = static_cast<int>(lambda.size());
  for (int d = 2; d <= max_degree; ++d) {
    for (const Exponent& m : monomials_of_degree(n, d)) {
      const Complex power = monomial_value(lambda, m);
      for (int s = 0; s < n; ++s) {
        const Complex target = lambda[static_cast<std::size_t>(s)];
        if (std::abs(target - power) <= tol * std::abs(target)) {
          report.witnesses.push_back(classify_witness(lambda, s, m, tol));
        }
      }
    }
  }
  return report;
}

bool check_obstructive_by_sampling(std::span<const Complex> lambda, int s, const Exponent& m,
                                   std::span<const double> t_grid, double tol) {
  check_index(lambda, s, m);
  const Complex log_s = std::log(lambda[static_cast<std::size_t>(s)]);
  const Complex log_m = weighted_log(lambda, m);
  return std::any_of(t_grid.begin(), t_grid.end(), [&](double t) {
    const Complex lhs = std::exp(t * log_s);
    const Complex rhs = std::exp(t * log_m);
    return std::abs(lhs - rhs) > tol * std::max(1.0, std::abs(lhs));
  });
}

}  // namespace ffg
