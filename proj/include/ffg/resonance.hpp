#pragma once

#include <span>
#include <vector>

#include "ffg/series.hpp"

namespace ffg {

/// One relation lambda_s = lambda^m with |m| >= 2, classified by the integer k
/// in log(lambda_s) - <m, log lambda> = 2 pi i k (principal logarithms).
/// The relation is obstructive exactly when k != 0.
struct ResonanceWitness {
  int s = 0;  // 0-based component index
  Exponent m;
  long k = 0;
  bool obstructive = false;
  double residual = 0.0;

  friend bool operator==(const ResonanceWitness&, const ResonanceWitness&) = default;
};

struct ResonanceReport {
  std::vector<Complex> eigenvalues;
  int max_degree = 0;
  double tol = 0.0;
  std::vector<ResonanceWitness> witnesses;

  bool has_obstructive() const;
};

/// Scans every (s, m) with 2 <= |m| <= max_degree and records the relations
/// |lambda_s - lambda^m| <= tol |lambda_s|. Witnesses are sorted graded-lex on
/// m, then by s.
ResonanceReport find_resonances(std::span<const Complex> lambda, int max_degree,
                                double tol = kDefaultZeroTol);

/// Classifies a resonant pair. Throws InvalidArgument when the relation does
/// not hold within tol.
ResonanceWitness classify_witness(std::span<const Complex> lambda, int s, const Exponent& m,
                                  double tol = kDefaultZeroTol);

/// Independent check of obstructiveness: compares the principal powers
/// lambda_s^t and exp(t <m, Log lambda>) on a grid of t. Returns true when
/// some sample differs by more than tol (relative to |lambda_s^t|).
bool check_obstructive_by_sampling(std::span<const Complex> lambda, int s, const Exponent& m,
                                   std::span<const double> t_grid, double tol = kDefaultZeroTol);

/// lambda_1^m_1 ... lambda_n^m_n.
Complex monomial_value(std::span<const Complex> lambda, const Exponent& m);

}  // namespace ffg
