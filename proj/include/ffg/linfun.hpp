#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ffg/series.hpp"

namespace ffg {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Eigen-decomposition U V = V diag(values) of a diagonalizable matrix.
struct Eigensystem {
  std::vector<Complex> values;
  Matrix vectors;
  /// 2-norm condition number of the column-normalized eigenvector matrix.
  double condition = 1.0;
};

/// Root branch per eigenvalue, each entry in [0, k-1].
using BranchChoice = std::vector<int>;

/// Eigenvector matrices whose condition exceeds this are rejected as defective.
inline constexpr double kDefectiveCondition = 1e8;

/// Eigenvalues and eigenvectors. Eigenpairs are ordered so that eigenvector j
/// has its dominant entry at coordinate j whenever that assignment is possible,
/// which makes diagonal and triangular inputs report values along the diagonal.
Eigensystem eigen(const Matrix& u);

/// Eigenvalues only; never throws for defective matrices. Triangular inputs
/// report their diagonal.
std::vector<Complex> eigenvalues(const Matrix& u);

bool is_lower_triangular(const Matrix& u, double tol = 0.0);
bool is_upper_triangular(const Matrix& u, double tol = 0.0);
bool is_real(const Matrix& u, double tol = 0.0);

/// Principal matrix logarithm.
Matrix mat_log(const Matrix& u, const Tolerance& tol = {});
/// k-th root with the selected branch per eigenvalue.
Matrix mat_root(const Matrix& u, int k, const BranchChoice& branch, const Tolerance& tol = {});
/// Principal real power exp(t log U).
Matrix mat_power(const Matrix& u, double t, const Tolerance& tol = {});
/// Matrix exponential by scaling and squaring with a Pade kernel.
Matrix mat_exp(const Matrix& b);

/// Integer matrix power by repeated squaring (k >= 0).
Matrix mat_int_power(const Matrix& u, int k);

/// For a real matrix, the eigenbasis used by root enumeration: a real
/// negative eigenvalue of geometric multiplicity >= 2 has its real
/// eigenvectors paired into conjugates v -/+ i w, so that mixed branches of
/// such pairs give real roots (rotations by +/- pi/2 for -I).
Eigensystem root_eigenbasis(const Matrix& u);

/// Normwise max |entry| (used for relative tolerances).
double max_abs(const Matrix& u);

}  // namespace ffg
