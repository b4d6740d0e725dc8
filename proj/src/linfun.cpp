#include "ffg/linfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace ffg {

namespace {

void require_square(const Matrix& u, const char* op) {
  if (u.rows() != u.cols() || u.rows() == 0) {
    throw InvalidArgument(std::string(op) + ": matrix must be square and nonempty");
  }
}

double one_norm(const Matrix& a) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) best = std::max(best, a.col(j).cwiseAbs().sum());
  return best;
}

double condition_number(const Matrix& v) {
  Matrix normalized = v;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double nrm = v.col(j).norm();
    if (nrm == 0.0) return std::numeric_limits<double>::infinity();
    normalized.col(j) /= nrm;
  }
  Eigen::JacobiSVD<Matrix> svd(normalized);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  if (smallest == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smallest;
}

void check_invertible(const Matrix& u, const Tolerance& tol, const char* op) {
  if (std::abs(u.determinant()) <= tol.zero_tol) {
    throw NotInvertible(std::string(op) + ": matrix is singular (|det| <= zero_tol)");
  }
}

bool on_branch_cut(Complex lambda, double scale) {
  return lambda.real() <= 0.0 && std::abs(lambda.imag()) <= 1e-12 * std::max(1.0, scale);
}

// Principal square root of a lower triangular matrix, computed by diagonals.
Matrix lower_triangular_sqrt(const Matrix& t) {
  const Eigen::Index n = t.rows();
  Matrix r = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) r(i, i) = std::sqrt(t(i, i));
  for (Eigen::Index gap = 1; gap < n; ++gap) {
    for (Eigen::Index j = 0; j + gap < n; ++j) {
      const Eigen::Index i = j + gap;
      Complex acc = t(i, j);
      for (Eigen::Index k = j + 1; k < i; ++k) acc -= r(i, k) * r(k, j);
      r(i, j) = acc / (r(i, i) + r(j, j));
    }
  }
  return r;
}

// Inverse scaling and squaring on a lower triangular matrix. Handles repeated
// diagonal entries, so defective elements of B_l are covered.
Matrix lower_triangular_log(const Matrix& u) {
  const Eigen::Index n = u.rows();
  const Matrix id = Matrix::Identity(n, n);
  Matrix t = u;
  int halvings = 0;
  while (one_norm(t - id) > 0.25) {
    if (++halvings > 100) throw InvalidArgument("mat_log: square-root iteration did not converge");
    t = lower_triangular_sqrt(t);
  }
  const Matrix x = t - id;
  Matrix power = x;
  Matrix result = x;
  for (int k = 2; k < 200; ++k) {
    power = (power * x).eval();
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;
    Matrix term = power * (sign / k);
    result += term;
    if (one_norm(term) <= 1e-18 * std::max(1.0, one_norm(result))) break;
  }
  // The recurrence keeps strictly upper entries exactly zero.
  return result * std::ldexp(1.0, halvings);
}

Matrix snap_real(const Matrix& a) {
  Matrix r = a;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) r(i, j) = Complex(r(i, j).real(), 0.0);
  }
  return r;
}

// Orders eigenpairs so that vector j peaks at coordinate j where possible and
// normalizes each vector to unit length with a real positive dominant entry.
void canonicalize(std::vector<Complex>& values, Matrix& vectors) {
  const Eigen::Index n = vectors.cols();
  for (Eigen::Index j = 0; j < n; ++j) {
    auto col = vectors.col(j);
    const double nrm = col.norm();
    if (nrm > 0.0) col /= nrm;
    Eigen::Index peak = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(col(i)) > std::abs(col(peak)) + 1e-12) peak = i;
    }
    if (std::abs(col(peak)) > 0.0) col *= std::conj(col(peak)) / std::abs(col(peak));
  }

  std::vector<Eigen::Index> slot_of_column(static_cast<std::size_t>(n), -1);
  std::vector<bool> row_used(static_cast<std::size_t>(n), false);
  for (Eigen::Index round = 0; round < n; ++round) {
    double best = -1.0;
    Eigen::Index best_row = -1;
    Eigen::Index best_col = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (slot_of_column[static_cast<std::size_t>(j)] >= 0) continue;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (row_used[static_cast<std::size_t>(i)]) continue;
        const double mag = std::abs(vectors(i, j));
        if (mag > best + 1e-12) {
          best = mag;
          best_row = i;
          best_col = j;
        }
      }
    }
    slot_of_column[static_cast<std::size_t>(best_col)] = best_row;
    row_used[static_cast<std::size_t>(best_row)] = true;
  }
  std::vector<Complex> sorted_values(static_cast<std::size_t>(n));
  Matrix sorted_vectors(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto slot = slot_of_column[static_cast<std::size_t>(j)];
    sorted_values[static_cast<std::size_t>(slot)] = values[static_cast<std::size_t>(j)];
    sorted_vectors.col(slot) = vectors.col(j);
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
}

}  // namespace

double max_abs(const Matrix& u) { return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff(); }

bool is_lower_triangular(const Matrix& u, double tol) {
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < u.cols(); ++j) {
      if (std::abs(u(i, j)) > tol) return false;
    }
  }
  return true;
}

bool is_upper_triangular(const Matrix& u, double tol) {
  return is_lower_triangular(u.transpose(), tol);
}

bool is_real(const Matrix& u, double tol) {
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      if (std::abs(u(i, j).imag()) > tol) return false;
    }
  }
  return true;
}

Eigensystem eigen(const Matrix& u) {
  require_square(u, "eigen");
  if (u.rows() > kMaxVars) throw InvalidArgument("eigen: dimension exceeds supported size");
  Eigen::ComplexEigenSolver<Matrix> solver(u, true);
  if (solver.info() != Eigen::Success) throw DefectiveLinearPart("eigen: eigensolver failed");
  Eigensystem sys;
  sys.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + u.rows());
  sys.vectors = solver.eigenvectors();
  canonicalize(sys.values, sys.vectors);
  sys.condition = condition_number(sys.vectors);
  if (!(sys.condition <= kDefectiveCondition)) {
    throw DefectiveLinearPart("eigen: eigenvector matrix condition " + std::to_string(sys.condition) +
                              " exceeds 1e8; matrix treated as non-diagonalizable");
  }
  return sys;
}

std::vector<Complex> eigenvalues(const Matrix& u) {
  require_square(u, "eigenvalues");
  if (is_lower_triangular(u) || is_upper_triangular(u)) {
    std::vector<Complex> diag(static_cast<std::size_t>(u.rows()));
    for (Eigen::Index i = 0; i < u.rows(); ++i) diag[static_cast<std::size_t>(i)] = u(i, i);
    return diag;
  }
  try {
    return eigen(u).values;
  } catch (const DefectiveLinearPart&) {
    Eigen::ComplexEigenSolver<Matrix> solver(u, false);
    return {solver.eigenvalues().data(), solver.eigenvalues().data() + u.rows()};
  }
}

Eigensystem root_eigenbasis(const Matrix& u) {
  Eigensystem sys = eigen(u);
  const double scale = std::max(1.0, max_abs(u));
  if (!is_real(u, 1e-14 * scale)) return sys;
  const auto n = static_cast<Eigen::Index>(sys.values.size());
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  bool changed = false;
  for (Eigen::Index a = 0; a < n; ++a) {
    const Complex la = sys.values[static_cast<std::size_t>(a)];
    if (taken[static_cast<std::size_t>(a)] || !on_branch_cut(la, scale) || la.real() == 0.0) continue;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const Complex lb = sys.values[static_cast<std::size_t>(b)];
      if (taken[static_cast<std::size_t>(b)] || std::abs(la - lb) > 1e-12 * scale) continue;
      if (!is_real(sys.vectors.col(a), 1e-8) || !is_real(sys.vectors.col(b), 1e-8)) continue;
      const Vector v = snap_real(sys.vectors.col(a));
      const Vector w = snap_real(sys.vectors.col(b));
      const Complex i_unit(0.0, 1.0);
      sys.vectors.col(a) = (v - i_unit * w).normalized();
      sys.vectors.col(b) = (v + i_unit * w).normalized();
      sys.values[static_cast<std::size_t>(a)] = Complex(la.real(), 0.0);
      sys.values[static_cast<std::size_t>(b)] = Complex(la.real(), 0.0);
      taken[static_cast<std::size_t>(a)] = taken[static_cast<std::size_t>(b)] = true;
      changed = true;
      break;
    }
  }
  if (changed) sys.condition = condition_number(sys.vectors);
  return sys;
}

Matrix mat_exp(const Matrix& b) {
  require_square(b, "mat_exp");
  // Pade 13 with scaling and squaring.
  return b.exp();
}

Matrix mat_log(const Matrix& u, const Tolerance& tol) {
  require_square(u, "mat_log");
  check_invertible(u, tol, "mat_log");
  const double scale = max_abs(u);
  for (const Complex lambda : eigenvalues(u)) {
    if (on_branch_cut(lambda, scale)) {
      throw BranchCut("mat_log: eigenvalue on the closed negative real axis");
    }
  }
  const bool real_input = is_real(u);
  Matrix result;
  if (is_lower_triangular(u)) {
    result = lower_triangular_log(u);
  } else if (is_upper_triangular(u)) {
    result = lower_triangular_log(u.transpose()).transpose();
  } else {
    const Eigensystem sys = eigen(u);
    Vector logs(static_cast<Eigen::Index>(sys.values.size()));
    for (std::size_t j = 0; j < sys.values.size(); ++j) {
      logs(static_cast<Eigen::Index>(j)) = std::log(sys.values[j]);
    }
    result = sys.vectors * logs.asDiagonal() * sys.vectors.inverse();
  }
  return real_input ? snap_real(result) : result;
}

Matrix mat_root(const Matrix& u, int k, const BranchChoice& branch, const Tolerance& tol) {
  require_square(u, "mat_root");
  if (k < 1) throw InvalidArgument("mat_root: root degree must be positive");
  if (static_cast<Eigen::Index>(branch.size()) != u.rows()) {
    throw InvalidArgument("mat_root: branch choice length must equal the dimension");
  }
  for (int b : branch) {
    if (b < 0 || b >= k) throw InvalidArgument("mat_root: branch index out of range [0, k-1]");
  }
  check_invertible(u, tol, "mat_root");
  const Eigensystem sys = root_eigenbasis(u);
  Vector roots(static_cast<Eigen::Index>(sys.values.size()));
  for (std::size_t j = 0; j < sys.values.size(); ++j) {
    const Complex lambda = sys.values[j];
    const double modulus = std::pow(std::abs(lambda), 1.0 / k);
    const double angle = (std::arg(lambda) + 2.0 * std::numbers::pi * branch[j]) / k;
    roots(static_cast<Eigen::Index>(j)) = std::polar(modulus, angle);
  }
  Matrix result = sys.vectors * roots.asDiagonal() * sys.vectors.inverse();
  const double scale = 1.0 + max_abs(result);
  if (is_real(u) && is_real(result, 1e-12 * scale)) result = snap_real(result);
  return result;
}

Matrix mat_power(const Matrix& u, double t, const Tolerance& tol) {
  Matrix result = mat_exp(t * mat_log(u, tol));
  return is_real(u) ? snap_real(result) : result;
}

Matrix mat_int_power(const Matrix& u, int k) {
  require_square(u, "mat_int_power");
  if (k < 0) throw InvalidArgument("mat_int_power: negative exponent");
  Matrix result = Matrix::Identity(u.rows(), u.cols());
  Matrix base = u;
  while (k > 0) {
    if (k & 1) result = (result * base).eval();
    k >>= 1;
    if (k > 0) base = (base * base).eval();
  }
  return result;
}

}  // namespace ffg
