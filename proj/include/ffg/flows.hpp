#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "ffg/linfun.hpp"
#include "ffg/resonance.hpp"
#include "ffg/series.hpp"
#include "ffg/transform.hpp"

namespace ffg {

/// Right-hand side X of the autonomous system y' = X(y): n series with zero
/// constant term. The linear part B holds the degree-1 coefficients.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(std::vector<Series> components);

  static VectorField zero(int n, int order);
  static VectorField linear(const Matrix& b, int order);

  int dim() const { return static_cast<int>(components_.size()); }
  int order() const { return order_; }
  const std::vector<Series>& components() const { return components_; }
  const Series& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }
  const Matrix& linear_part() const { return linear_; }

  VectorField with_order(int new_order) const;

  /// Same component series viewed as a map (for text and JSON output).
  Transformation as_map() const;
  static VectorField from_map(const Transformation& map);

 private:
  int order_ = 0;
  std::vector<Series> components_;
  Matrix linear_;
};

VectorField add(const VectorField& a, const VectorField& b);
double distance(const VectorField& a, const VectorField& b);

/// A linear operator on the degree 1..N monomial basis. Column q holds the
/// image of basis monomial q.
struct DerivationMatrix {
  int n = 0;
  int order = 0;
  std::vector<Exponent> basis;
  Matrix matrix;

  /// Row/column of a monomial in `basis`, or -1.
  int index_of(const Exponent& e) const;
};

/// Certified failure of an order-by-order solve: at (degree, component,
/// monomial) the equation has a vanishing divisor and a nonzero right-hand side.
struct Obstruction {
  int degree = 0;
  int component = 0;  // 0-based
  Exponent monomial;
  Complex divisor;
  Complex residual;
  std::optional<ResonanceWitness> witness;
  /// The solution assembled through degree - 1 when the solve stopped.
  std::optional<Transformation> solved_prefix;
};

class ObstructionError : public Error {
 public:
  explicit ObstructionError(Obstruction obstruction);
  const Obstruction& obstruction() const { return obstruction_; }

 private:
  Obstruction obstruction_;
};

DerivationMatrix derivation_matrix(const VectorField& x);
/// Matrix of p -> p o u on the degree 1..N basis; C_{u o v} = C_v C_u.
DerivationMatrix substitution_matrix(const Transformation& u);

/// Time-t map of y' = X(y), exact through degree N: exp(t D_X) applied to the
/// coordinate functions.
Transformation exp_flow(const VectorField& x, double t);

struct LogResult {
  VectorField field;
  /// Degrees at which the linear system was singular but consistent; the
  /// minimal-norm correction was taken there.
  std::vector<int> non_unique_degrees;
};

/// Vector field X with exp_flow(X, 1) = u through order N. Throws
/// ObstructionError when some degree has no solution.
LogResult log_transform_detailed(const Transformation& u, const Tolerance& tol = {});
VectorField log_transform(const Transformation& u, const Tolerance& tol = {});

struct RootResult {
  Transformation root;
  std::vector<int> non_unique_degrees;
};

/// g with g^{o k} = u through order N and linear part mat_root(U, k, branch).
RootResult functional_root_detailed(const Transformation& u, int k, const BranchChoice& branch,
                                    const Tolerance& tol = {});
Transformation functional_root(const Transformation& u, int k, const BranchChoice& branch,
                               const Tolerance& tol = {});

struct BranchOutcome {
  BranchChoice branch;
  std::variant<Transformation, Obstruction> result;

  bool ok() const { return std::holds_alternative<Transformation>(result); }
};

/// Runs functional_root on every branch combination; for real u only branches
/// with a real linear root are kept. An empty or all-obstructed list certifies
/// that no k-th root exists at this order.
std::vector<BranchOutcome> functional_root_all_branches(const Transformation& u, int k,
                                                        const Tolerance& tol = {});

/// f^t = exp_flow(log_transform(u), t).
Transformation iterate(const Transformation& u, double t, const Tolerance& tol = {});

/// Degree-d block of the linearized logarithm equation: maps the coefficients
/// of a homogeneous degree-d field w to the degree-d part of
/// exp_flow(Bx + w, 1) - exp_flow(Bx, 1). Rows and columns are indexed by
/// (component, monomial) with the component major.
Matrix log_degree_operator(const Matrix& b, int d);

/// Degree-d block of the linearized root equation:
/// h -> sum_{j<k} A^{k-1-j} h(A^j x).
Matrix root_degree_operator(const Matrix& a, int k, int d);

}  // namespace ffg
