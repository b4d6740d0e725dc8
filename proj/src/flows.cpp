#include "ffg/flows.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace ffg {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

void check_field_components(const std::vector<Series>& comps) {
  if (comps.empty()) throw InvalidArgument("vector field needs at least one component");
  const int n = static_cast<int>(comps.size());
  for (const auto& c : comps) {
    if (c.dim() != n) throw ShapeMismatch("field component dimension differs from the number of components");
    if (c.order() != comps.front().order()) throw ShapeMismatch("field components differ in order");
  }
}

// Outcome of one degree's linear solve.
struct DegreeSolve {
  Vector solution;
  bool non_unique = false;
  bool obstructed = false;
  Eigen::Index row = -1;
  Complex divisor;
  Complex residual;
};

DegreeSolve solve_degree(const Matrix& op, const Vector& rhs, const Tolerance& tol) {
  DegreeSolve out;
  Eigen::FullPivLU<Matrix> lu(op);
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (pivots.minCoeff() >= tol.zero_tol * std::max(1.0, pivots.maxCoeff())) {
    out.solution = lu.solve(rhs);
    return out;
  }
  // Rank deficient: minimal-norm least squares, then test consistency.
  Eigen::BDCSVD<Matrix> svd(op, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double largest = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  svd.setThreshold(tol.zero_tol * std::max(1.0, largest) / std::max(largest, std::numeric_limits<double>::min()));
  out.solution = svd.solve(rhs);
  const Vector leftover = rhs - op * out.solution;
  const double rhs_scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  Eigen::Index row = 0;
  const double worst = leftover.cwiseAbs().maxCoeff(&row);
  if (worst <= tol.zero_tol * rhs_scale) {
    out.non_unique = true;
    return out;
  }
  out.obstructed = true;
  out.row = row;
  out.residual = leftover(row);
  Eigen::ComplexEigenSolver<Matrix> eig(op, false);
  const auto& values = eig.eigenvalues();
  Eigen::Index smallest = 0;
  values.cwiseAbs().minCoeff(&smallest);
  out.divisor = values(smallest);
  return out;
}

Vector degree_part(const std::vector<Series>& comps, const std::vector<Exponent>& monomials) {
  const auto m = static_cast<Eigen::Index>(monomials.size());
  Vector v(static_cast<Eigen::Index>(comps.size()) * m);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    for (Eigen::Index q = 0; q < m; ++q) {
      v(static_cast<Eigen::Index>(i) * m + q) = comps[i].coeff(monomials[static_cast<std::size_t>(q)]);
    }
  }
  return v;
}

void add_degree_part(std::vector<Series>& comps, const std::vector<Exponent>& monomials,
                     const Vector& v, const Tolerance& tol) {
  const auto m = static_cast<Eigen::Index>(monomials.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    for (Eigen::Index q = 0; q < m; ++q) {
      comps[i].add_to_coeff(monomials[static_cast<std::size_t>(q)], v(static_cast<Eigen::Index>(i) * m + q));
    }
    comps[i].normalize(tol);
  }
}

std::optional<ResonanceWitness> matching_witness(const Matrix& linear, int degree, int component,
                                                 const Exponent& monomial, const Tolerance& tol) {
  if (degree < 2) return std::nullopt;
  try {
    const auto lambda = eigenvalues(linear);
    const auto report = find_resonances(lambda, degree, tol.zero_tol);
    std::optional<ResonanceWitness> fallback;
    for (const auto& w : report.witnesses) {
      if (!w.obstructive || w.m.degree() != degree) continue;
      if (w.s == component && w.m == monomial) return w;
      if (!fallback) fallback = w;
    }
    return fallback;
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Matrix of p -> Dp . (B x) restricted to the homogeneous monomials `basis`.
Matrix linear_derivation_block(const Matrix& b, const std::vector<Exponent>& basis) {
  const int n = static_cast<int>(b.rows());
  const auto size = static_cast<Eigen::Index>(basis.size());
  Matrix block = Matrix::Zero(size, size);
  std::map<Exponent, Eigen::Index, GradedLex> position;
  for (Eigen::Index r = 0; r < size; ++r) position[basis[static_cast<std::size_t>(r)]] = r;
  for (Eigen::Index col = 0; col < size; ++col) {
    const Exponent& q = basis[static_cast<std::size_t>(col)];
    for (int i = 0; i < n; ++i) {
      if (q[i] == 0) continue;
      Exponent reduced = q;
      reduced.set(i, q[i] - 1);
      for (int k = 0; k < n; ++k) {
        const Complex coeff = b(i, k);
        if (coeff == Complex{}) continue;
        Exponent image = reduced;
        image.set(k, reduced[k] + 1);
        block(position.at(image), col) += static_cast<double>(q[i]) * coeff;
      }
    }
  }
  return block;
}

}  // namespace

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(std::vector<Series> components) : components_(std::move(components)) {
  check_field_components(components_);
  const int n = static_cast<int>(components_.size());
  order_ = components_.front().order();
  linear_ = Matrix::Zero(n, n);
  const Exponent zero(n);
  for (int i = 0; i < n; ++i) {
    auto& c = components_[idx(i)];
    if (std::abs(c.coeff(zero)) >= kDefaultZeroTol) {
      throw InvalidArgument("field component " + std::to_string(i + 1) + " has a nonzero constant term");
    }
    c.set_coeff(zero, 0.0);
    for (int j = 0; j < n; ++j) linear_(i, j) = c.coeff(Exponent::unit(n, j));
  }
}

VectorField VectorField::zero(int n, int order) {
  return VectorField(std::vector<Series>(idx(n), Series(n, order)));
}

VectorField VectorField::linear(const Matrix& b, int order) {
  return from_map(Transformation::linear(b, order));
}

VectorField VectorField::with_order(int new_order) const {
  std::vector<Series> comps;
  for (const auto& c : components_) comps.push_back(c.with_order(new_order));
  return VectorField(std::move(comps));
}

Transformation VectorField::as_map() const { return Transformation(components_); }

VectorField VectorField::from_map(const Transformation& map) { return VectorField(map.components()); }

VectorField add(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim() || a.order() != b.order()) throw ShapeMismatch("add: fields differ in shape");
  std::vector<Series> comps;
  for (int i = 0; i < a.dim(); ++i) comps.push_back(add(a[i], b[i]));
  return VectorField(std::move(comps));
}

double distance(const VectorField& a, const VectorField& b) { return distance(a.as_map(), b.as_map()); }

ObstructionError::ObstructionError(Obstruction obstruction)
    : Error("obstruction at degree " + std::to_string(obstruction.degree) + ", component " +
            std::to_string(obstruction.component + 1)),
      obstruction_(std::move(obstruction)) {}

int DerivationMatrix::index_of(const Exponent& e) const {
  auto it = std::find(basis.begin(), basis.end(), e);
  return it == basis.end() ? -1 : static_cast<int>(it - basis.begin());
}

// ---------------------------------------------------------------------------
// Operator matrices

DerivationMatrix derivation_matrix(const VectorField& x) {
  DerivationMatrix dm;
  dm.n = x.dim();
  dm.order = x.order();
  dm.basis = monomial_basis(dm.n, 1, dm.order);
  const auto size = static_cast<Eigen::Index>(dm.basis.size());
  dm.matrix = Matrix::Zero(size, size);
  std::map<Exponent, Eigen::Index, GradedLex> position;
  for (Eigen::Index r = 0; r < size; ++r) position[dm.basis[static_cast<std::size_t>(r)]] = r;
  // X has no constant term, so D_X never lowers degree: truncating the image
  // at N loses nothing about degrees <= N.
  for (Eigen::Index col = 0; col < size; ++col) {
    const Exponent& q = dm.basis[static_cast<std::size_t>(col)];
    for (int i = 0; i < dm.n; ++i) {
      if (q[i] == 0) continue;
      Exponent reduced = q;
      reduced.set(i, q[i] - 1);
      for (const auto& [e, c] : x[i].terms()) {
        if (reduced.degree() + e.degree() > dm.order) break;
        dm.matrix(position.at(reduced + e), col) += static_cast<double>(q[i]) * c;
      }
    }
  }
  return dm;
}

DerivationMatrix substitution_matrix(const Transformation& u) {
  DerivationMatrix sm;
  sm.n = u.dim();
  sm.order = u.order();
  sm.basis = monomial_basis(sm.n, 1, sm.order);
  const auto size = static_cast<Eigen::Index>(sm.basis.size());
  sm.matrix = Matrix::Zero(size, size);
  for (Eigen::Index col = 0; col < size; ++col) {
    const Series image =
        substitute(Series::monomial(sm.n, sm.order, sm.basis[static_cast<std::size_t>(col)]), u.components());
    for (const auto& [e, c] : image.terms()) {
      const int row = sm.index_of(e);
      if (row >= 0) sm.matrix(row, col) = c;
    }
  }
  return sm;
}

Transformation exp_flow(const VectorField& x, double t) {
  // Conjugate by the exact scaling x -> rho x (rho a power of two): the field
  // coefficients of degree k pick up rho^(k-1), which keeps the derivation
  // matrix balanced and the squaring count low. The flow is scaled back by
  // rho^(1-k) on degree k.
  const int n = x.dim();
  double growth = 1.0;
  for (const auto& c : x.components()) {
    for (const auto& [e, v] : c.terms()) {
      if (e.degree() >= 2) growth = std::max(growth, std::pow(std::abs(v), 1.0 / (e.degree() - 1)));
    }
  }
  const int shift = growth > 1.0 ? static_cast<int>(std::ceil(std::log2(growth))) : 0;
  std::vector<Series> scaled;
  for (const auto& c : x.components()) {
    Series s(n, x.order());
    for (const auto& [e, v] : c.terms()) s.set_coeff(e, v * std::ldexp(1.0, -shift * (e.degree() - 1)));
    scaled.push_back(std::move(s));
  }
  const DerivationMatrix dm = derivation_matrix(VectorField(std::move(scaled)));
  const Matrix flow = mat_exp(t * dm.matrix);
  std::vector<Series> comps;
  for (int i = 0; i < n; ++i) {
    const int col = dm.index_of(Exponent::unit(n, i));
    Series s(n, x.order());
    for (std::size_t r = 0; r < dm.basis.size(); ++r) {
      const int k = dm.basis[r].degree();
      s.set_coeff(dm.basis[r], flow(static_cast<Eigen::Index>(r), col) * std::ldexp(1.0, shift * (k - 1)));
    }
    comps.push_back(std::move(s.normalize()));
  }
  return Transformation(std::move(comps));
}

Matrix log_degree_operator(const Matrix& b, int d) {
  // Inserting a homogeneous degree-d field w into X = Bx + (higher terms)
  // affects degree d of the time-one map only through a single insertion
  // flanked by linear flows; any other product lands in degree >= d + 1.
  // On the invariant space (degree-1) + (degree-d) the derivation is block
  // lower triangular K = [[L1, 0], [C, Ld]] with C carrying w, and the wanted
  // block is the lower-left corner of exp(K), computed by scaling and squaring
  // with the diagonal blocks shared across columns.
  const int n = static_cast<int>(b.rows());
  const auto monomials = monomials_of_degree(n, d);
  const auto m = static_cast<Eigen::Index>(monomials.size());
  const Matrix l1 = b.transpose();
  const Matrix ld = linear_derivation_block(b, monomials);

  const double norm = std::max(l1.cwiseAbs().colwise().sum().maxCoeff(), ld.cwiseAbs().colwise().sum().maxCoeff());
  int squarings = 0;
  if (norm + 1.0 > 0.5) squarings = static_cast<int>(std::ceil(std::log2((norm + 1.0) / 0.5)));
  const double h = std::ldexp(1.0, -squarings);
  const Matrix l1h = l1 * h;
  const Matrix ldh = ld * h;

  // Taylor terms of the diagonal blocks at the scaled step.
  std::vector<Matrix> l1_powers{Matrix::Identity(n, n)};
  std::vector<Matrix> ld_powers{Matrix::Identity(m, m)};
  constexpr int kTerms = 30;
  for (int k = 1; k <= kTerms; ++k) {
    l1_powers.push_back(l1_powers.back() * l1h);
    ld_powers.push_back(ld_powers.back() * ldh);
  }
  Matrix e1 = Matrix::Zero(n, n);
  Matrix ed = Matrix::Zero(m, m);
  double factorial = 1.0;
  for (int k = 0; k <= kTerms; ++k) {
    if (k > 0) factorial *= k;
    e1 += l1_powers[idx(k)] / factorial;
    ed += ld_powers[idx(k)] / factorial;
  }
  std::vector<Matrix> e1_sq{e1};
  std::vector<Matrix> ed_sq{ed};
  for (int s = 1; s < squarings; ++s) {
    e1_sq.push_back(e1_sq.back() * e1_sq.back());
    ed_sq.push_back(ed_sq.back() * ed_sq.back());
  }

  Matrix op = Matrix::Zero(n * m, n * m);
  for (int wi = 0; wi < n; ++wi) {
    for (Eigen::Index wq = 0; wq < m; ++wq) {
      // Corner of exp(h K): sum_k h^k/k! sum_{j<k} Ld^{k-1-j} C L1^j.
      Matrix c = Matrix::Zero(m, n);
      c(wq, wi) = h;
      Matrix corner = Matrix::Zero(m, n);
      Matrix s_k = c;  // running sum for k = 1
      factorial = 1.0;
      for (int k = 1; k <= kTerms; ++k) {
        factorial *= k;
        corner += s_k / factorial;
        s_k = (ldh * s_k + c * l1_powers[idx(k)]).eval();
      }
      for (int s = 0; s < squarings; ++s) {
        corner = (corner * e1_sq[idx(s)] + ed_sq[idx(s)] * corner).eval();
      }
      const Eigen::Index column = wi * m + wq;
      for (int comp = 0; comp < n; ++comp) {
        op.block(comp * m, column, m, 1) = corner.col(comp);
      }
    }
  }
  return op;
}

Matrix root_degree_operator(const Matrix& a, int k, int d) {
  const int n = static_cast<int>(a.rows());
  const auto monomials = monomials_of_degree(n, d);
  const auto m = static_cast<Eigen::Index>(monomials.size());
  Matrix op = Matrix::Zero(n * m, n * m);
  for (int j = 0; j < k; ++j) {
    const Matrix outer = mat_int_power(a, k - 1 - j);
    const Transformation inner = Transformation::linear(mat_int_power(a, j), d);
    // sub(p, q): coefficient of p in q(A^j x).
    Matrix sub = Matrix::Zero(m, m);
    for (Eigen::Index q = 0; q < m; ++q) {
      const Series image = substitute(Series::monomial(n, d, monomials[static_cast<std::size_t>(q)]),
                                      inner.components(), Tolerance{0.0});
      for (Eigen::Index p = 0; p < m; ++p) sub(p, q) = image.coeff(monomials[static_cast<std::size_t>(p)]);
    }
    for (int row_comp = 0; row_comp < n; ++row_comp) {
      for (int col_comp = 0; col_comp < n; ++col_comp) {
        const Complex weight = outer(row_comp, col_comp);
        if (weight == Complex{}) continue;
        op.block(row_comp * m, col_comp * m, m, m) += weight * sub;
      }
    }
  }
  return op;
}

// ---------------------------------------------------------------------------
// Solvers

LogResult log_transform_detailed(const Transformation& u, const Tolerance& tol) {
  const int n = u.dim();
  const int order = u.order();
  const Matrix b = mat_log(u.linear_part(), tol);
  LogResult result{VectorField::linear(b, order), {}};
  for (int d = 2; d <= order; ++d) {
    const auto monomials = monomials_of_degree(n, d);
    const Transformation current = exp_flow(result.field.with_order(d), 1.0);
    const Vector rhs = degree_part(u.components(), monomials) - degree_part(current.components(), monomials);
    const DegreeSolve solved = solve_degree(log_degree_operator(b, d), rhs, tol);
    if (solved.obstructed) {
      Obstruction ob;
      ob.degree = d;
      ob.component = static_cast<int>(solved.row / static_cast<Eigen::Index>(monomials.size()));
      ob.monomial = monomials[static_cast<std::size_t>(solved.row % static_cast<Eigen::Index>(monomials.size()))];
      ob.divisor = solved.divisor;
      ob.residual = solved.residual;
      ob.witness = matching_witness(u.linear_part(), d, ob.component, ob.monomial, tol);
      ob.solved_prefix = result.field.as_map();
      throw ObstructionError(std::move(ob));
    }
    if (solved.non_unique) result.non_unique_degrees.push_back(d);
    std::vector<Series> comps = result.field.components();
    add_degree_part(comps, monomials, solved.solution, tol);
    result.field = VectorField(std::move(comps));
  }
  return result;
}

VectorField log_transform(const Transformation& u, const Tolerance& tol) {
  return log_transform_detailed(u, tol).field;
}

RootResult functional_root_detailed(const Transformation& u, int k, const BranchChoice& branch,
                                    const Tolerance& tol) {
  if (k < 1) throw InvalidArgument("functional_root: k must be positive");
  const int n = u.dim();
  const int order = u.order();
  const Matrix a = mat_root(u.linear_part(), k, branch, tol);
  RootResult result{Transformation::linear(a, order), {}};
  for (int d = 2; d <= order; ++d) {
    const auto monomials = monomials_of_degree(n, d);
    const Transformation power = compose_power(result.root.with_order(d), k);
    const Vector rhs = degree_part(u.components(), monomials) - degree_part(power.components(), monomials);
    const DegreeSolve solved = solve_degree(root_degree_operator(a, k, d), rhs, tol);
    if (solved.obstructed) {
      Obstruction ob;
      ob.degree = d;
      ob.component = static_cast<int>(solved.row / static_cast<Eigen::Index>(monomials.size()));
      ob.monomial = monomials[static_cast<std::size_t>(solved.row % static_cast<Eigen::Index>(monomials.size()))];
      ob.divisor = solved.divisor;
      ob.residual = solved.residual;
      ob.witness = matching_witness(u.linear_part(), d, ob.component, ob.monomial, tol);
      ob.solved_prefix = result.root;
      throw ObstructionError(std::move(ob));
    }
    if (solved.non_unique) result.non_unique_degrees.push_back(d);
    std::vector<Series> comps = result.root.components();
    add_degree_part(comps, monomials, solved.solution, tol);
    result.root = Transformation(std::move(comps));
  }
  return result;
}

Transformation functional_root(const Transformation& u, int k, const BranchChoice& branch,
                               const Tolerance& tol) {
  return functional_root_detailed(u, k, branch, tol).root;
}

std::vector<BranchOutcome> functional_root_all_branches(const Transformation& u, int k,
                                                        const Tolerance& tol) {
  if (k < 1) throw InvalidArgument("functional_root_all_branches: k must be positive");
  const int n = u.dim();
  bool real_map = true;
  for (const auto& c : u.components()) {
    for (const auto& [e, v] : c.terms()) real_map = real_map && std::abs(v.imag()) <= tol.zero_tol;
  }
  std::vector<BranchOutcome> outcomes;
  BranchChoice branch(idx(n), 0);
  while (true) {
    const Matrix a = mat_root(u.linear_part(), k, branch, tol);
    if (!real_map || is_real(a, tol.zero_tol * (1.0 + max_abs(a)))) {
      try {
        outcomes.push_back({branch, functional_root(u, k, branch, tol)});
      } catch (const ObstructionError& err) {
        outcomes.push_back({branch, err.obstruction()});
      }
    }
    // Odometer over branch indices, last entry fastest.
    int pos = n - 1;
    while (pos >= 0 && ++branch[idx(pos)] == k) branch[idx(pos--)] = 0;
    if (pos < 0) break;
  }
  return outcomes;
}

Transformation iterate(const Transformation& u, double t, const Tolerance& tol) {
  return exp_flow(log_transform(u, tol), t);
}

}  // namespace ffg
