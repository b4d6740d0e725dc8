#include "ffg/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/LU>

namespace ffg {

std::string to_string(GroupTag tag) {
  switch (tag) {
    case GroupTag::GS: return "gs";
    case GroupTag::SS: return "ss";
    case GroupTag::BL: return "bl";
    case GroupTag::BU: return "bu";
  }
  return "?";
}

GroupTag parse_group_tag(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "gs") return GroupTag::GS;
  if (lower == "ss") return GroupTag::SS;
  if (lower == "bl") return GroupTag::BL;
  if (lower == "bu") return GroupTag::BU;
  throw InvalidArgument("unknown group '" + name + "' (expected gs, ss, bl or bu)");
}

Transformation::Transformation(std::vector<Series> components) : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("transformation needs at least one component");
  const int n = static_cast<int>(components_.size());
  order_ = components_.front().order();
  linear_ = Matrix::Zero(n, n);
  const Exponent zero(n);
  for (int i = 0; i < n; ++i) {
    auto& c = components_[static_cast<std::size_t>(i)];
    if (c.dim() != n) throw ShapeMismatch("component dimension differs from the number of components");
    if (c.order() != order_) throw ShapeMismatch("components differ in truncation order");
    if (std::abs(c.coeff(zero)) >= kDefaultZeroTol) {
      throw InvalidArgument("component " + std::to_string(i + 1) + " has a nonzero constant term");
    }
    c.set_coeff(zero, 0.0);
    for (int j = 0; j < n; ++j) linear_(i, j) = c.coeff(Exponent::unit(n, j));
  }
}

Transformation Transformation::identity(int n, int order) {
  std::vector<Series> comps;
  for (int i = 0; i < n; ++i) comps.push_back(Series::variable(n, order, i));
  return Transformation(std::move(comps));
}

Transformation Transformation::linear(const Matrix& u, int order) {
  if (u.rows() != u.cols()) throw InvalidArgument("linear map needs a square matrix");
  const int n = static_cast<int>(u.rows());
  std::vector<Series> comps;
  for (int i = 0; i < n; ++i) {
    Series s(n, order);
    for (int j = 0; j < n; ++j) s.set_coeff(Exponent::unit(n, j), u(i, j));
    comps.push_back(std::move(s.normalize()));
  }
  return Transformation(std::move(comps));
}

Transformation Transformation::truncated(int degree) const {
  std::vector<Series> comps;
  for (const auto& c : components_) comps.push_back(c.truncated(degree));
  return Transformation(std::move(comps));
}

Transformation Transformation::with_order(int new_order) const {
  std::vector<Series> comps;
  for (const auto& c : components_) comps.push_back(c.with_order(new_order));
  return Transformation(std::move(comps));
}

Transformation Transformation::homogeneous(int degree) const {
  std::vector<Series> comps;
  for (const auto& c : components_) comps.push_back(c.homogeneous(degree));
  return Transformation(std::move(comps));
}

Transformation compose(const Transformation& a, const Transformation& b) {
  return compose(a, b, Tolerance{});
}

Transformation compose(const Transformation& a, const Transformation& b, const Tolerance& tol) {
  if (a.dim() != b.dim() || a.order() != b.order()) {
    throw ShapeMismatch("compose: transformations differ in dimension or order");
  }
  std::vector<Series> comps;
  comps.reserve(static_cast<std::size_t>(a.dim()));
  for (const auto& c : a.components()) comps.push_back(substitute(c, b.components(), tol));
  return Transformation(std::move(comps));
}

Transformation compose_power(const Transformation& u, int k) {
  if (k < 1) throw InvalidArgument("compose_power: k must be positive");
  Transformation result = u;
  for (int j = 1; j < k; ++j) result = compose(u, result);
  return result;
}

Transformation inverse(const Transformation& u, const Tolerance& tol) {
  const Matrix& lin = u.linear_part();
  if (std::abs(lin.determinant()) <= tol.zero_tol) {
    throw NotInvertible("inverse: linear part is singular (|det U| <= zero_tol)");
  }
  const int n = u.dim();
  const Eigen::PartialPivLU<Matrix> lu(lin);
  Transformation v = Transformation::linear(lu.inverse(), u.order());
  const auto u_parts = [&] {
    std::vector<Transformation> parts;
    for (int d = 2; d <= u.order(); ++d) parts.push_back(u.with_order(d));
    return parts;
  }();
  for (int d = 2; d <= u.order(); ++d) {
    // Degree-d part of u o v comes from U v_d (unknown, zero so far) plus
    // the nonlinear terms of u applied to v_{<d}.
    const Transformation partial = compose(u_parts[static_cast<std::size_t>(d - 2)], v.with_order(d));
    const auto monomials = monomials_of_degree(n, d);
    Matrix rhs(n, static_cast<Eigen::Index>(monomials.size()));
    for (int i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < monomials.size(); ++q) {
        rhs(i, static_cast<Eigen::Index>(q)) = -partial[i].coeff(monomials[q]);
      }
    }
    const Matrix solution = lu.solve(rhs);
    std::vector<Series> comps = v.components();
    for (int i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < monomials.size(); ++q) {
        comps[static_cast<std::size_t>(i)].set_coeff(monomials[q], solution(i, static_cast<Eigen::Index>(q)));
      }
      comps[static_cast<std::size_t>(i)].normalize(tol);
    }
    v = Transformation(std::move(comps));
  }
  return v;
}

Series jacobian_det(const Transformation& u) {
  const int n = u.dim();
  std::vector<std::vector<Series>> jac(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) jac[static_cast<std::size_t>(i)].push_back(derivative(u[i], j));
  }
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Series det(n, u.order());
  do {
    int inversions = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) inversions += perm[static_cast<std::size_t>(a)] > perm[static_cast<std::size_t>(b)];
    }
    // Cancellation between permutations is exact only without intermediate
    // normalization.
    Series term = Series::constant(n, u.order(), inversions % 2 == 0 ? 1.0 : -1.0);
    for (int i = 0; i < n && !term.is_zero(); ++i) {
      term = mul(term, jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])],
                 Tolerance{0.0});
    }
    for (const auto& [e, c] : term.terms()) det.add_to_coeff(e, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return det.normalize();
}

bool is_member(const Transformation& u, GroupTag tag, const Tolerance& tol) {
  const Matrix& lin = u.linear_part();
  if (std::abs(lin.determinant()) <= tol.zero_tol) return false;
  const auto positive_real_diagonal = [&] {
    if (!is_real(lin, tol.zero_tol)) return false;
    for (Eigen::Index i = 0; i < lin.rows(); ++i) {
      if (lin(i, i).real() <= tol.zero_tol) return false;
    }
    return true;
  };
  switch (tag) {
    case GroupTag::GS: return true;
    case GroupTag::SS: {
      Series defect = jacobian_det(u).truncated(u.order() - 1);
      defect.add_to_coeff(Exponent(u.dim()), -1.0);
      const double budget = u.order() * std::pow(1.0 + max_norm(u), u.dim());
      return max_norm(defect) <= tol.zero_tol * budget;
    }
    case GroupTag::BL: return is_lower_triangular(lin, tol.zero_tol) && positive_real_diagonal();
    case GroupTag::BU: return is_upper_triangular(lin, tol.zero_tol) && positive_real_diagonal();
  }
  return false;
}

std::set<GroupTag> classify(const Transformation& u, const Tolerance& tol) {
  std::set<GroupTag> tags;
  for (GroupTag tag : {GroupTag::GS, GroupTag::SS, GroupTag::BL, GroupTag::BU}) {
    if (is_member(u, tag, tol)) tags.insert(tag);
  }
  return tags;
}

double distance(const Transformation& a, const Transformation& b) {
  if (a.dim() != b.dim() || a.order() != b.order()) {
    throw ShapeMismatch("distance: transformations differ in dimension or order");
  }
  double worst = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    Series diff = a[i];
    for (const auto& [e, c] : b[i].terms()) diff.add_to_coeff(e, -c);
    worst = std::max(worst, max_norm(diff));
  }
  return worst;
}

double max_norm(const Transformation& u) {
  double worst = 0.0;
  for (const auto& c : u.components()) worst = std::max(worst, max_norm(c));
  return worst;
}

Transformation random_transformation(const Matrix& linear, int order, double box,
                                     std::mt19937_64& rng) {
  const int n = static_cast<int>(linear.rows());
  std::uniform_real_distribution<double> coeff(-box, box);
  const auto tail = monomial_basis(n, 2, order);
  std::vector<Series> comps;
  for (int i = 0; i < n; ++i) {
    Series s(n, order);
    for (int j = 0; j < n; ++j) s.set_coeff(Exponent::unit(n, j), linear(i, j));
    for (const auto& e : tail) s.set_coeff(e, coeff(rng));
    comps.push_back(std::move(s.normalize()));
  }
  return Transformation(std::move(comps));
}

Transformation random_near_identity(int n, int order, double perturbation, double box,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> entry(-perturbation, perturbation);
  Matrix lin = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) lin(i, j) += entry(rng);
  }
  return random_transformation(lin, order, box, rng);
}

}  // namespace ffg
