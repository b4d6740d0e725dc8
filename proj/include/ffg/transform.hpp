#pragma once

#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ffg/linfun.hpp"
#include "ffg/series.hpp"

namespace ffg {

/// Subgroups of the formal transformation group.
enum class GroupTag { GS, SS, BL, BU };

std::string to_string(GroupTag tag);
GroupTag parse_group_tag(const std::string& name);

/// A tuple of n truncated series with zero constant term: an element of the
/// monoid of formal maps, and of GS_n when the linear part is invertible.
class Transformation {
 public:
  Transformation() = default;
  explicit Transformation(std::vector<Series> components);

  static Transformation identity(int n, int order);
  static Transformation linear(const Matrix& u, int order);

  int dim() const { return static_cast<int>(components_.size()); }
  int order() const { return order_; }
  const std::vector<Series>& components() const { return components_; }
  const Series& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }
  /// Degree-1 coefficients: entry (i, j) is the coefficient of x_j in component i.
  const Matrix& linear_part() const { return linear_; }

  /// Components truncated to terms of degree <= d.
  Transformation truncated(int degree) const;
  Transformation with_order(int new_order) const;
  /// Degree-d homogeneous part of every component.
  Transformation homogeneous(int degree) const;

  friend bool operator==(const Transformation& a, const Transformation& b) {
    return a.components_ == b.components_;
  }

 private:
  int order_ = 0;
  std::vector<Series> components_;
  Matrix linear_;
};

/// a o b: each component of a evaluated at the components of b.
Transformation compose(const Transformation& a, const Transformation& b);
Transformation compose(const Transformation& a, const Transformation& b, const Tolerance& tol);
/// k-fold self composition u o ... o u (k >= 1).
Transformation compose_power(const Transformation& u, int k);
Transformation inverse(const Transformation& u, const Tolerance& tol = {});
/// Determinant of the Jacobian matrix, reliable through degree order - 1.
Series jacobian_det(const Transformation& u);
/// SS membership allows det(Du) - 1 up to zero_tol * N * (1 + max_norm(u))^n:
/// dropping a coefficient below the zero threshold moves the Jacobian
/// determinant by up to that much.
std::set<GroupTag> classify(const Transformation& u, const Tolerance& tol = {});
bool is_member(const Transformation& u, GroupTag tag, const Tolerance& tol = {});
/// Largest coefficient-wise difference over all components.
double distance(const Transformation& a, const Transformation& b);
/// Largest coefficient magnitude over all components.
double max_norm(const Transformation& u);

/// Random transformation with tail coefficients uniform in [-box, box] for
/// every monomial of degree 2..order. The linear part is `linear`.
Transformation random_transformation(const Matrix& linear, int order, double box,
                                     std::mt19937_64& rng);
/// Linear part I + P with P uniform in [-perturbation, perturbation].
Transformation random_near_identity(int n, int order, double perturbation, double box,
                                    std::mt19937_64& rng);

}  // namespace ffg
