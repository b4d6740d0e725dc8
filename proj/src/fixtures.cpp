#include "ffg/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "ffg/textio.hpp"

namespace ffg::fixtures {

Transformation example1(int order) {
  if (order < 7) throw InvalidArgument("example1 needs order >= 7 to carry the z^7 term");
  Series s(1, order);
  s.set_coeff(Exponent{1}, std::exp(Complex(0.0, std::numbers::pi / 3.0)));
  s.set_coeff(Exponent{7}, 1.0);
  return Transformation({s});
}

Example2Family example2_family(int m, int order) {
  if (m < 2 || m % 2 != 0) throw InvalidArgument("example2 needs an even m >= 2");
  if (order < m + 1) throw InvalidArgument("example2 needs order >= m + 1");
  Example2Family fam;
  fam.m = m;
  fam.alpha = 2.0 * std::numbers::pi / m;
  fam.rotation = Matrix(2, 2);
  fam.rotation << std::cos(fam.alpha), -std::sin(fam.alpha), std::sin(fam.alpha), std::cos(fam.alpha);
  Series x1 = Series::variable(2, order, 0);
  x1.set_coeff(Exponent{0, m + 1}, 1.0);
  fam.shear = Transformation({x1, Series::variable(2, order, 1)});
  fam.map = compose(Transformation::linear(fam.rotation, order), fam.shear);
  return fam;
}

Transformation example2(int m, int order) { return example2_family(m, order).map; }

Transformation random_bl(int n, int order, std::uint64_t seed, bool repeat_eigenvalue) {
  if (n < 1 || n > 4) throw InvalidArgument("random_bl supports 1 <= n <= 4");
  if (order < 1 || order > 10) throw InvalidArgument("random_bl supports order <= 10");
  if (repeat_eigenvalue && n < 2) throw InvalidArgument("a repeated eigenvalue needs n >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> diag_dist(0.5, 2.0);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  std::vector<double> diag(static_cast<std::size_t>(n));
  while (true) {
    for (auto& d : diag) d = diag_dist(rng);
    if (repeat_eigenvalue) diag[1] = diag[0];
    bool separated = true;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (repeat_eigenvalue && a == 0 && b == 1) continue;
        separated = separated && std::abs(diag[static_cast<std::size_t>(a)] - diag[static_cast<std::size_t>(b)]) >= 0.05;
      }
    }
    if (separated) break;
  }
  Matrix lin = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    lin(i, i) = diag[static_cast<std::size_t>(i)];
    for (int j = 0; j < i; ++j) lin(i, j) = entry(rng);
  }
  return random_transformation(lin, order, 1.0, rng);
}

Transformation random_ss(int n, int order, std::uint64_t seed, double box) {
  if (n < 1 || n > kMaxVars) throw InvalidArgument("random_ss: dimension out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(-box, box);
  Matrix lower = Matrix::Identity(n, n);
  Matrix upper = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      lower(i, j) = entry(rng);
      upper(j, i) = entry(rng);
    }
  }
  Transformation result = Transformation::linear(lower * upper, order);
  const auto tail = monomial_basis(n, 2, order);
  for (int i = 0; i < n; ++i) {
    std::vector<Series> comps;
    for (int c = 0; c < n; ++c) comps.push_back(Series::variable(n, order, c));
    for (const auto& e : tail) {
      if (e[i] == 0) comps[static_cast<std::size_t>(i)].set_coeff(e, entry(rng));
    }
    comps[static_cast<std::size_t>(i)].normalize();
    // Small coefficients of the product are genuine; dropping them would
    // break volume preservation at the 1e-9 level.
    result = compose(Transformation(std::move(comps)), result, Tolerance{0.0});
  }
  return result;
}

std::vector<FixtureFile> canonical_fixture_files() {
  std::vector<FixtureFile> files;
  files.push_back({"example1.map", "# z -> exp(i*pi/3)*z + z^7\n" + emit_map(example1(8))});
  files.push_back({"example2_m2.map", "# rotation by pi composed with the shear x1 -> x1 + x2^3\n" +
                                          emit_map(example2(2, 6))});
  files.push_back({"example2_m4.map", "# rotation by pi/2 composed with the shear x1 -> x1 + x2^5\n" +
                                          emit_map(example2(4, 8))});
  files.push_back({"bl_seed1.map", "# random_bl(n=2, order=8, seed=1)\n" + emit_map(random_bl(2, 8, 1))});
  files.push_back({"bl_seed2.map", "# random_bl(n=3, order=6, seed=2)\n" + emit_map(random_bl(3, 6, 2))});
  files.push_back({"bl_repeat_seed3.map", "# random_bl(n=2, order=8, seed=3, repeated eigenvalue)\n" +
                                              emit_map(random_bl(2, 8, 3, true))});
  return files;
}

}  // namespace ffg::fixtures
