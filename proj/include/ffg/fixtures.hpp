#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffg/transform.hpp"

namespace ffg::fixtures {

/// z -> exp(i pi/3) z + z^7, a map of GS_1(C) with no square root.
Transformation example1(int order = 8);

/// Rotation by 2 pi/m composed with the shear x1 -> x1 + x2^(m+1), x2 -> x2.
/// Area preserving, with no real square root at order >= m + 1.
struct Example2Family {
  int m = 2;
  double alpha = 0.0;
  Matrix rotation;
  Transformation shear;
  Transformation map;
};

Example2Family example2_family(int m, int order);
Transformation example2(int m, int order);

/// Element of B_l: lower triangular linear part with diagonal in [1/2, 2]
/// (entries pairwise at least 0.05 apart unless repeat_eigenvalue plants
/// d_1 = d_0), entries below the diagonal in [-1, 1], and a tail with every
/// coefficient of degree 2..order uniform in [-1, 1].
Transformation random_bl(int n, int order, std::uint64_t seed, bool repeat_eigenvalue = false);

/// Element of SS_n built from a unit-determinant linear part and n shears
/// x_i -> x_i + f_i(other variables), coefficients in [-box, box].
Transformation random_ss(int n, int order, std::uint64_t seed, double box = 0.5);

/// Checked-in fixture files: name and canonical map text.
struct FixtureFile {
  std::string name;
  std::string text;
};
std::vector<FixtureFile> canonical_fixture_files();

}  // namespace ffg::fixtures
