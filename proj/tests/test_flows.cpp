#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ffg/fixtures.hpp"
#include "ffg/flows.hpp"
#include "ffg/textio.hpp"
#include "oracles.hpp"

using namespace ffg;
using std::numbers::pi;

namespace {

const double kLn2 = std::log(2.0);

Transformation map(const char* text) { return read_map(text); }

Complex c(const Transformation& u, int i, std::initializer_list<int> e) { return u[i].coeff(Exponent(e)); }

// Field whose degree-d part has the given coefficients (component major).
VectorField degree_field(int n, int order, int d, const Vector& w) {
  const auto mons = monomials_of_degree(n, d);
  std::vector<Series> comps;
  for (int i = 0; i < n; ++i) {
    Series s(n, order);
    for (std::size_t q = 0; q < mons.size(); ++q) s.set_coeff(mons[q], w(static_cast<Eigen::Index>(i * mons.size() + q)));
    comps.push_back(std::move(s));
  }
  return VectorField(std::move(comps));
}

Vector degree_vector(const Transformation& u, int d) {
  const auto mons = monomials_of_degree(u.dim(), d);
  Vector v(static_cast<Eigen::Index>(u.dim() * mons.size()));
  for (int i = 0; i < u.dim(); ++i) {
    for (std::size_t q = 0; q < mons.size(); ++q) v(static_cast<Eigen::Index>(i * mons.size() + q)) = u[i].coeff(mons[q]);
  }
  return v;
}

}  // namespace

TEST_CASE("derivation matrix examples") {
  const Complex mu(0.3, -0.2);
  const VectorField lin = VectorField::from_map(Transformation::linear(Matrix::Constant(1, 1, mu), 3));
  const auto d = derivation_matrix(lin);
  REQUIRE(d.matrix.rows() == 3);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(d.matrix(k, k) - static_cast<double>(k + 1) * mu) <= 1e-15);
  CHECK(std::abs(d.matrix(1, 0)) == 0.0);

  const VectorField sq = VectorField::from_map(map("vars: z; order: 3\nz -> z^2"));
  const auto ds = derivation_matrix(sq);
  Matrix expect = Matrix::Zero(3, 3);
  expect(1, 0) = 1.0;
  expect(2, 1) = 2.0;
  CHECK(ds.matrix == expect);

  CHECK(derivation_matrix(VectorField::zero(2, 4)).matrix.isZero());
  CHECK(derivation_matrix(VectorField::zero(2, 4)).basis.size() == 14);
}

TEST_CASE("derivation matrix never lowers degree") {
  std::mt19937_64 rng(51);
  const auto x = oracle::random_field(2, 5, 1.0, 1.0, rng);
  const auto d = derivation_matrix(x);
  for (std::size_t r = 0; r < d.basis.size(); ++r) {
    for (std::size_t q = 0; q < d.basis.size(); ++q) {
      if (d.basis[r].degree() < d.basis[q].degree()) {
        CHECK(d.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) == Complex{});
      }
    }
  }
}

TEST_CASE("exp_flow examples") {
  const Complex mu(0.4, 1.1);
  const VectorField lin = VectorField::from_map(Transformation::linear(Matrix::Constant(1, 1, mu), 4));
  for (double t : {-1.0, 0.3, 2.0}) {
    const auto f = exp_flow(lin, t);
    CHECK(std::abs(c(f, 0, {1}) - std::exp(mu * t)) <= 1e-13);
    CHECK(max_norm(f[0].homogeneous(2)) == 0.0);
  }

  // z' = z^2 has the solution z / (1 - t z).
  const VectorField sq = VectorField::from_map(map("vars: z; order: 4\nz -> z^2"));
  for (double t : {-0.7, 0.5, 1.0, 1.9}) {
    const auto f = exp_flow(sq, t);
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(c(f, 0, {k}) - std::pow(t, k - 1)) <= 1e-12);
  }

  std::mt19937_64 rng(52);
  const auto x = oracle::random_field(2, 6, 1.0, 1.0, rng);
  CHECK(exp_flow(x, 0.0) == Transformation::identity(2, 6));
}

TEST_CASE("exp_flow matches adaptive integration of the jet equation") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 2;
    const auto x = oracle::random_field(n, n == 1 ? 8 : 5, 0.8, 0.5, rng);
    for (double t : {1.0, -0.6}) {
      CHECK(distance(exp_flow(x, t), oracle::ode_jet_flow(x, t)) <= 1e-6);
    }
  }
}

TEST_CASE("exp_flow is a one-parameter group") {
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> time(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = oracle::random_field(2, 6, 0.5, 0.5, rng);
    const double t = time(rng), s = time(rng);
    CHECK(distance(compose(exp_flow(x, t), exp_flow(x, s)), exp_flow(x, t + s)) <= 1e-9);
  }
}

TEST_CASE("substitution matrix examples") {
  CHECK(substitution_matrix(Transformation::identity(2, 3)).matrix == Matrix::Identity(9, 9));
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 2.0;
  expect(1, 1) = 4.0;
  CHECK(substitution_matrix(map("vars: z; order: 2\nz -> 2*z")).matrix == expect);

  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_near_identity(2, 5, 0.5, 1.0, rng).truncated(3);
    const auto b = random_near_identity(2, 5, 0.5, 1.0, rng).truncated(3);
    const Matrix lhs = substitution_matrix(compose(a, b)).matrix;
    const Matrix rhs = substitution_matrix(b).matrix * substitution_matrix(a).matrix;
    CHECK(max_abs(lhs - rhs) <= 1e-9 * std::max(1.0, max_abs(lhs)));
  }
}

TEST_CASE("the substitution matrix of a flow is the exponential of the derivation") {
  std::mt19937_64 rng(56);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = oracle::random_field(2, 6, 0.5, 0.5, rng);
    const Matrix lhs = substitution_matrix(exp_flow(x, 1.0)).matrix;
    CHECK(max_abs(lhs - mat_exp(derivation_matrix(x).matrix)) <= 1e-8);
  }
}

TEST_CASE("log_transform examples") {
  const auto u = map("vars: z; order: 6\nz -> 2*z + z^2");
  const auto x = log_transform(u);
  // Bernoulli flow z' = a z + b z^2 has time-one map e^a z + b e^a (e^a - 1)/a z^2 + ...
  const double a = kLn2;
  const double b = a / (std::exp(a) * (std::exp(a) - 1.0));
  CHECK(std::abs(x[0].coeff(Exponent{1}) - a) <= 1e-12);
  CHECK(std::abs(x[0].coeff(Exponent{2}) - b) <= 1e-9);
  CHECK(distance(exp_flow(x, 1.0), u) <= 1e-12);

  Matrix lin(2, 2);
  lin << 2.0, 0.0, 0.7, 0.5;
  const auto xl = log_transform(Transformation::linear(lin, 5));
  CHECK(distance(xl.as_map(), Transformation::linear(mat_log(lin), 5)) <= 1e-14);

  CHECK(max_norm(log_transform(Transformation::identity(3, 5)).as_map()) == 0.0);

  try {
    log_transform(fixtures::example1());
    FAIL("expected an obstruction");
  } catch (const ObstructionError& e) {
    CHECK(e.obstruction().degree == 7);
    CHECK(e.obstruction().monomial == Exponent{7});
    REQUIRE(e.obstruction().witness.has_value());
    CHECK(e.obstruction().witness->k == -1);
  }
}

TEST_CASE("log_transform reports non-unique degrees for a consistent singular system") {
  // The linear map e^{i pi/3} z is resonant at degree 7 but has nothing to
  // solve there.
  const Matrix u = Matrix::Constant(1, 1, std::exp(Complex(0.0, pi / 3.0)));
  const auto result = log_transform_detailed(Transformation::linear(u, 8));
  CHECK(result.non_unique_degrees == std::vector<int>{7});
  CHECK(distance(exp_flow(result.field, 1.0), Transformation::linear(u, 8)) <= 1e-12);
}

TEST_CASE("log and exp are inverse on non-resonant maps") {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 2;
    const auto u = oracle::random_nonresonant(n, 7, 0.5, rng);
    const auto x = log_transform(u);
    CHECK(distance(exp_flow(x, 1.0), u) <= 1e-8 * std::max(1.0, max_norm(u)));
    const auto back = log_transform(exp_flow(x, 1.0));
    CHECK(distance(back, x) <= 1e-7 * std::max(1.0, max_norm(x.as_map())));
  }
}

TEST_CASE("diagonal linear parts give the closed-form divisors") {
  std::mt19937_64 rng(58);
  std::uniform_real_distribution<double> e(-1.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3;
    std::vector<Complex> mu;
    Matrix b = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      mu.emplace_back(e(rng), trial % 2 ? e(rng) : 0.0);
      b(j, j) = mu.back();
    }
    for (int d = 2; d <= 4; ++d) {
      const Matrix phi = log_degree_operator(b, d);
      const auto mons = monomials_of_degree(n, d);
      Matrix expect = Matrix::Zero(phi.rows(), phi.cols());
      for (int s = 0; s < n; ++s) {
        for (std::size_t q = 0; q < mons.size(); ++q) {
          Complex dot = 0.0;
          for (int j = 0; j < n; ++j) dot += static_cast<double>(mons[q][j]) * mu[static_cast<std::size_t>(j)];
          const Complex gap = dot - mu[static_cast<std::size_t>(s)];
          const auto at = static_cast<Eigen::Index>(s * mons.size() + q);
          expect(at, at) = std::abs(gap) < 1e-12 ? std::exp(mu[static_cast<std::size_t>(s)])
                                                 : (std::exp(dot) - std::exp(mu[static_cast<std::size_t>(s)])) / gap;
        }
      }
      CHECK(max_abs(phi - expect) <= 1e-8);
    }
  }
}

TEST_CASE("the degree operator is the exact linearization of the flow") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> e(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 2;
    const int d = 2 + trial % 3;
    Matrix b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) b(i, j) = 0.5 * e(rng);
    }
    const Matrix phi = log_degree_operator(b, d);
    Vector w(phi.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = e(rng);
    const VectorField base = VectorField::linear(b, d);
    const VectorField moved = add(base, degree_field(n, d, d, w));
    const Vector diff = degree_vector(exp_flow(moved, 1.0), d) - degree_vector(exp_flow(base, 1.0), d);
    CHECK((phi * w - diff).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("obstructions match obstructive resonances") {
  std::vector<Transformation> maps{fixtures::example1(), fixtures::example1(10)};
  for (int m : {2, 4, 6}) {
    const auto fam = fixtures::example2_family(m, m + 2);
    maps.push_back(fam.map);
  }
  for (const auto& u : maps) {
    const auto lambda = eigenvalues(u.linear_part());
    const auto report = find_resonances(lambda, u.order());
    std::vector<Obstruction> obstructions;
    try {
      log_transform(u);
    } catch (const ObstructionError& e) {
      obstructions.push_back(e.obstruction());
    } catch (const BranchCut&) {
      // -I has no principal logarithm; the root solver still applies.
    }
    for (const auto& b : functional_root_all_branches(u, 2)) {
      if (!b.ok()) obstructions.push_back(std::get<Obstruction>(b.result));
    }
    CHECK(!obstructions.empty());
    for (const auto& ob : obstructions) {
      REQUIRE(ob.witness.has_value());
      CHECK(ob.witness->obstructive);
      CHECK(ob.witness->m.degree() == ob.degree);
      bool listed = false;
      for (const auto& w : report.witnesses) listed = listed || (w == *ob.witness);
      CHECK(listed);
    }
  }
}

TEST_CASE("maps without obstructive resonances have logarithms") {
  // Non-obstructive resonance lambda_2 = lambda_1^2 with a generic tail.
  std::mt19937_64 rng(60);
  Matrix lin = Matrix::Zero(2, 2);
  lin(0, 0) = 2.0;
  lin(1, 1) = 4.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto u = random_transformation(lin, 6, 0.5, rng);
    REQUIRE(!find_resonances(eigenvalues(lin), 6).has_obstructive());
    const auto x = log_transform(u);
    CHECK(distance(exp_flow(x, 1.0), u) <= 1e-8 * std::max(1.0, max_norm(u)));
  }
}

TEST_CASE("functional_root examples") {
  for (int branch : {0, 1}) {
    const auto r = functional_root_all_branches(fixtures::example1(), 2);
    REQUIRE(r.size() == 2);
    const auto& ob = std::get<Obstruction>(r[static_cast<std::size_t>(branch)].result);
    CHECK(ob.degree == 7);
    CHECK(ob.component == 0);
    CHECK(ob.monomial == Exponent{7});
    CHECK(std::abs(ob.divisor) < 1e-9);
    CHECK(std::abs(ob.residual - 1.0) < 1e-9);
    REQUIRE(ob.solved_prefix.has_value());
    CHECK(oracle::max_coeff_in_degrees(*ob.solved_prefix, 2, 6) < 1e-9);
    // The divisor is c1 (1 + c1^6) for the branch's linear coefficient c1.
    const Complex c1 = ob.solved_prefix->linear_part()(0, 0);
    CHECK(std::abs(c1 * (1.0 + std::pow(c1, 6))) < 1e-9);
  }

  const auto u = map("vars: z; order: 6\nz -> 2*z + z^2");
  const auto g = functional_root(u, 2, {0});
  CHECK(std::abs(c(g, 0, {1}) - std::sqrt(2.0)) <= 1e-15);
  CHECK(std::abs(c(g, 0, {2}) - 1.0 / (2.0 + std::sqrt(2.0))) <= 1e-9);
  CHECK(distance(compose(g, g), u) <= 1e-12);
  const Matrix psi = root_degree_operator(Matrix::Constant(1, 1, std::sqrt(2.0)), 2, 2);
  CHECK(std::abs(psi(0, 0) - (std::sqrt(2.0) + 2.0)) <= 1e-14);

  CHECK(functional_root(Transformation::identity(2, 5), 3, {0, 0}) == Transformation::identity(2, 5));

  for (int m : {2, 4}) {
    const auto branches = functional_root_all_branches(fixtures::example2(m, m + 3), 2);
    CHECK(branches.size() == 2);
    for (const auto& b : branches) {
      REQUIRE(!b.ok());
      const auto& ob = std::get<Obstruction>(b.result);
      CHECK(ob.degree == m + 1);
      CHECK(oracle::max_coeff_in_degrees(*ob.solved_prefix, 2, m) <= 1e-9);
    }
  }
}

TEST_CASE("all branches of simple roots") {
  const auto u = map("vars: z; order: 5\nz -> 2*z + z^2");
  const auto branches = functional_root_all_branches(u, 2);
  REQUIRE(branches.size() == 2);
  for (const auto& b : branches) {
    REQUIRE(b.ok());
    const auto& g = std::get<Transformation>(b.result);
    CHECK(std::abs(std::abs(c(g, 0, {1})) - std::sqrt(2.0)) <= 1e-15);
    CHECK(distance(compose(g, g), u) <= 1e-12);
  }
  // Order matching for the negative branch: g = -sqrt2 z + c z^2 gives
  // c (c1 + c1^2) = 1 with c1 = -sqrt2.
  const auto& neg = std::get<Transformation>(branches[1].result);
  CHECK(std::abs(c(neg, 0, {2}) - 1.0 / (2.0 - std::sqrt(2.0))) <= 1e-9);

  const auto four = functional_root_all_branches(map("vars: z; order: 4\nz -> 4*z"), 2);
  REQUIRE(four.size() == 2);
  CHECK(std::get<Transformation>(four[0].result) == map("vars: z; order: 4\nz -> 2*z"));
  CHECK(std::get<Transformation>(four[1].result) == map("vars: z; order: 4\nz -> -2*z"));
}

TEST_CASE("roots compose back to the map") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + trial % 2;
    const int k = 2 + trial % 3;
    const auto u = oracle::random_nonresonant(n, 6, 0.5, rng);
    const auto g = functional_root(u, k, BranchChoice(static_cast<std::size_t>(n), 0));
    CHECK(distance(compose_power(g, k), u) <= 1e-8 * std::max(1.0, max_norm(u)));
  }
}

TEST_CASE("iterate examples") {
  const auto u = map("vars: z; order: 6\nz -> 2*z + z^2");
  CHECK(distance(iterate(u, 1.0), u) <= 1e-9);
  CHECK(iterate(u, 0.0) == Transformation::identity(1, 6));
  CHECK(distance(iterate(u, 0.5), functional_root(u, 2, {0})) <= 1e-8);

  Matrix lin(2, 2);
  lin << 1.5, 0.0, -0.4, 0.8;
  for (double t : {-1.0, 0.25, 2.5}) {
    CHECK(distance(iterate(Transformation::linear(lin, 4), t), Transformation::linear(mat_power(lin, t), 4)) <= 1e-12);
  }
  CHECK_THROWS_AS(iterate(fixtures::example1(), 0.5), ObstructionError);
}

TEST_CASE("divergence-free flows preserve volume") {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> time(-1.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const auto x = oracle::random_hamiltonian_field(6, 0.5, rng);
    const auto f = exp_flow(x, time(rng));
    const Series det = jacobian_det(f);
    CHECK(max_norm((det - Series::constant(2, 6, 1.0)).truncated(5)) <= 1e-7);
  }
}
