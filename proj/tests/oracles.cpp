#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <boost/numeric/odeint.hpp>

namespace oracle {

namespace {

using ffg::Exponent;
using ffg::Series;

// Dense truncated polynomials in n variables up to total degree N.
struct JetSpace {
  int n = 0;
  int order = 0;
  std::vector<std::vector<int>> monomials;  // all degrees 0..order
  std::map<std::vector<int>, int> index;
  struct Pair {
    int a, b, c;
  };
  std::vector<Pair> products;  // monomial a * monomial b = monomial c

  JetSpace(int n_, int order_) : n(n_), order(order_) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    enumerate(0, order, e);
    for (std::size_t i = 0; i < monomials.size(); ++i) index[monomials[i]] = static_cast<int>(i);
    for (std::size_t a = 0; a < monomials.size(); ++a) {
      for (std::size_t b = 0; b < monomials.size(); ++b) {
        std::vector<int> sum(static_cast<std::size_t>(n));
        int deg = 0;
        for (int k = 0; k < n; ++k) {
          sum[static_cast<std::size_t>(k)] = monomials[a][static_cast<std::size_t>(k)] + monomials[b][static_cast<std::size_t>(k)];
          deg += sum[static_cast<std::size_t>(k)];
        }
        if (deg <= order) products.push_back({static_cast<int>(a), static_cast<int>(b), index.at(sum)});
      }
    }
  }

  void enumerate(int var, int budget, std::vector<int>& e) {
    if (var == n) {
      monomials.push_back(e);
      return;
    }
    for (int k = 0; k <= budget; ++k) {
      e[static_cast<std::size_t>(var)] = k;
      enumerate(var + 1, budget - k, e);
    }
    e[static_cast<std::size_t>(var)] = 0;
  }

  std::size_t size() const { return monomials.size(); }

  std::vector<Complex> mul(const std::vector<Complex>& x, const std::vector<Complex>& y) const {
    std::vector<Complex> r(size());
    for (const auto& p : products) {
      r[static_cast<std::size_t>(p.c)] += x[static_cast<std::size_t>(p.a)] * y[static_cast<std::size_t>(p.b)];
    }
    return r;
  }
};

}  // namespace

ffg::Transformation ode_jet_flow(const ffg::VectorField& x, double t, double eps) {
  const int n = x.dim();
  const int order = x.order();
  const JetSpace space(n, order);
  const std::size_t m = space.size();

  // Field terms as (component, coefficient, exponent vector).
  struct Term {
    int component;
    Complex c;
    std::vector<int> e;
  };
  std::vector<Term> terms;
  for (int i = 0; i < n; ++i) {
    for (const auto& [e, c] : x[i].terms()) terms.push_back({i, c, e.to_vector()});
  }

  using State = std::vector<double>;
  auto unpack = [&](const State& s, int i) {
    std::vector<Complex> v(m);
    for (std::size_t q = 0; q < m; ++q) {
      const std::size_t at = 2 * (static_cast<std::size_t>(i) * m + q);
      v[q] = Complex(s[at], s[at + 1]);
    }
    return v;
  };

  auto rhs = [&](const State& s, State& ds, double) {
    std::vector<std::vector<std::vector<Complex>>> powers(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto& row = powers[static_cast<std::size_t>(i)];
      std::vector<Complex> one(m);
      one[0] = 1.0;
      row.push_back(one);
      const auto phi = unpack(s, i);
      for (int k = 1; k <= order; ++k) row.push_back(space.mul(row.back(), phi));
    }
    std::vector<std::vector<Complex>> out(static_cast<std::size_t>(n), std::vector<Complex>(m));
    for (const auto& term : terms) {
      std::vector<Complex> prod(m);
      prod[0] = term.c;
      for (int i = 0; i < n; ++i) {
        const int p = term.e[static_cast<std::size_t>(i)];
        if (p > 0) prod = space.mul(prod, powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)]);
      }
      auto& acc = out[static_cast<std::size_t>(term.component)];
      for (std::size_t q = 0; q < m; ++q) acc[q] += prod[q];
    }
    for (int i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < m; ++q) {
        const std::size_t at = 2 * (static_cast<std::size_t>(i) * m + q);
        ds[at] = out[static_cast<std::size_t>(i)][q].real();
        ds[at + 1] = out[static_cast<std::size_t>(i)][q].imag();
      }
    }
  };

  State state(2 * static_cast<std::size_t>(n) * m, 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<int> unit(static_cast<std::size_t>(n), 0);
    unit[static_cast<std::size_t>(i)] = 1;
    state[2 * (static_cast<std::size_t>(i) * m + static_cast<std::size_t>(space.index.at(unit)))] = 1.0;
  }
  if (t != 0.0) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(eps, eps, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_adaptive(stepper, rhs, state, 0.0, t, t / 64.0);
  }

  std::vector<Series> comps;
  for (int i = 0; i < n; ++i) {
    Series s(n, order);
    const auto v = unpack(state, i);
    for (std::size_t q = 1; q < m; ++q) s.set_coeff(Exponent(std::span<const int>(space.monomials[q])), v[q]);
    comps.push_back(std::move(s));
  }
  return ffg::Transformation(std::move(comps));
}

std::vector<std::pair<int, std::vector<int>>> brute_force_resonances(const std::vector<Complex>& lambda,
                                                                     int max_degree, double tol) {
  const int n = static_cast<int>(lambda.size());
  std::vector<std::pair<int, std::vector<int>>> found;
  std::vector<int> m(static_cast<std::size_t>(n), 0);
  while (true) {
    int deg = 0;
    for (int v : m) deg += v;
    if (deg >= 2 && deg <= max_degree) {
      Complex value = 1.0;
      for (int j = 0; j < n; ++j) {
        for (int r = 0; r < m[static_cast<std::size_t>(j)]; ++r) value *= lambda[static_cast<std::size_t>(j)];
      }
      for (int s = 0; s < n; ++s) {
        const Complex ls = lambda[static_cast<std::size_t>(s)];
        if (std::abs(ls - value) <= tol * std::abs(ls)) found.emplace_back(s, m);
      }
    }
    int j = 0;
    while (j < n && ++m[static_cast<std::size_t>(j)] > max_degree) m[static_cast<std::size_t>(j++)] = 0;
    if (j == n) break;
  }
  std::sort(found.begin(), found.end());
  return found;
}

double resonance_margin(const std::vector<Complex>& lambda, int max_degree) {
  const int n = static_cast<int>(lambda.size());
  double margin = std::numeric_limits<double>::infinity();
  std::vector<int> m(static_cast<std::size_t>(n), 0);
  while (true) {
    int deg = 0;
    for (int v : m) deg += v;
    if (deg >= 2 && deg <= max_degree) {
      Complex value = 1.0;
      for (int j = 0; j < n; ++j) value *= std::pow(lambda[static_cast<std::size_t>(j)], m[static_cast<std::size_t>(j)]);
      for (int s = 0; s < n; ++s) {
        const Complex ls = lambda[static_cast<std::size_t>(s)];
        margin = std::min(margin, std::abs(ls - value) / std::abs(ls));
      }
    }
    int j = 0;
    while (j < n && ++m[static_cast<std::size_t>(j)] > max_degree) m[static_cast<std::size_t>(j++)] = 0;
    if (j == n) break;
  }
  return margin;
}

ffg::Transformation random_nonresonant(int n, int order, double box, std::mt19937_64& rng, double margin) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> logr(-0.7, 0.7);
  std::uniform_real_distribution<double> angle(-2.5, 2.5);
  while (true) {
    ffg::Matrix lin(n, n);
    std::vector<Complex> lambda;
    if (n == 1) {
      const bool complex_case = unit(rng) > 0.0;
      const Complex l = std::exp(Complex(logr(rng), complex_case ? angle(rng) : 0.0));
      lin(0, 0) = l;
      lambda = {l};
    } else {
      ffg::Matrix d = ffg::Matrix::Zero(n, n);
      int j = 0;
      if (n >= 2 && unit(rng) > 0.0) {
        // Rotation-scaling block r [[c, -s], [s, c]] with eigenvalues r e^{+-i theta}.
        const double r = std::exp(logr(rng));
        const double th = angle(rng);
        d(0, 0) = r * std::cos(th);
        d(0, 1) = -r * std::sin(th);
        d(1, 0) = r * std::sin(th);
        d(1, 1) = r * std::cos(th);
        lambda.push_back(std::polar(r, th));
        lambda.push_back(std::polar(r, -th));
        j = 2;
      }
      for (; j < n; ++j) {
        const double v = std::exp(logr(rng));
        d(j, j) = v;
        lambda.push_back(v);
      }
      ffg::Matrix p = ffg::Matrix::Identity(n, n);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) p(a, b) += 0.4 * unit(rng);
      }
      if (std::abs(p.determinant()) < 0.3) continue;
      lin = p * d * p.inverse();
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) lin(a, b) = lin(a, b).real();
      }
    }
    bool ok = resonance_margin(lambda, order) >= margin;
    for (const auto& l : lambda) ok = ok && std::abs(l - 1.0) >= margin;
    if (!ok) continue;
    return ffg::random_transformation(lin, order, box, rng);
  }
}

ffg::VectorField random_field(int n, int order, double lin_box, double box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lin(-lin_box, lin_box);
  std::uniform_real_distribution<double> tail(-box, box);
  const auto basis = ffg::monomial_basis(n, 1, order);
  std::vector<Series> comps;
  for (int i = 0; i < n; ++i) {
    Series s(n, order);
    for (const auto& e : basis) s.set_coeff(e, e.degree() == 1 ? lin(rng) : tail(rng));
    comps.push_back(std::move(s));
  }
  return ffg::VectorField(std::move(comps));
}

ffg::VectorField random_hamiltonian_field(int order, double box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-box, box);
  // H has degree 2..order+1; its gradient then has degree 1..order.
  Series h(2, order + 1);
  for (const auto& e : ffg::monomial_basis(2, 2, order + 1)) h.set_coeff(e, coeff(rng));
  const Series hx = ffg::derivative(h, 0).with_order(order);
  const Series hy = ffg::derivative(h, 1).with_order(order);
  return ffg::VectorField({hy, -hx});
}

double max_coeff_in_degrees(const ffg::Transformation& u, int lo, int hi) {
  double worst = 0.0;
  for (const auto& c : u.components()) {
    for (const auto& [e, v] : c.terms()) {
      if (e.degree() >= lo && e.degree() <= hi) worst = std::max(worst, std::abs(v));
    }
  }
  return worst;
}

}  // namespace oracle
