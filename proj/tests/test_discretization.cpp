#include "doctest.h"

#include "eqcont/discretization.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace eqc;

namespace {

constexpr double pi = std::numbers::pi;

Vec sample(const Grid& grid, double (*fn)(double)) {
  Vec v(grid.n());
  for (Index k = 0; k < grid.n(); ++k) v[k] = fn(grid.node(k));
  return v;
}

// Random trigonometric polynomial with modes |k| <= kmax (no Nyquist content).
Vec random_band_limited(const Grid& grid, int kmax, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vec v = Vec::Constant(grid.n(), gauss(rng));
  for (int k = 1; k <= kmax; ++k) {
    const double a = gauss(rng), b = gauss(rng);
    for (Index j = 0; j < grid.n(); ++j) {
      const double t = 2.0 * pi * grid.node(j) / grid.period();
      v[j] += a * std::cos(k * t) + b * std::sin(k * t);
    }
  }
  return v;
}

}  // namespace

TEST_CASE("make_grid lays out exact uniform nodes and trapezoid weights") {
  const Grid g = make_grid(8, 2.0 * pi, 1);
  CHECK(g.spacing() == doctest::Approx(pi / 4).epsilon(1e-15));
  for (Index k = 0; k < 8; ++k) CHECK(g.node(k) == k * (2.0 * pi) / 8.0);
  CHECK(g.nodes()[7] == doctest::Approx(7 * pi / 4));

  const Grid unit = make_grid(16, 1.0, 1);
  CHECK(unit.spacing() == 1.0 / 16.0);
  CHECK((unit.weights().array() == 1.0 / 16.0).all());

  const Grid torus = make_grid(8, 2.0 * pi, 2);
  CHECK(torus.size() == 64);
  CHECK(torus.weight() == doctest::Approx(pi * pi / 16));
}

TEST_CASE("make_grid rejects odd or tiny sizes") {
  CHECK_THROWS_AS(make_grid(9), Error);
  CHECK_THROWS_AS(make_grid(6), Error);
  CHECK_THROWS_AS(make_grid(16, -1.0), Error);
  try {
    make_grid(33);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Sizing);
  }
}

TEST_CASE("spectral derivatives are exact on band-limited data") {
  const Grid g = make_grid(32);
  const DiffOperators ops = derivative_matrices(g, Scheme::Spectral);
  const Vec s = sample(g, [](double t) { return std::sin(t); });
  const Vec c = sample(g, [](double t) { return std::cos(t); });
  CHECK((ops.d1 * s - c).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((ops.d2 * c + c).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((ops.d1 * Vec::Ones(32)).lpNorm<Eigen::Infinity>() <= 1e-13);

  // every Fourier mode below Nyquist
  for (int k = 1; k < 16; ++k) {
    Vec v(32), dv(32);
    for (Index j = 0; j < 32; ++j) {
      v[j] = std::cos(k * g.node(j));
      dv[j] = -k * std::sin(k * g.node(j));
    }
    CHECK((ops.d1 * v - dv).lpNorm<Eigen::Infinity>() <= 1e-12 * k);
  }
}

TEST_CASE("spectral derivatives honour a non-2pi period") {
  const Grid g = make_grid(16, 3.0, 1);
  const DiffOperators ops = derivative_matrices(g);
  const double w = 2.0 * pi / 3.0;
  Vec v(16), dv(16), ddv(16);
  for (Index j = 0; j < 16; ++j) {
    v[j] = std::sin(2 * w * g.node(j));
    dv[j] = 2 * w * std::cos(2 * w * g.node(j));
    ddv[j] = -4 * w * w * v[j];
  }
  CHECK((ops.d1 * v - dv).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((ops.d2 * v - ddv).lpNorm<Eigen::Infinity>() <= 1e-11);
}

TEST_CASE("fourth-order differences converge at rate 16 per halving") {
  auto error_at = [](Index n) {
    const Grid g = make_grid(n);
    const Mat d1 = first_derivative_matrix(g, Scheme::FourthOrder);
    Vec v(n), dv(n);
    for (Index j = 0; j < n; ++j) {
      v[j] = std::sin(g.node(j));
      dv[j] = std::cos(g.node(j));
    }
    return (d1 * v - dv).lpNorm<Eigen::Infinity>();
  };
  const double ratio = error_at(32) / error_at(64);
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("periodic trapezoid integrates trigonometric polynomials exactly") {
  const Grid g = make_grid(16);
  for (int k = 1; k < 16; ++k) {
    Vec c(16);
    for (Index j = 0; j < 16; ++j) c[j] = std::cos(k * g.node(j));
    CHECK(std::abs(g.integrate(c)) <= 1e-13);
  }
  Vec sq(16);
  for (Index j = 0; j < 16; ++j) sq[j] = std::pow(std::cos(3 * g.node(j)), 2);
  CHECK(std::abs(g.integrate(sq) - pi) <= 1e-13);
}

TEST_CASE("spectral D1 is skew-adjoint for the quadrature inner product") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  const Grid g = make_grid(64);
  const Mat d1 = first_derivative_matrix(g, Scheme::Spectral);
  for (int trial = 0; trial < 20; ++trial) {
    Vec u(64), v(64);
    for (Index j = 0; j < 64; ++j) {
      u[j] = gauss(rng);
      v[j] = gauss(rng);
    }
    const double h = g.spacing();
    CHECK(std::abs(h * (d1 * u).dot(v) + h * u.dot(d1 * v)) <= 1e-10);
  }
}

TEST_CASE("circular_shift: grid-aligned shifts permute, fractional shifts interpolate") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  const Grid g = make_grid(32);
  Vec v(32);
  for (Index j = 0; j < 32; ++j) v[j] = gauss(rng);

  const Vec one = circular_shift(v, g.spacing(), g);
  for (Index j = 0; j < 32; ++j) CHECK(one[j] == v[(j + 1) % 32]);
  CHECK(circular_shift(v, 0.0, g) == v);
  CHECK(circular_shift(v, 2.0 * pi, g) == v);

  const double half = 0.5 * g.spacing();
  const Vec s = circular_shift(sample(g, [](double t) { return std::sin(t); }), half, g);
  for (Index j = 0; j < 32; ++j) CHECK(std::abs(s[j] - std::sin(g.node(j) + half)) <= 1e-12);
}

TEST_CASE("circular_shift composes additively on band-limited vectors") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> shift(-1.0, 1.0);
  const Grid g = make_grid(32);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec v = random_band_limited(g, 10, rng);
    const double a = shift(rng), b = shift(rng);
    const Vec lhs = circular_shift(circular_shift(v, a, g), b, g);
    const Vec rhs = circular_shift(v, a + b, g);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-11);
  }
}

TEST_CASE("circular_shift acts componentwise on stacked vectors") {
  const Grid g = make_grid(16);
  Vec v(32);
  for (Index j = 0; j < 16; ++j) {
    v[j] = std::cos(g.node(j));
    v[16 + j] = std::sin(2 * g.node(j));
  }
  const Vec s = circular_shift(v, 0.3, g);
  for (Index j = 0; j < 16; ++j) {
    CHECK(std::abs(s[j] - std::cos(g.node(j) + 0.3)) <= 1e-12);
    CHECK(std::abs(s[16 + j] - std::sin(2 * (g.node(j) + 0.3))) <= 1e-12);
  }
  CHECK_THROWS_AS(circular_shift(Vec::Zero(17), 0.1, g), Error);
}

TEST_CASE("tensor operators on the 2-torus") {
  const Grid g = make_grid(16, 2.0 * pi, 2);
  const DiffOperators ops = derivative_matrices(g);
  Vec f(256), fx(256), fy(256), lap(256);
  for (Index j = 0; j < 16; ++j)
    for (Index i = 0; i < 16; ++i) {
      const double x = g.node(i), y = g.node(j);
      const Index k = i + 16 * j;
      f[k] = std::sin(x) * std::cos(2 * y);
      fx[k] = std::cos(x) * std::cos(2 * y);
      fy[k] = -2 * std::sin(x) * std::sin(2 * y);
      lap[k] = -5 * f[k];
    }
  CHECK((ops.dx * f - fx).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((ops.dy * f - fy).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((ops.laplacian * f - lap).lpNorm<Eigen::Infinity>() <= 1e-11);
  CHECK((ops.dxy * f - ops.dx * (ops.dy * f)).lpNorm<Eigen::Infinity>() <= 1e-11);
}

TEST_CASE("TrigInterpolant reproduces nodes and derivatives") {
  const Grid g = make_grid(16);
  const Vec v = sample(g, [](double t) { return std::cos(2 * t) + 0.5 * std::sin(t); });
  const TrigInterpolant p(g, v);
  for (Index j = 0; j < 16; ++j) CHECK(std::abs(p.value(g.node(j)) - v[j]) <= 1e-13);
  const double t = 0.123;
  CHECK(std::abs(p.value(t) - (std::cos(2 * t) + 0.5 * std::sin(t))) <= 1e-13);
  CHECK(std::abs(p.derivative(t) - (-2 * std::sin(2 * t) + 0.5 * std::cos(t))) <= 1e-12);
  CHECK(std::abs(p.second_derivative(t) - (-4 * std::cos(2 * t) - 0.5 * std::sin(t))) <= 1e-12);
}
