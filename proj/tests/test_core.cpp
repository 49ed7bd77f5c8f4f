#include "doctest.h"

#include "eqcont/core.hpp"
#include "eqcont/discretization.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace eqc;

namespace {

constexpr double pi = std::numbers::pi;

ProblemInstance quadratic(const Mat& a, const Vec& b) {
  ProblemInstance p;
  p.name = "quadratic";
  p.n = a.rows();
  p.functional = [a, b](const Vec& x, double l) { return 0.5 * x.dot(a * x) - l * b.dot(x); };
  p.gradient = [a, b](const Vec& x, double l) { return Vec(a * x - l * b); };
  p.linearization = [a](const Vec&, double) { return a; };
  p.gram = GramPair::scaled_identity(a.rows(), 1.0);
  p.group = GroupModel::trivial();
  return p;
}

// Ginzburg-Landau loop w: S^1 -> R^2 stored as (re, im),
//   f = int 1/2 |w'|^2 + 1/4 (|w|^2 - 1 - lambda)^2 + tilt * lambda * im(w).
// Invariant under translation and phase rotation when tilt = 0.
ProblemInstance ginzburg_landau(Index n, double tilt) {
  const Grid g = make_grid(n);
  const Mat d2 = second_derivative_matrix(g, Scheme::Spectral);
  const Mat d1 = first_derivative_matrix(g, Scheme::Spectral);
  const double h = g.spacing();
  ProblemInstance p;
  p.name = "ginzburg-landau";
  p.n = 2 * n;
  p.functional = [=](const Vec& x, double l) {
    const Vec re = x.head(n), im = x.tail(n);
    const double kinetic = -0.5 * (re.dot(d2 * re) + im.dot(d2 * im));
    const Vec rho = re.array().square() + im.array().square() - 1.0 - l;
    return h * (kinetic + 0.25 * rho.squaredNorm() + tilt * l * im.sum());
  };
  p.gradient = [=](const Vec& x, double l) {
    const Vec re = x.head(n), im = x.tail(n);
    const Vec rho = re.array().square() + im.array().square() - 1.0 - l;
    Vec out(2 * n);
    out.head(n) = -d2 * re + Vec(rho.array() * re.array());
    out.tail(n) = -d2 * im + Vec(rho.array() * im.array()) + Vec::Constant(n, tilt * l);
    return out;
  };
  p.gram = GramPair::scaled_identity(2 * n, h);
  p.group.dim = 2;
  p.group.orbit_tangent = [=](const Vec& x) {
    Mat b(2 * n, 2);
    b.col(0) << d1 * x.head(n), d1 * x.tail(n);
    b.col(1) << -x.tail(n), x.head(n);
    return b;
  };
  p.group.local_action = [=](const Vec& gv, const Vec& x) -> std::optional<Vec> {
    const Vec s = circular_shift(x, gv[0], g);
    const double c = std::cos(gv[1]), sn = std::sin(gv[1]);
    Vec out(2 * n);
    out.head(n) = c * s.head(n) - sn * s.tail(n);
    out.tail(n) = sn * s.head(n) + c * s.tail(n);
    return out;
  };
  return p;
}

Vec constant_loop(Index n, double radius, double phase) {
  Vec x(2 * n);
  x.head(n).setConstant(radius * std::cos(phase));
  x.tail(n).setConstant(radius * std::sin(phase));
  return x;
}

}  // namespace

TEST_CASE("kernel_basis finds the constants for -D2") {
  const Grid g = make_grid(16);
  const Mat l = -second_derivative_matrix(g, Scheme::Spectral);
  const KernelResult k = kernel_basis(l, GramPair::scaled_identity(16, g.spacing()));
  REQUIRE(k.dim() == 1);
  const Vec v = k.basis.col(0);
  CHECK((v.array() - v[0]).abs().maxCoeff() <= 1e-10);
  CHECK(std::abs(g.spacing() * v.squaredNorm() - 1.0) <= 1e-12);
}

TEST_CASE("kernel_basis of -D2 - I spans cos and sin") {
  const Grid g = make_grid(32);
  const Mat l = -second_derivative_matrix(g, Scheme::Spectral) - Mat::Identity(32, 32);
  const GramPair gram = GramPair::scaled_identity(32, g.spacing());
  const KernelResult k = kernel_basis(l, gram);
  REQUIRE(k.dim() == 2);
  Mat expected(32, 2);
  for (Index j = 0; j < 32; ++j) {
    expected(j, 0) = std::cos(g.node(j));
    expected(j, 1) = std::sin(g.node(j));
  }
  CHECK(principal_angle(k.basis, expected, gram) <= 1e-8);
}

TEST_CASE("kernel_basis is empty for an invertible operator and flags ambiguity") {
  Mat a = Mat::Identity(4, 4);
  a(3, 3) = 3.0;
  CHECK(kernel_basis(a, GramPair::scaled_identity(4, 1.0)).dim() == 0);
  Mat near = Mat::Identity(3, 3);
  near(2, 2) = 2e-8;
  CHECK_THROWS_AS(kernel_basis(near, GramPair::scaled_identity(3, 1.0)), Error);
  try {
    kernel_basis(near, GramPair::scaled_identity(3, 1.0));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AmbiguousKernel);
  }
}

TEST_CASE("kernel_basis respects a non-diagonal mass matrix") {
  Mat m(3, 3);
  m << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 3;
  GramPair gram;
  gram.mass = m;
  gram.pairing = m;
  Vec v(3);
  v << 1, -2, 0.5;
  Mat l = Mat::Identity(3, 3) - v * v.transpose() * m / v.dot(m * v);
  const KernelResult k = kernel_basis(l, gram);
  REQUIRE(k.dim() == 1);
  CHECK(std::abs(gram.inner(k.basis.col(0), k.basis.col(0)) - 1.0) <= 1e-12);
  CHECK(principal_angle(k.basis, v, gram) <= 1e-10);
}

TEST_CASE("principal_angle recovers a known angle") {
  const GramPair gram = GramPair::scaled_identity(3, 1.0);
  for (double theta : {0.0, 0.1, 0.7, 1.5}) {
    Vec a(3), b(3);
    a << 1, 0, 0;
    b << std::cos(theta), std::sin(theta), 0;
    CHECK(principal_angle(a, b, gram) == doctest::Approx(theta).epsilon(1e-10));
  }
  CHECK(principal_angle(Mat(3, 1), Mat(3, 2), gram) == doctest::Approx(pi / 2));
}

TEST_CASE("effective_orbit drops isotropic and dependent generators in order") {
  Mat b(3, 3);
  b << 0, 1, 2, 0, 1, 2, 0, 0, 0;
  const OrbitRank r = effective_orbit(b, GramPair::scaled_identity(3, 1.0));
  REQUIRE(r.rank() == 1);
  CHECK(r.generators[0] == 1);
}

TEST_CASE("trivial group: verdicts follow the kernel") {
  const Mat a = Vec(Vec::LinSpaced(4, 1.0, 4.0)).asDiagonal();
  const Vec b = Vec::Ones(4);
  ProblemInstance p = quadratic(a, b);
  const SliceBasis s = build_slice(p, Vec::Zero(4), 0.0);
  CHECK(s.report.verdict == Verdict::Nondegenerate);
  CHECK(s.effective_rank() == 0);

  Mat singular = a;
  singular(0, 0) = 0.0;
  const KernelResult k = kernel_basis(singular, p.gram);
  CHECK(nondegeneracy_check(k, Mat(4, 0), p.gram).verdict == Verdict::Degenerate);
  ProblemInstance q = quadratic(singular, b);
  CHECK_THROWS_AS(build_slice(q, Vec::Zero(4), 0.0), Error);
}

TEST_CASE("quadratic continuation follows x = lambda A^-1 b") {
  Mat a(3, 3);
  a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  Vec b(3);
  b << 1, -1, 2;
  ProblemInstance p = quadratic(a, b);
  p.linearization = nullptr;  // exercise the finite-difference path
  const Branch br = continue_branch(p, Vec::Zero(3), 0.0, 1.0);
  CHECK(br.status == BranchStatus::Completed);
  CHECK(br.samples.back().lambda == 1.0);
  const Vec exact = a.ldlt().solve(b);
  for (const BranchSample& s : br.samples)
    CHECK((s.x - s.lambda * exact).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("continue_branch rejects a non-critical start") {
  ProblemInstance p = quadratic(Mat::Identity(2, 2), Vec::Ones(2));
  CHECK_THROWS_AS(continue_branch(p, Vec::Ones(2), 0.0, 1.0), Error);
}

TEST_CASE("Ginzburg-Landau loop: translation isotropy is removed") {
  const Index n = 16;
  ProblemInstance p = ginzburg_landau(n, 0.0);
  const Vec x0 = constant_loop(n, 1.0, 0.4);
  CHECK(p.gradient(x0, 0.0).lpNorm<Eigen::Infinity>() <= 1e-13);
  const SliceBasis s = build_slice(p, x0, 0.0);
  CHECK(s.report.kernel_dim == 1);
  CHECK(s.report.orbit_rank == 1);
  CHECK(s.report.verdict == Verdict::Nondegenerate);
  CHECK(s.rank_warning);
  REQUIRE(s.generators.size() == 1);
  CHECK(s.generators[0] == 1);
  CHECK(s.s_basis.cols() == 2 * n - 1);
  // S is M-orthonormal and M-orthogonal to Y
  const Mat gram_s = s.s_basis.transpose() * p.gram.mass * s.s_basis;
  CHECK((gram_s - Mat::Identity(2 * n - 1, 2 * n - 1)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((s.s_basis.transpose() * p.gram.mass * s.y_basis).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Ginzburg-Landau continuation tracks |w| = sqrt(1 + lambda)") {
  const Index n = 16;
  ProblemInstance p = ginzburg_landau(n, 0.0);
  const Branch br = continue_branch(p, constant_loop(n, 1.0, 0.4), 0.0, 0.5);
  REQUIRE(br.status == BranchStatus::Completed);
  for (const BranchSample& s : br.samples) {
    CHECK((s.x - constant_loop(n, std::sqrt(1.0 + s.lambda), 0.4)).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(s.multipliers.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(s.kernel_dim == 1);
  }
}

TEST_CASE("symmetry-breaking tilt is reported as an obstruction with a = -lambda") {
  const Index n = 16;
  ProblemInstance p = ginzburg_landau(n, 1.0);
  const Vec x0 = constant_loop(n, 1.0, 0.0);
  const SliceBasis s = build_slice(p, x0, 0.0);
  const BorderedSolution sol = solve_bordered(p, s, 0.2, x0);
  // Y is the phase generator i*w0 = (0, 1); the tilt is absorbed entirely by it.
  REQUIRE(sol.multipliers.size() == 1);
  CHECK(sol.multipliers[0] == doctest::Approx(-0.2).epsilon(1e-9));
  const Branch br = continue_branch(p, x0, 0.0, 0.5);
  CHECK(br.status == BranchStatus::Obstructed);
  CHECK(!br.message.empty());
}

TEST_CASE("slice_project undoes a phase rotation and the winding degree is one") {
  const Index n = 16;
  ProblemInstance p = ginzburg_landau(n, 0.0);
  const Vec x0 = constant_loop(n, 1.0, 0.0);
  const SliceBasis s = build_slice(p, x0, 0.0);
  const Vec moved = constant_loop(n, 1.0, 0.3);
  const ProjectionResult pr = slice_project(p, moved, s);
  CHECK(pr.g[1] == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(pr.g[0] == 0.0);
  CHECK(slice_residual(p, pr.x_on_slice, s, Vec::Zero(1)).norm() <= 1e-10);
  CHECK(std::abs(winding_degree(p, x0, s, 0.5)) == 1);
}

TEST_CASE("winding degree in two dimensions for a translation action") {
  ProblemInstance p;
  p.n = 2;
  p.functional = [](const Vec&, double) { return 0.0; };
  p.gradient = [](const Vec& x, double) { return Vec(Vec::Zero(x.size())); };
  p.gram = GramPair::scaled_identity(2, 1.0);
  p.group.dim = 2;
  p.group.orbit_tangent = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
  p.group.local_action = [](const Vec& g, const Vec& x) -> std::optional<Vec> { return x + g; };
  const SliceBasis s = build_slice(p, Vec::Zero(2), 0.0);
  CHECK(s.effective_rank() == 2);
  CHECK(winding_degree(p, Vec::Zero(2), s, 0.3) == 1);
  Vec off(2);
  off << 1.0, 0.0;
  CHECK(winding_degree(p, off, s, 0.3) == 0);
}

TEST_CASE("Ginzburg-Landau gradient and equivariance identities on random smooth states") {
  const Index n = 32;
  ProblemInstance p = ginzburg_landau(n, 0.0);
  const Grid g = make_grid(n);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  auto smooth = [&]() {
    Vec x(2 * n);
    for (int c = 0; c < 2; ++c) {
      const double a0 = gauss(rng), a1 = gauss(rng), b1 = gauss(rng), a3 = 0.3 * gauss(rng);
      for (Index j = 0; j < n; ++j) {
        const double t = g.node(j);
        x[c * n + j] = a0 + a1 * std::cos(t) + b1 * std::sin(t) + a3 * std::cos(3 * t);
      }
    }
    return x;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = smooth(), v = smooth();
    CHECK(gradient_consistency(p, x, v, 0.2) <= 1e-6);
    CHECK(equivariance_residual(p, x, 0.2) <= 1e-10);
  }
}
