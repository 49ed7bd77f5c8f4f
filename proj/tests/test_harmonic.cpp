#include "doctest.h"

#include "eqcont/harmonic.hpp"
#include "eqcont/kernels.hpp"
#include "support/laplace_oracle.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace eqc;
using namespace eqc::harmonic;

namespace {

constexpr double pi = std::numbers::pi;

Grid torus_grid(Index n) { return make_grid(n, 2.0 * pi, 2); }

Index zero_eigenvalues(const Mat& sym, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
  return (eig.eigenvalues().array().abs() <= tol).count();
}

// Random trigonometric field with modes |k|, |l| <= 2.
Vec smooth_field(const Grid& g, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> gauss;
  const Index n = g.n();
  Vec v = Vec::Zero(n * n);
  for (int k = 0; k <= 2; ++k)
    for (int l = -2; l <= 2; ++l) {
      const double a = gauss(rng), b = gauss(rng);
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
          const double ph = k * g.node(i) + l * g.node(j);
          v[i + n * j] += scale * (a * std::cos(ph) + b * std::sin(ph));
        }
    }
  return v;
}

}  // namespace

TEST_CASE("dirichlet_energy closed forms") {
  const Grid g = torus_grid(16);
  const MetricField flat = metric_family("flat_torus", 0.0);
  CHECK(dirichlet_energy(circle_map(g, {1, 0}, flat)) == doctest::Approx(2 * pi * pi).epsilon(1e-13));
  CHECK(dirichlet_energy(circle_map(g, {1, 2}, flat)) == doctest::Approx(5 * 2 * pi * pi).epsilon(1e-13));
  CHECK(dirichlet_energy(constant_sphere_map(g, Vec3(0, 0, 1), flat)) == doctest::Approx(0.0));
  CHECK(dirichlet_energy(equator_map(g, {1, 0}, flat)) == doctest::Approx(2 * pi * pi).epsilon(1e-13));
  // conformal invariance of the energy in two dimensions
  CHECK(dirichlet_energy(circle_map(g, {1, 0}, metric_family("conformal_torus", 1.0, 0.3))) ==
        doctest::Approx(2 * pi * pi).epsilon(1e-13));
}

TEST_CASE("tension_field vanishes at harmonic maps and matches a perturbation") {
  const Grid g = torus_grid(16);
  const MetricField flat = metric_family("flat_torus", 0.0);
  CHECK(tension_field(circle_map(g, {2, -1}, flat)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(tension_field(equator_map(g, {1, 0}, flat)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(tension_field(equator_map(g, {1, 1}, flat)).cwiseAbs().maxCoeff() <= 1e-11);

  TorusMap m = circle_map(g, {1, 0}, flat);
  const double eps = 0.01;
  for (Index j = 0; j < 16; ++j)
    for (Index i = 0; i < 16; ++i) m.angle[i + 16 * j] = eps * std::sin(g.node(i));
  const Mat tau = tension_field(m);
  for (Index k = 0; k < 256; ++k) CHECK(std::abs(tau(k, 0) + m.angle[k]) <= 1e-12);
}

TEST_CASE("harmonic_jacobi: circle target is minus the weighted Laplacian") {
  const Grid g = torus_grid(12);
  const MetricField m = metric_family("warped_torus", 1.0, 0.2);
  const Mat j = harmonic_jacobi(circle_map(g, {1, 0}, m));
  CHECK((j - weighted_laplacian(g, m)).cwiseAbs().maxCoeff() == 0.0);
  const KernelResult k = kernel_basis(j, GramPair::scaled_identity(144, g.weight()));
  CHECK(k.dim() == 1);
  CHECK((j * target_killing_fields(circle_map(g, {1, 0}, m))).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("equator map: normal block is -Laplacian - 1 and the kernel has dimension 5") {
  const Index n = 12;
  const Grid g = torus_grid(n);
  const TorusMap eq = equator_map(g, {1, 0}, metric_family("flat_torus", 0.0));
  const Mat j = harmonic_jacobi(eq);
  const Index m = n * n;
  // E1 = e_z is the normal direction
  const Mat lap = derivative_matrices(g).laplacian;
  CHECK((j.topLeftCorner(m, m) - (-lap - Mat::Identity(m, m))).cwiseAbs().maxCoeff() <= 1e-10);
  // eigensolve oracle: -Lap - 1 has kernel {cos x, sin x, cos y, sin y}, the tangential block -Lap has constants
  CHECK(zero_eigenvalues(-lap - Mat::Identity(m, m), 1e-8) == 4);
  CHECK(zero_eigenvalues(j, 1e-8) == 5);
  CHECK(kernel_basis(j, GramPair::scaled_identity(2 * m, g.weight())).dim() == 5);
  // Killing variations are Jacobi fields; the axial one is a constant tangential field
  const Mat kill = target_killing_fields(eq);
  CHECK((j * kill).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(kill.col(2).head(m).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((kill.col(2).tail(m).array() - kill(m, 2)).abs().maxCoeff() <= 1e-14);
  CHECK(std::abs(kill(m, 2)) == doctest::Approx(1.0));
}

TEST_CASE("target Killing fields: isotropy at a constant map") {
  const Grid g = torus_grid(8);
  const Mat kill = target_killing_fields(constant_sphere_map(g, Vec3(0, 0, 1), metric_family("flat_torus", 0.0)));
  CHECK(kill.col(2).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(kill.col(0).cwiseAbs().maxCoeff() > 0.5);
}

TEST_CASE("energy is invariant under target rotations") {
  const Grid g = torus_grid(12);
  HarmonicSetup setup;
  setup.target = Target::Sphere;
  const ProblemInstance p = make_harmonic_problem(g, setup);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  Vec w(p.n);
  for (Index k = 0; k < p.n; ++k) w[k] = 0.1 * gauss(rng);
  const TorusMap map = map_from_state(g, setup, w, 0.7);
  const double e0 = dirichlet_energy(map);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.8, axis.normalized()).toRotationMatrix();
    TorusMap moved = map;
    moved.points = map.points * r.transpose();
    CHECK(std::abs(dirichlet_energy(moved) - e0) <= 1e-10);
    // the local action reproduces the rotated map
    const std::optional<Vec> acted = p.group.local_action(0.8 * axis.normalized(), w);
    REQUIRE(acted.has_value());
    CHECK((map_from_state(g, setup, *acted, 0.7).points - moved.points).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("sphere problem: analytic linearization vs finite differences") {
  const Grid g = torus_grid(8);
  HarmonicSetup setup;
  setup.target = Target::Sphere;
  setup.degree = {1, 1};
  const ProblemInstance p = make_harmonic_problem(g, setup);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss;
  for (double scale : {0.0, 0.05, 0.6}) {
    Vec w(p.n);
    for (Index k = 0; k < p.n; ++k) w[k] = scale * gauss(rng);
    const Mat exact = p.linearization(w, 0.5);
    const Mat fd = kernels::fd_jacobian_serial([&](const Vec& x) { return p.gradient(x, 0.5); }, w, 1e-6);
    CHECK((exact - fd).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + exact.cwiseAbs().maxCoeff()));
  }
  // at the harmonic equator map the linearization is the Jacobi operator
  const Vec zero = Vec::Zero(p.n);
  CHECK((p.linearization(zero, 0.0) - harmonic_jacobi(map_from_state(g, setup, zero, 0.0))).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("circle target continuation reproduces the dense weighted Laplace solve") {
  const Index n = 16;
  const Grid g = torus_grid(n);
  for (const std::string family : {"warped_torus", "conformal_torus"})
    for (const Eigen::Vector2i& deg : {Eigen::Vector2i(1, 0), Eigen::Vector2i(1, 1)}) {
      HarmonicSetup setup;
      setup.family = family;
      setup.eps = 0.3;
      setup.degree = deg;
      const ProblemInstance p = make_harmonic_problem(g, setup);
      StepPolicy policy;
      policy.steps = 4;
      const Branch br = continue_branch(p, Vec::Zero(n * n), 0.0, 1.0, policy);
      REQUIRE(br.status == BranchStatus::Completed);
      double moved = 0.0;
      for (const BranchSample& s : br.samples) {
        const Vec oracle = oracle::weighted_laplace(n, family, s.lambda, 0.3, deg);
        CHECK((s.x - oracle).lpNorm<Eigen::Infinity>() <= 1e-8);
        CHECK(s.multipliers.lpNorm<Eigen::Infinity>() <= 1e-10);
        moved = std::max(moved, s.x.lpNorm<Eigen::Infinity>());
      }
      // the conformal family leaves the harmonic map fixed; the warped one moves it
      if (family == "warped_torus")
        CHECK(moved > 1e-3);
      else
        CHECK(moved <= 1e-12);
    }
}

TEST_CASE("equator map into S2 is degenerate and continuation refuses to start") {
  const Grid g = torus_grid(12);
  HarmonicSetup setup;
  setup.target = Target::Sphere;
  const ProblemInstance p = make_harmonic_problem(g, setup);
  const Vec zero = Vec::Zero(p.n);
  CHECK(p.gradient(zero, 0.0).lpNorm<Eigen::Infinity>() <= 1e-12);
  const KernelResult k = kernel_basis(p.linearization(zero, 0.0), p.gram);
  const NondegeneracyReport rep = nondegeneracy_check(k, p.group.orbit_tangent(zero), p.gram);
  CHECK(rep.verdict == Verdict::Degenerate);
  CHECK(rep.kernel_dim == 5);
  CHECK(rep.orbit_rank == 3);
  try {
    continue_branch(p, zero, 0.0, 0.5);
    FAIL("expected a degenerate-orbit error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateOrbit);
  }
}

TEST_CASE("harmonic problems: gradient consistency and equivariance on random states") {
  const Grid g = torus_grid(16);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  for (Target target : {Target::Circle, Target::Sphere})
    for (const std::string family : {"warped_torus", "conformal_torus"}) {
      HarmonicSetup setup;
      setup.target = target;
      setup.family = family;
      setup.eps = 0.3;
      const ProblemInstance p = make_harmonic_problem(g, setup);
      for (int trial = 0; trial < 5; ++trial) {
        Vec x(p.n), v(p.n);
        const Index m = g.size();
        for (Index c = 0; c < p.n / m; ++c) {
          x.segment(c * m, m) = smooth_field(g, rng, 0.01);
          v.segment(c * m, m) = smooth_field(g, rng, 1.0);
        }
        CHECK(gradient_consistency(p, x, v, 0.8) <= 1e-6);
        CHECK(equivariance_residual(p, x, 0.8) <= 1e-9);
      }
    }
}

TEST_CASE("harmonic problems reject Lorentzian sources") {
  HarmonicSetup setup;
  setup.family = "lorentz_flat";
  CHECK_THROWS_AS(make_harmonic_problem(torus_grid(8), setup), Error);
}
