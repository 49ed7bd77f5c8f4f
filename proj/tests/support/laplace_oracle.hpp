#pragma once

// Dense oracle for the circle-target harmonic problem: solve
// div(A grad(p x + q y + u)) = 0 with mean(u) = 0 through a bordered system.
// A and div A are written out per family and the operator is expanded as
// A : D2 + div A . D1. Only the 1D differentiation matrices come from the
// library.

#include "eqcont/discretization.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace oracle {

inline eqc::Vec weighted_laplace(eqc::Index n, const std::string& family, double t, double eps, const Eigen::Vector2i& deg) {
  using namespace eqc;
  const Grid g = make_grid(n, 2.0 * std::numbers::pi, 2);
  const Grid line = make_grid(n);
  const Mat d1 = first_derivative_matrix(line, Scheme::Spectral);
  const Mat d2 = second_derivative_matrix(line, Scheme::Spectral);
  const Mat eye = Mat::Identity(n, n);
  const Index m = n * n;
  Vec a11(m), a22(m), a11x(m);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const double x = g.node(i);
      const double c = 1.0 + t * eps * std::cos(x);
      const bool warped = family == "warped_torus";
      // conformal: A = I; warped diag(1, c^2): zeta = c, A = diag(c, 1/c)
      a11[i + n * j] = warped ? c : 1.0;
      a22[i + n * j] = warped ? 1.0 / c : 1.0;
      a11x[i + n * j] = warped ? -t * eps * std::sin(x) : 0.0;
    }
  const Mat op = a11.asDiagonal() * kron(eye, d2) + a22.asDiagonal() * kron(d2, eye) +
                 a11x.asDiagonal() * kron(eye, d1);
  const Vec rhs = -deg[0] * a11x;
  Mat bordered = Mat::Zero(m + 1, m + 1);
  bordered.topLeftCorner(m, m) = op;
  bordered.block(0, m, m, 1).setOnes();
  bordered.block(m, 0, 1, m).setOnes();
  Vec b = Vec::Zero(m + 1);
  b.head(m) = rhs;
  const Vec sol = bordered.partialPivLu().solve(b);
  return sol.head(m);
}

}  // namespace oracle
