#pragma once

#include "eqcont/core.hpp"
#include "eqcont/discretization.hpp"
#include "eqcont/metric.hpp"

namespace eqc::geodesics {

/// Closed curve on the torus chart: gamma(theta) = winding * theta + p(theta).
/// `periodic` stacks the x nodes followed by the y nodes.
struct ClosedCurve {
  Grid grid = make_grid(8);
  Vec periodic;
  Eigen::Vector2i winding = Eigen::Vector2i::Zero();

  Index n() const { return grid.n(); }
  /// Chart position of node k (lifted, not reduced mod 2 pi).
  Vec2 point(Index k) const;
};

/// gamma(theta) = base + winding * theta.
ClosedCurve straight_loop(const Grid& grid, const Vec2& base, const Eigen::Vector2i& winding);

/// Nodal velocities gamma' (n x 2) and accelerations gamma'' (n x 2).
Mat velocity(const ClosedCurve& curve, const DiffOperators& ops);
Mat acceleration(const ClosedCurve& curve, const DiffOperators& ops);

/// 1/2 int g(gamma', gamma') dtheta.
double energy(const ClosedCurve& curve, const MetricField& metric, Scheme scheme = Scheme::Spectral);

/// -T_g (D gamma' / dtheta) at every node, stacked like ClosedCurve::periodic.
Vec geodesic_residual(const ClosedCurve& curve, const MetricField& metric, Scheme scheme = Scheme::Spectral);

/// Exact derivative of geodesic_residual with respect to the periodic part.
Mat geodesic_linearization(const ClosedCurve& curve, const MetricField& metric, Scheme scheme = Scheme::Spectral);

/// -T J(V) - (d_V T) A + T Gamma(V, A) with J(V) = D^2 V + R(V, gamma') gamma'
/// and A = D gamma'/dtheta. Equals the linearization at a geodesic.
Mat geodesic_jacobi(const ClosedCurve& curve, const MetricField& metric, Scheme scheme = Scheme::Spectral);

/// gamma(. + shift) written again as winding part plus periodic part.
ClosedCurve rotation_action(const ClosedCurve& curve, double shift);

/// D1 gamma as a single column (2n x 1).
Mat orbit_tangent(const ClosedCurve& curve, Scheme scheme = Scheme::Spectral);

struct GeodesicSetup {
  std::string family = "channel_torus";
  double eps = 0.1;
  Eigen::Vector2i winding{0, 1};
  Scheme scheme = Scheme::Spectral;
  /// Add the two chart translations to the group (only isometries for
  /// translation-invariant metrics such as flat_torus and lorentz_flat).
  bool translations = false;
  Mat2 g_r = Mat2::Identity();
};

/// State = periodic part, parameter = family parameter t.
ProblemInstance make_geodesic_problem(const Grid& grid, const GeodesicSetup& setup);

ClosedCurve curve_from_state(const Grid& grid, const Vec& state, const Eigen::Vector2i& winding);

}  // namespace eqc::geodesics
