#pragma once

#include "eqcont/core.hpp"
#include "eqcont/discretization.hpp"
#include "eqcont/metric.hpp"

#include <numbers>

namespace eqc::harmonic {

using Vec3 = Eigen::Vector3d;

enum class Target { Circle, Sphere };

Target parse_target(const std::string& name);
const char* to_string(Target target);

/// Map from the flat-chart 2-torus (N x N grid, node i + N j) into S^1 or S^2.
/// Circle: angle = p x + q y + periodic remainder. Sphere: unit 3-vectors.
struct TorusMap {
  Target target = Target::Circle;
  Grid grid = make_grid(8, 2.0 * std::numbers::pi, 2);
  Vec angle;                                     // circle: periodic remainder, N^2
  Eigen::Vector2i degree = Eigen::Vector2i::Zero();
  Mat points;                                    // sphere: N^2 x 3
  MetricField source_metric = metric_family("flat_torus", 0.0);

  Index nodes() const { return grid.size(); }
  /// Full angle field p x + q y + remainder (circle only).
  Vec full_angle() const;
};

TorusMap circle_map(const Grid& grid, const Eigen::Vector2i& degree, const MetricField& metric);
/// (x, y) -> (cos(p x + q y), sin(p x + q y), 0).
TorusMap equator_map(const Grid& grid, const Eigen::Vector2i& degree, const MetricField& metric);
TorusMap constant_sphere_map(const Grid& grid, const Vec3& value, const MetricField& metric);

/// zeta = sqrt(det g) against the flat chart volume and A = zeta g^-1, per
/// node, with (bx, by) = div A from the analytic metric derivatives.
struct SourceWeights {
  Vec zeta;
  Vec a11, a12, a22;
  Vec bx, by;
};
SourceWeights source_weights(const Grid& grid, const MetricField& metric);

/// -div(A grad .) on nodal scalars, assembled as -(A : D2 + div A . D1) so
/// that the Nyquist modes are not spurious kernel vectors. This is the
/// flat-quadrature gradient of 1/2 int <grad u, A grad u> on band-limited data.
Mat weighted_laplacian(const Grid& grid, const MetricField& metric, Scheme scheme = Scheme::Spectral);
Mat weighted_laplacian(const DiffOperators& ops, const SourceWeights& weights);

double dirichlet_energy(const TorusMap& map, Scheme scheme = Scheme::Spectral);

/// Circle: Laplace-Beltrami of the angle (N^2 x 1). Sphere: the ambient
/// tension vector, the tangential part of the componentwise Laplacian
/// (N^2 x 3), which equals Laplacian + |d phi|^2 phi at smooth maps.
Mat tension_field(const TorusMap& map, Scheme scheme = Scheme::Spectral);

/// Per-node tangent frame: E1 = Gram-Schmidt of e_z against the value
/// (e_x when |value_z| > 0.9), E2 = value x E1. Returns N^2 x 6 rows (E1, E2).
Mat sphere_frame(const Mat& points);

/// Circle: -div(A grad). Sphere: E^T (-div(A grad) - |d phi|_A^2) E on the
/// 2 N^2 frame coordinates (all E1 components, then all E2 components).
Mat harmonic_jacobi(const TorusMap& map, Scheme scheme = Scheme::Spectral);

/// Circle: one all-ones column. Sphere: (e_i x phi) in the frame at phi.
Mat target_killing_fields(const TorusMap& map);

struct HarmonicSetup {
  Target target = Target::Circle;
  std::string family = "warped_torus";
  double eps = 0.1;
  Eigen::Vector2i degree{1, 0};
  Scheme scheme = Scheme::Spectral;
};

/// Parameter = family parameter t. Circle state: periodic angle remainder,
/// group S^1 shifting the angle. Sphere state: exp-map coordinates about the
/// equator map of the given degree, group SO(3) acting on the target.
ProblemInstance make_harmonic_problem(const Grid& grid, const HarmonicSetup& setup);

/// Map represented by a state of make_harmonic_problem at parameter t.
TorusMap map_from_state(const Grid& grid, const HarmonicSetup& setup, const Vec& state, double t);

}  // namespace eqc::harmonic
