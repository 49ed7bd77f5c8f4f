#pragma once

#include "eqcont/core.hpp"
#include "eqcont/discretization.hpp"

#include <functional>
#include <optional>

namespace eqc::cmc {

using Vec3 = Eigen::Vector3d;

enum class AmbientKind { Plane, Sphere, FlatTorus };

AmbientKind parse_ambient(const std::string& name);
const char* to_string(AmbientKind kind);

/// R^2, the unit sphere S^2 in R^3, or the flat torus R^2 / (2 pi Z)^2.
/// Points are always 3-vectors; the plane and torus chart use z = 0.
struct Ambient2D {
  AmbientKind kind = AmbientKind::Plane;
  double curvature = 0.0;  // Gaussian curvature
  double domain_radius = 0.5;

  /// plane: translations e1, e2 and the rotation (-y, x); sphere: e_i x p;
  /// torus: translations e1, e2.
  Index killing_count() const;
  Vec3 killing_field(Index j, const Vec3& p) const;

  /// plane g = (tx, ty, angle); sphere g = rotation vector; torus g = (tx, ty).
  /// d/dt isometry(t e_j, p) at t = 0 is killing_field(j, p).
  Vec3 isometry(const Vec& g, const Vec3& p) const;

  /// Unit normal of the ambient surface in R^3 (e3, or p on the sphere).
  Vec3 surface_normal(const Vec3& p) const;

  bool has_primitive() const { return kind != AmbientKind::FlatTorus; }
};

Ambient2D make_ambient(AmbientKind kind);

/// Closed curve sampled on a 1D grid. On the torus the points are lifted
/// chart coordinates and `lift` is the winding: points - theta * lift is
/// periodic.
struct Curve {
  Grid grid = make_grid(8);
  Mat points;  // n x 3
  Vec3 lift = Vec3::Zero();

  Index n() const { return grid.n(); }
};

/// Normal graph over a fixed reference curve: y = exp_x(phi * n_x).
/// `normals` is the right unit normal of the reference (the tangent rotated
/// clockwise about the surface normal).
struct NormalGraph {
  Curve reference;
  Mat normals;  // n x 3
  Vec phi;
};

/// Counterclockwise circle in the plane, outward normal.
NormalGraph circle_reference(const Grid& grid, double radius = 1.0, const Vec3& center = Vec3::Zero());
/// Equator (cos t, -sin t, 0) of S^2 with northward normal.
NormalGraph equator_reference(const Grid& grid);
/// Vertical loop (x0, t) on the flat torus with normal +e1.
NormalGraph straight_loop_reference(const Grid& grid, double x0 = 0.0);
NormalGraph default_reference(const Ambient2D& ambient, const Grid& grid);

/// The point removed from S^2 for the volume primitive of graphs over this
/// reference: minus the normalized sum of the reference normals.
Vec3 excluded_point(const NormalGraph& graph);

/// Throws SelfIntersection when two non-adjacent nodes come closer than
/// half the mean node spacing.
Curve graph_to_curve(const Ambient2D& ambient, const NormalGraph& graph);

/// Geodesic curvature with respect to the right normal; the unit circle has
/// curvature 1 and the latitude at height sin c has -tan c.
Vec mean_curvature(const Ambient2D& ambient, const Curve& curve);
Vec mean_curvature(const Ambient2D& ambient, const NormalGraph& graph);

/// J = -d^2/ds^2 - (K + H^2) on nodal scalars along the graph curve.
Mat cmc_jacobi(const Ambient2D& ambient, const NormalGraph& graph);

/// Column j holds g(K_j, n) along the curve.
Mat killing_normal_components(const Ambient2D& ambient, const Curve& curve);
Mat killing_normal_components(const Ambient2D& ambient, const NormalGraph& graph);

double curve_length(const Curve& curve);

struct StokesResult {
  double r1 = 0.0;            // max_j |int g(K_j, H n) ds|
  std::optional<double> r2;   // max_j |int g(K_j, n) ds|; empty if the curve does not bound
  Vec flux;                   // int g(K_j, n) ds for every j
};

StokesResult stokes_identity_check(const Ambient2D& ambient, const Curve& curve);

/// Covector field: eta_p(v) = a(p) . v.
using OneForm = std::function<Vec3(const Vec3&)>;

/// plane: 1/2 (x dy - y dx); sphere: (X dY - Y dX) / (1 + Z) in a frame where
/// `excluded` is the south pole. Throws NoPrimitive on the torus.
OneForm standard_primitive(const Ambient2D& ambient, const Vec3& excluded = Vec3(0, 0, -1));
/// x dy: exact for the area form but not invariant; the only choice on the
/// torus chart.
OneForm chart_primitive();

/// Haar average over the rotations fixing the origin (plane) or the south
/// pole (sphere), `samples` equally spaced angles.
OneForm average_primitive(const Ambient2D& ambient, const OneForm& eta, int samples);

/// max |R^T a(R p) - a(p)| over points and rotation angles (tangential part).
double primitive_invariance_defect(const Ambient2D& ambient, const OneForm& eta, const std::vector<Vec3>& points,
                                   const std::vector<double>& angles);
/// max |d eta(e1, e2) - 1| for oriented orthonormal tangent frames.
double primitive_exterior_defect(const Ambient2D& ambient, const OneForm& eta, const std::vector<Vec3>& points);
/// max norm of the tangential symmetrized derivative of every Killing field.
double killing_defect(const Ambient2D& ambient, const std::vector<Vec3>& points);

/// int x*(eta) with the standard primitive. On the sphere the excluded point
/// is the antipode of the centroid, or minus the mean normal when the
/// centroid vanishes. Throws NoPrimitive on the torus.
double volume_functional(const Ambient2D& ambient, const Curve& curve);
double volume_functional(const Ambient2D& ambient, const Curve& curve, const Vec3& excluded);

/// Moves the graph curve by g and graphs it again over the same reference
/// by a per-node Newton solve along the normal lines. Throws RegraphFailure.
NormalGraph isometry_regraph(const Ambient2D& ambient, const NormalGraph& graph, const Vec& g);

/// f(phi, lambda) = Area - lambda * Volume, gradient (H - lambda) |y'| g(n_y, nu),
/// analytic linearization, Killing group with regraphing action.
/// On the torus the chart form x dy stands in for the volume.
ProblemInstance make_cmc_problem(const Ambient2D& ambient, const NormalGraph& reference,
                                 Scheme scheme = Scheme::Spectral);

}  // namespace eqc::cmc
