#include "eqcont/cmc.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace eqc::cmc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Matrix3d rotation(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-300) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

// Rotation taking q to the south pole.
Eigen::Matrix3d frame_to_south(const Vec3& q) {
  const Vec3 south(0, 0, -1);
  const Vec3 axis = q.cross(south);
  const double s = axis.norm();
  const double c = q.dot(south);
  if (s < 1e-14) return c > 0 ? Eigen::Matrix3d::Identity() : rotation(Vec3(std::numbers::pi, 0, 0));
  return Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
}

Vec3 row3(const Mat& m, Index k) { return m.row(k).transpose(); }

struct Derivs {
  Mat u;  // y'
  Mat w;  // y''
};

Derivs curve_derivs(const Curve& c, const DiffOperators& ops) {
  const Index n = c.n();
  Mat periodic = c.points;
  for (Index k = 0; k < n; ++k) periodic.row(k) -= c.grid.node(k) * c.lift.transpose();
  Derivs d;
  d.u = ops.d1 * periodic;
  d.u.rowwise() += c.lift.transpose();
  d.w = ops.d2 * periodic;
  return d;
}

Vec curvature_impl(const Ambient2D& amb, const Curve& c, const Derivs& d) {
  Vec h(c.n());
  for (Index k = 0; k < c.n(); ++k) {
    const Vec3 u = row3(d.u, k), w = row3(d.w, k);
    const Vec3 nn = amb.surface_normal(row3(c.points, k));
    const double l = u.norm();
    h[k] = -w.dot(u.cross(nn)) / (l * l * l);
  }
  return h;
}

Mat killing_impl(const Ambient2D& amb, const Curve& c, const Derivs& d) {
  Mat b(c.n(), amb.killing_count());
  for (Index k = 0; k < c.n(); ++k) {
    const Vec3 p = row3(c.points, k);
    const Vec3 u = row3(d.u, k);
    const Vec3 ny = u.cross(amb.surface_normal(p)).normalized();
    for (Index j = 0; j < amb.killing_count(); ++j) b(k, j) = amb.killing_field(j, p).dot(ny);
  }
  return b;
}

// Curve and the variation direction d y / d phi at every node.
struct Embedded {
  Curve curve;
  Mat nu;
};

Embedded embed(const Ambient2D& amb, const NormalGraph& g) {
  const Index n = g.reference.n();
  if (g.phi.size() != n) throw Error(ErrorKind::DimensionMismatch, "graph function needs one value per node");
  Embedded e;
  e.curve = g.reference;
  e.nu.resize(n, 3);
  for (Index k = 0; k < n; ++k) {
    const Vec3 x = row3(g.reference.points, k), nx = row3(g.normals, k);
    const double f = g.phi[k];
    if (amb.kind == AmbientKind::Sphere) {
      e.curve.points.row(k) = (std::cos(f) * x + std::sin(f) * nx).transpose();
      e.nu.row(k) = (-std::sin(f) * x + std::cos(f) * nx).transpose();
    } else {
      e.curve.points.row(k) = (x + f * nx).transpose();
      e.nu.row(k) = nx.transpose();
    }
  }
  return e;
}

void check_embedded(const Ambient2D& amb, const Curve& c) {
  const Index n = c.n();
  auto chart_gap = [&](const Vec3& a, const Vec3& b) {
    Vec3 d = a - b;
    if (amb.kind == AmbientKind::FlatTorus)
      for (int i = 0; i < 2; ++i) d[i] -= kTwoPi * std::round(d[i] / kTwoPi);
    return d.norm();
  };
  double total = 0.0;
  for (Index k = 0; k < n; ++k) {
    Vec3 next = row3(c.points, (k + 1) % n);
    if (k + 1 == n) next += kTwoPi * c.lift;
    total += (next - row3(c.points, k)).norm();
  }
  const double limit = 0.5 * total / static_cast<double>(n);
  for (Index j = 0; j < n; ++j)
    for (Index k = j + 2; k < n; ++k) {
      if (j == 0 && k == n - 1) continue;
      if (chart_gap(row3(c.points, j), row3(c.points, k)) < limit)
        throw Error(ErrorKind::SelfIntersection,
                    "nodes " + std::to_string(j) + " and " + std::to_string(k) + " of the graph curve nearly touch");
    }
}

double quad_volume(const Curve& c, const Derivs& d, const OneForm& eta) {
  double v = 0.0;
  for (Index k = 0; k < c.n(); ++k) v += eta(row3(c.points, k)).dot(row3(d.u, k));
  return c.grid.spacing() * v;
}

Vec3 tangent_projection(const Ambient2D& amb, const Vec3& p, const Vec3& v) {
  const Vec3 nn = amb.surface_normal(p);
  return v - v.dot(nn) * nn;
}

// Orthonormal tangent frame (e1, e2) with e1 x e2 = surface normal.
std::pair<Vec3, Vec3> tangent_frame(const Ambient2D& amb, const Vec3& p) {
  const Vec3 nn = amb.surface_normal(p);
  Vec3 a = std::abs(nn[0]) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
  const Vec3 e1 = (a - a.dot(nn) * nn).normalized();
  return {e1, nn.cross(e1)};
}

Eigen::Matrix3d planar_rotation(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace

AmbientKind parse_ambient(const std::string& name) {
  if (name == "plane") return AmbientKind::Plane;
  if (name == "sphere") return AmbientKind::Sphere;
  if (name == "flat_torus" || name == "torus") return AmbientKind::FlatTorus;
  throw Error(ErrorKind::ConfigInvalid, "unknown ambient '" + name + "'");
}

const char* to_string(AmbientKind kind) {
  switch (kind) {
    case AmbientKind::Plane: return "plane";
    case AmbientKind::Sphere: return "sphere";
    case AmbientKind::FlatTorus: return "flat_torus";
  }
  return "unknown";
}

Ambient2D make_ambient(AmbientKind kind) {
  Ambient2D a;
  a.kind = kind;
  a.curvature = kind == AmbientKind::Sphere ? 1.0 : 0.0;
  return a;
}

Index Ambient2D::killing_count() const { return kind == AmbientKind::FlatTorus ? 2 : 3; }

Vec3 Ambient2D::killing_field(Index j, const Vec3& p) const {
  if (kind == AmbientKind::Sphere) return Vec3::Unit(j).cross(p);
  if (j < 2) return Vec3::Unit(j);
  return Vec3(-p[1], p[0], 0.0);
}

Vec3 Ambient2D::isometry(const Vec& g, const Vec3& p) const {
  if (g.size() != killing_count()) throw Error(ErrorKind::DimensionMismatch, "group element has the wrong size");
  switch (kind) {
    case AmbientKind::Plane: return planar_rotation(g[2]) * p + Vec3(g[0], g[1], 0.0);
    case AmbientKind::Sphere: return rotation(Vec3(g[0], g[1], g[2])) * p;
    case AmbientKind::FlatTorus: return p + Vec3(g[0], g[1], 0.0);
  }
  return p;
}

Vec3 Ambient2D::surface_normal(const Vec3& p) const {
  return kind == AmbientKind::Sphere ? Vec3(p.normalized()) : Vec3::UnitZ();
}

NormalGraph circle_reference(const Grid& grid, double radius, const Vec3& center) {
  NormalGraph g;
  g.reference.grid = grid;
  g.reference.points.resize(grid.n(), 3);
  g.normals.resize(grid.n(), 3);
  for (Index k = 0; k < grid.n(); ++k) {
    const double t = kTwoPi * grid.node(k) / grid.period();
    const Vec3 dir(std::cos(t), std::sin(t), 0.0);
    g.reference.points.row(k) = (center + radius * dir).transpose();
    g.normals.row(k) = dir.transpose();
  }
  g.phi = Vec::Zero(grid.n());
  return g;
}

NormalGraph equator_reference(const Grid& grid) {
  NormalGraph g;
  g.reference.grid = grid;
  g.reference.points.resize(grid.n(), 3);
  g.normals.resize(grid.n(), 3);
  for (Index k = 0; k < grid.n(); ++k) {
    const double t = kTwoPi * grid.node(k) / grid.period();
    g.reference.points.row(k) << std::cos(t), -std::sin(t), 0.0;
    g.normals.row(k) << 0.0, 0.0, 1.0;
  }
  g.phi = Vec::Zero(grid.n());
  return g;
}

NormalGraph straight_loop_reference(const Grid& grid, double x0) {
  if (std::abs(grid.period() - kTwoPi) > 1e-14)
    throw Error(ErrorKind::Sizing, "torus loops use a 2 pi parameter period");
  NormalGraph g;
  g.reference.grid = grid;
  g.reference.points.resize(grid.n(), 3);
  g.reference.lift = Vec3::UnitY();
  g.normals.resize(grid.n(), 3);
  for (Index k = 0; k < grid.n(); ++k) {
    g.reference.points.row(k) << x0, grid.node(k), 0.0;
    g.normals.row(k) << 1.0, 0.0, 0.0;
  }
  g.phi = Vec::Zero(grid.n());
  return g;
}

NormalGraph default_reference(const Ambient2D& ambient, const Grid& grid) {
  switch (ambient.kind) {
    case AmbientKind::Plane: return circle_reference(grid);
    case AmbientKind::Sphere: return equator_reference(grid);
    case AmbientKind::FlatTorus: return straight_loop_reference(grid);
  }
  return circle_reference(grid);
}

Vec3 excluded_point(const NormalGraph& graph) {
  const Vec3 s = graph.normals.colwise().sum().transpose();
  if (s.norm() < 1e-12) throw Error(ErrorKind::NoPrimitive, "reference normals cancel; no excluded point");
  return -s.normalized();
}

Curve graph_to_curve(const Ambient2D& ambient, const NormalGraph& graph) {
  Curve c = embed(ambient, graph).curve;
  check_embedded(ambient, c);
  return c;
}

Vec mean_curvature(const Ambient2D& ambient, const Curve& curve) {
  const DiffOperators ops = derivative_matrices(curve.grid);
  return curvature_impl(ambient, curve, curve_derivs(curve, ops));
}

Vec mean_curvature(const Ambient2D& ambient, const NormalGraph& graph) {
  return mean_curvature(ambient, graph_to_curve(ambient, graph));
}

Mat cmc_jacobi(const Ambient2D& ambient, const NormalGraph& graph) {
  const Curve c = graph_to_curve(ambient, graph);
  const DiffOperators ops = derivative_matrices(c.grid);
  const Derivs d = curve_derivs(c, ops);
  const Vec h = curvature_impl(ambient, c, d);
  const Index n = c.n();
  Vec inv_l2(n), drift(n), potential(n);
  for (Index k = 0; k < n; ++k) {
    const Vec3 u = row3(d.u, k), w = row3(d.w, k);
    const double l = u.norm();
    const double lp = u.dot(w) / l;
    inv_l2[k] = 1.0 / (l * l);
    drift[k] = lp / (l * l * l);
    potential[k] = ambient.curvature + h[k] * h[k];
  }
  Mat j = drift.asDiagonal() * ops.d1 - inv_l2.asDiagonal() * ops.d2;
  j.diagonal() -= potential;
  return j;
}

Mat killing_normal_components(const Ambient2D& ambient, const Curve& curve) {
  const DiffOperators ops = derivative_matrices(curve.grid);
  return killing_impl(ambient, curve, curve_derivs(curve, ops));
}

Mat killing_normal_components(const Ambient2D& ambient, const NormalGraph& graph) {
  return killing_normal_components(ambient, graph_to_curve(ambient, graph));
}

double curve_length(const Curve& curve) {
  const DiffOperators ops = derivative_matrices(curve.grid);
  const Derivs d = curve_derivs(curve, ops);
  return curve.grid.spacing() * d.u.rowwise().norm().sum();
}

StokesResult stokes_identity_check(const Ambient2D& ambient, const Curve& curve) {
  const DiffOperators ops = derivative_matrices(curve.grid);
  const Derivs d = curve_derivs(curve, ops);
  const Vec h = curvature_impl(ambient, curve, d);
  const Mat b = killing_impl(ambient, curve, d);
  const Vec ds = curve.grid.spacing() * d.u.rowwise().norm();
  StokesResult r;
  r.flux = b.transpose() * ds;
  r.r1 = (b.transpose() * Vec(ds.cwiseProduct(h))).lpNorm<Eigen::Infinity>();
  if (curve.lift.norm() == 0.0) r.r2 = r.flux.lpNorm<Eigen::Infinity>();
  return r;
}

OneForm standard_primitive(const Ambient2D& ambient, const Vec3& excluded) {
  switch (ambient.kind) {
    case AmbientKind::Plane: return [](const Vec3& p) { return Vec3(-0.5 * p[1], 0.5 * p[0], 0.0); };
    case AmbientKind::Sphere: {
      const Eigen::Matrix3d r = frame_to_south(excluded.normalized());
      return [r](const Vec3& p) {
        const Vec3 q = r * p;
        const double den = 1.0 + q[2];
        if (den < 1e-12) throw Error(ErrorKind::NoPrimitive, "curve passes through the excluded point");
        return Vec3(r.transpose() * Vec3(-q[1] / den, q[0] / den, 0.0));
      };
    }
    case AmbientKind::FlatTorus: break;
  }
  throw Error(ErrorKind::NoPrimitive, "the flat torus has no invariant volume primitive");
}

OneForm chart_primitive() {
  return [](const Vec3& p) { return Vec3(0.0, p[0], 0.0); };
}

OneForm average_primitive(const Ambient2D& ambient, const OneForm& eta, int samples) {
  if (!ambient.has_primitive()) throw Error(ErrorKind::NoPrimitive, "averaging needs a compact rotation group");
  if (samples < 4) throw Error(ErrorKind::ConfigInvalid, "averaging needs at least 4 samples");
  std::vector<Eigen::Matrix3d> rots;
  for (int k = 0; k < samples; ++k) rots.push_back(planar_rotation(kTwoPi * k / samples));
  return [eta, rots](const Vec3& p) {
    Vec3 out = Vec3::Zero();
    for (const auto& r : rots) out += r.transpose() * eta(r * p);
    return Vec3(out / static_cast<double>(rots.size()));
  };
}

double primitive_invariance_defect(const Ambient2D& ambient, const OneForm& eta, const std::vector<Vec3>& points,
                                   const std::vector<double>& angles) {
  double worst = 0.0;
  for (const Vec3& p : points)
    for (double a : angles) {
      const Eigen::Matrix3d r = planar_rotation(a);
      const Vec3 diff = r.transpose() * eta(r * p) - eta(p);
      worst = std::max(worst, tangent_projection(ambient, p, diff).norm());
    }
  return worst;
}

double primitive_exterior_defect(const Ambient2D& ambient, const OneForm& eta, const std::vector<Vec3>& points) {
  const double step = 1e-5;
  double worst = 0.0;
  for (const Vec3& p : points) {
    Eigen::Matrix3d jac;  // jac(i, j) = d a_i / d p_j
    for (int j = 0; j < 3; ++j) {
      const Vec3 e = step * Vec3::Unit(j);
      jac.col(j) = (eta(p + e) - eta(p - e)) / (2.0 * step);
    }
    const auto [e1, e2] = tangent_frame(ambient, p);
    const double d_eta = e2.dot(jac * e1) - e1.dot(jac * e2);
    worst = std::max(worst, std::abs(d_eta - 1.0));
  }
  return worst;
}

double killing_defect(const Ambient2D& ambient, const std::vector<Vec3>& points) {
  const double step = 1e-5;
  double worst = 0.0;
  for (const Vec3& p : points) {
    const Vec3 nn = ambient.surface_normal(p);
    const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - nn * nn.transpose();
    for (Index k = 0; k < ambient.killing_count(); ++k) {
      Eigen::Matrix3d jac;
      for (int j = 0; j < 3; ++j) {
        const Vec3 e = step * Vec3::Unit(j);
        jac.col(j) = (ambient.killing_field(k, p + e) - ambient.killing_field(k, p - e)) / (2.0 * step);
      }
      worst = std::max(worst, (proj * (jac + jac.transpose()) * proj).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double volume_functional(const Ambient2D& ambient, const Curve& curve, const Vec3& excluded) {
  const OneForm eta = standard_primitive(ambient, excluded);
  const DiffOperators ops = derivative_matrices(curve.grid);
  return quad_volume(curve, curve_derivs(curve, ops), eta);
}

double volume_functional(const Ambient2D& ambient, const Curve& curve) {
  if (!ambient.has_primitive()) throw Error(ErrorKind::NoPrimitive, "the flat torus has no invariant volume primitive");
  Vec3 q(0, 0, -1);
  if (ambient.kind == AmbientKind::Sphere) {
    const Vec3 centroid = curve.points.colwise().mean().transpose();
    if (centroid.norm() > 1e-8) {
      q = -centroid.normalized();
    } else {
      const DiffOperators ops = derivative_matrices(curve.grid);
      const Derivs d = curve_derivs(curve, ops);
      Vec3 s = Vec3::Zero();
      for (Index k = 0; k < curve.n(); ++k) s += row3(d.u, k).cross(row3(curve.points, k));
      if (s.norm() < 1e-12) throw Error(ErrorKind::NoPrimitive, "cannot place the excluded point for this curve");
      q = -s.normalized();
    }
  }
  return volume_functional(ambient, curve, q);
}

NormalGraph isometry_regraph(const Ambient2D& ambient, const NormalGraph& graph, const Vec& g) {
  const Curve c = embed(ambient, graph).curve;
  const Index n = c.n();
  const Grid& grid = c.grid;
  Mat moved(n, 3), periodic(n, 3);
  for (Index k = 0; k < n; ++k) {
    moved.row(k) = ambient.isometry(g, row3(c.points, k)).transpose();
    periodic.row(k) = moved.row(k) - grid.node(k) * c.lift.transpose();
  }
  const std::array<TrigInterpolant, 3> interp = {TrigInterpolant(grid, periodic.col(0)),
                                                 TrigInterpolant(grid, periodic.col(1)),
                                                 TrigInterpolant(grid, periodic.col(2))};
  auto z = [&](double s) { return Vec3(Vec3(interp[0].value(s), interp[1].value(s), interp[2].value(s)) + s * c.lift); };
  auto dz = [&](double s) {
    return Vec3(Vec3(interp[0].derivative(s), interp[1].derivative(s), interp[2].derivative(s)) + c.lift);
  };

  NormalGraph out = graph;
  const double h = grid.spacing();
  for (Index j = 0; j < n; ++j) {
    const Vec3 x = row3(graph.reference.points, j);
    const Vec3 nx = row3(graph.normals, j);
    const Vec3 t = ambient.surface_normal(x).cross(nx);
    const Vec3 yj = row3(c.points, j);
    Index best = 0;
    for (Index k = 1; k < n; ++k)
      if ((row3(moved, k) - yj).squaredNorm() < (row3(moved, best) - yj).squaredNorm()) best = k;
    double s = grid.node(best);
    bool converged = false;
    for (int it = 0; it < 20; ++it) {
      const double r = (z(s) - x).dot(t);
      if (std::abs(r) <= 1e-14) {
        converged = true;
        break;
      }
      const double slope = dz(s).dot(t);
      if (std::abs(slope) < 1e-12) break;
      const double step = std::clamp(-r / slope, -0.5 * h, 0.5 * h);
      s += step;
    }
    if (!converged && std::abs((z(s) - x).dot(t)) <= 1e-12) converged = true;
    if (!converged)
      throw Error(ErrorKind::RegraphFailure, "normal-line solve diverged at node " + std::to_string(j));
    const Vec3 p = z(s);
    if (ambient.kind == AmbientKind::Sphere) {
      if (p.dot(x) <= 0.0) throw Error(ErrorKind::RegraphFailure, "moved curve left the reference hemisphere");
      out.phi[j] = std::atan2(p.dot(nx), p.dot(x));
    } else {
      out.phi[j] = (p - x).dot(nx);
    }
  }
  return out;
}

ProblemInstance make_cmc_problem(const Ambient2D& ambient, const NormalGraph& reference, Scheme scheme) {
  const Index n = reference.reference.n();
  const auto ops = std::make_shared<const DiffOperators>(derivative_matrices(reference.reference.grid, scheme));
  const auto ref = std::make_shared<const NormalGraph>(reference);
  const bool sphere = ambient.kind == AmbientKind::Sphere;
  const OneForm eta = ambient.has_primitive()
                          ? standard_primitive(ambient, sphere ? excluded_point(reference) : Vec3(0, 0, -1))
                          : chart_primitive();
  const double h = reference.reference.grid.spacing();

  auto embedded = [ambient, ref](const Vec& phi) {
    NormalGraph g = *ref;
    g.phi = phi;
    return embed(ambient, g);
  };

  ProblemInstance p;
  p.name = std::string("cmc-") + to_string(ambient.kind);
  p.n = n;
  p.functional = [=](const Vec& phi, double lambda) {
    const Embedded e = embedded(phi);
    const Derivs d = curve_derivs(e.curve, *ops);
    return h * d.u.rowwise().norm().sum() - lambda * quad_volume(e.curve, d, eta);
  };
  p.gradient = [=](const Vec& phi, double lambda) {
    const Embedded e = embedded(phi);
    const Derivs d = curve_derivs(e.curve, *ops);
    Vec out(n);
    for (Index k = 0; k < n; ++k) {
      const Vec3 u = row3(d.u, k), w = row3(d.w, k);
      const Vec3 un = u.cross(ambient.surface_normal(row3(e.curve.points, k)));
      const double l = u.norm();
      out[k] = (-w.dot(un) / (l * l * l) - lambda) * un.dot(row3(e.nu, k));
    }
    return out;
  };
  // Exact derivative of the discrete gradient: per node it is a function of
  // (y, y', y'', nu) with d y = nu dphi, d nu = -y dphi on the sphere.
  p.linearization = [=](const Vec& phi, double lambda) {
    const Embedded e = embedded(phi);
    const Derivs d = curve_derivs(e.curve, *ops);
    Mat gw(n, 3), gu(n, 3);
    Vec diag = Vec::Zero(n);
    for (Index k = 0; k < n; ++k) {
      const Vec3 y = row3(e.curve.points, k);
      const Vec3 u = row3(d.u, k), w = row3(d.w, k), nu = row3(e.nu, k);
      const Vec3 nn = ambient.surface_normal(y);
      const Vec3 un = u.cross(nn);
      const double l = u.norm(), l3 = l * l * l;
      const double pp = w.dot(un), q = nu.dot(un);
      const double cp = -q / l3, cq = -pp / l3 - lambda, cl = 3.0 * pp * q / (l3 * l * l);
      gw.row(k) = (cp * un).transpose();
      gu.row(k) = (cp * nn.cross(w) + cq * nn.cross(nu) + cl * u).transpose();
      if (sphere) {
        const Vec3 gn = cp * w.cross(u) + cq * nu.cross(u);
        const Vec3 gnu = cq * un;
        diag[k] = gn.dot(nu) - gnu.dot(y);
      }
    }
    Mat j = Mat::Zero(n, n);
    for (int c = 0; c < 3; ++c) {
      const Vec nuc = e.nu.col(c);
      j += gw.col(c).asDiagonal() * ops->d2 * nuc.asDiagonal();
      j += gu.col(c).asDiagonal() * ops->d1 * nuc.asDiagonal();
    }
    j.diagonal() += diag;
    return j;
  };
  p.gram = GramPair::scaled_identity(n, h);
  p.parameter_range = Interval{-10.0, 10.0};

  p.group.dim = ambient.killing_count();
  p.group.abelian = ambient.kind == AmbientKind::FlatTorus;
  p.group.domain_radius = ambient.domain_radius;
  p.group.orbit_tangent = [=](const Vec& phi) {
    const Embedded e = embedded(phi);
    const Derivs d = curve_derivs(e.curve, *ops);
    Mat b = killing_impl(ambient, e.curve, d);
    for (Index k = 0; k < n; ++k) {
      const Vec3 ny = row3(d.u, k).cross(ambient.surface_normal(row3(e.curve.points, k))).normalized();
      b.row(k) /= ny.dot(row3(e.nu, k));
    }
    return b;
  };
  p.group.local_action = [ambient, ref](const Vec& g, const Vec& phi) -> std::optional<Vec> {
    NormalGraph graph = *ref;
    graph.phi = phi;
    try {
      return isometry_regraph(ambient, graph, g).phi;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::RegraphFailure) return std::nullopt;
      throw;
    }
  };
  return p;
}

}  // namespace eqc::cmc
