#include "eqcont/geodesics.hpp"

#include <cmath>
#include <memory>

namespace eqc::geodesics {

namespace {

// 2n x 2n matrix acting nodewise: entry [a*n + k, b*n + k] = blocks[k](a, b).
Mat nodal(const std::vector<Mat2>& blocks) {
  const Index n = static_cast<Index>(blocks.size());
  Mat out = Mat::Zero(2 * n, 2 * n);
  for (Index k = 0; k < n; ++k)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) out(a * n + k, b * n + k) = blocks[k](a, b);
  return out;
}

Mat2 metric_tensor(const MetricField& metric, const Vec2& q) { return metric.g_r.inverse() * metric.g(q); }

Vec2 gamma_vv(const std::array<Mat2, 2>& gam, const Vec2& u, const Vec2& v) {
  return Vec2(u.dot(gam[0] * v), u.dot(gam[1] * v));
}

void check_curve(const ClosedCurve& curve) {
  if (curve.periodic.size() != 2 * curve.n())
    throw Error(ErrorKind::DimensionMismatch, "curve needs 2n periodic values");
}

struct NodeData {
  Mat vel;
  Mat acc;
};

NodeData node_data(const ClosedCurve& curve, const MetricField& metric, const DiffOperators& ops) {
  check_curve(curve);
  NodeData d{velocity(curve, ops), acceleration(curve, ops)};
  for (Index k = 0; k < curve.n(); ++k) check_nondegenerate(metric, curve.point(k));
  return d;
}

Vec residual_impl(const ClosedCurve& curve, const MetricField& metric, const DiffOperators& ops) {
  const NodeData d = node_data(curve, metric, ops);
  const Index n = curve.n();
  Vec out(2 * n);
  for (Index k = 0; k < n; ++k) {
    const Vec2 q = curve.point(k);
    const Vec2 v = d.vel.row(k).transpose();
    const Vec2 a = d.acc.row(k).transpose() + gamma_vv(christoffel(metric, q), v, v);
    const Vec2 f = -metric_tensor(metric, q) * a;
    out[k] = f[0];
    out[n + k] = f[1];
  }
  return out;
}

Mat linearization_impl(const ClosedCurve& curve, const MetricField& metric, const DiffOperators& ops) {
  const NodeData d = node_data(curve, metric, ops);
  const Index n = curve.n();
  const Mat2 gr_inv = metric.g_r.inverse();
  std::vector<Mat2> t(n), g(n), dgvv(n), dta(n);
  for (Index k = 0; k < n; ++k) {
    const Vec2 q = curve.point(k);
    const Vec2 v = d.vel.row(k).transpose();
    const auto gam = christoffel(metric, q);
    const auto dgam = christoffel_derivative(metric, q);
    const auto dg = metric.dg(q);
    const Vec2 a = d.acc.row(k).transpose() + gamma_vv(gam, v, v);
    t[k] = metric_tensor(metric, q);
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 2; ++i) {
        g[k](b, i) = v.dot(gam[b].col(i));
        dgvv[k](b, i) = v.dot(dgam[i][b] * v);
        dta[k](b, i) = (gr_inv * dg[i] * a)[b];
      }
  }
  const Mat eye2 = Mat::Identity(2, 2);
  const Mat d1 = kron(eye2, ops.d1);
  const Mat d2 = kron(eye2, ops.d2);
  const Mat tn = nodal(t);
  return -nodal(dta) - tn * (d2 + nodal(dgvv) + 2.0 * nodal(g) * d1);
}

Mat jacobi_impl(const ClosedCurve& curve, const MetricField& metric, const DiffOperators& ops) {
  const NodeData d = node_data(curve, metric, ops);
  const Index n = curve.n();
  const Mat2 gr_inv = metric.g_r.inverse();
  std::vector<Mat2> t(n), g(n), dg_theta(n), rm(n), dta(n), ga(n);
  for (Index k = 0; k < n; ++k) {
    const Vec2 q = curve.point(k);
    const Vec2 v = d.vel.row(k).transpose();
    const Vec2 acc = d.acc.row(k).transpose();
    const auto gam = christoffel(metric, q);
    const auto dgam = christoffel_derivative(metric, q);
    const auto r = riemann(metric, q);
    const auto dg = metric.dg(q);
    const Vec2 a = acc + gamma_vv(gam, v, v);
    t[k] = metric_tensor(metric, q);
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 2; ++i) {
        g[k](b, i) = v.dot(gam[b].col(i));  // Gamma(gamma', .)
        // d/dtheta of Gamma(gamma', .) along the curve
        dg_theta[k](b, i) = v[0] * v.dot(dgam[0][b].col(i)) + v[1] * v.dot(dgam[1][b].col(i)) + acc.dot(gam[b].col(i));
        rm[k](b, i) = v.dot(r[b][i] * v);                // R(., gamma') gamma'
        dta[k](b, i) = (gr_inv * dg[i] * a)[b];          // (d_i T) A
        ga[k](b, i) = a.dot(gam[b].row(i).transpose());  // Gamma(., A)
      }
  }
  const Mat eye2 = Mat::Identity(2, 2);
  const Mat d1 = kron(eye2, ops.d1);
  const Mat d2 = kron(eye2, ops.d2);
  const Mat gn = nodal(g);
  const Mat tn = nodal(t);
  // D^2 V = V'' + 2 G V' + (G' + G G) V with the product rule taken analytically
  const Mat dd = d2 + 2.0 * gn * d1 + nodal(dg_theta) + gn * gn;
  return -tn * (dd + nodal(rm)) - nodal(dta) + tn * nodal(ga);
}

double energy_impl(const ClosedCurve& curve, const MetricField& metric, const DiffOperators& ops) {
  check_curve(curve);
  const Mat vel = velocity(curve, ops);
  double e = 0.0;
  for (Index k = 0; k < curve.n(); ++k) {
    const Vec2 q = curve.point(k);
    check_nondegenerate(metric, q);
    const Vec2 v = vel.row(k).transpose();
    e += 0.5 * v.dot(metric.g(q) * v);
  }
  return curve.grid.spacing() * e;
}

}  // namespace

Vec2 ClosedCurve::point(Index k) const {
  const double t = grid.node(k);
  return Vec2(winding[0] * t + periodic[k], winding[1] * t + periodic[n() + k]);
}

ClosedCurve straight_loop(const Grid& grid, const Vec2& base, const Eigen::Vector2i& winding) {
  if (std::abs(grid.period() - 2.0 * std::numbers::pi) > 1e-14)
    throw Error(ErrorKind::Sizing, "closed curves use a 2 pi parameter period");
  ClosedCurve c;
  c.grid = grid;
  c.winding = winding;
  c.periodic.resize(2 * grid.n());
  c.periodic.head(grid.n()).setConstant(base[0]);
  c.periodic.tail(grid.n()).setConstant(base[1]);
  return c;
}

ClosedCurve curve_from_state(const Grid& grid, const Vec& state, const Eigen::Vector2i& winding) {
  ClosedCurve c;
  c.grid = grid;
  c.periodic = state;
  c.winding = winding;
  check_curve(c);
  return c;
}

Mat velocity(const ClosedCurve& curve, const DiffOperators& ops) {
  const Index n = curve.n();
  Mat v(n, 2);
  v.col(0) = ops.d1 * curve.periodic.head(n) + Vec::Constant(n, curve.winding[0]);
  v.col(1) = ops.d1 * curve.periodic.tail(n) + Vec::Constant(n, curve.winding[1]);
  return v;
}

Mat acceleration(const ClosedCurve& curve, const DiffOperators& ops) {
  const Index n = curve.n();
  Mat a(n, 2);
  a.col(0) = ops.d2 * curve.periodic.head(n);
  a.col(1) = ops.d2 * curve.periodic.tail(n);
  return a;
}

double energy(const ClosedCurve& curve, const MetricField& metric, Scheme scheme) {
  return energy_impl(curve, metric, derivative_matrices(curve.grid, scheme));
}

Vec geodesic_residual(const ClosedCurve& curve, const MetricField& metric, Scheme scheme) {
  return residual_impl(curve, metric, derivative_matrices(curve.grid, scheme));
}

Mat geodesic_linearization(const ClosedCurve& curve, const MetricField& metric, Scheme scheme) {
  return linearization_impl(curve, metric, derivative_matrices(curve.grid, scheme));
}

Mat geodesic_jacobi(const ClosedCurve& curve, const MetricField& metric, Scheme scheme) {
  return jacobi_impl(curve, metric, derivative_matrices(curve.grid, scheme));
}

ClosedCurve rotation_action(const ClosedCurve& curve, double shift) {
  check_curve(curve);
  ClosedCurve out = curve;
  out.periodic = circular_shift(curve.periodic, shift, curve.grid);
  out.periodic.head(curve.n()).array() += curve.winding[0] * shift;
  out.periodic.tail(curve.n()).array() += curve.winding[1] * shift;
  return out;
}

Mat orbit_tangent(const ClosedCurve& curve, Scheme scheme) {
  const Mat v = velocity(curve, derivative_matrices(curve.grid, scheme));
  Mat b(2 * curve.n(), 1);
  b.col(0) << v.col(0), v.col(1);
  return b;
}

ProblemInstance make_geodesic_problem(const Grid& grid, const GeodesicSetup& setup) {
  metric_family(setup.family, 0.0, setup.eps);  // validates the name
  if (std::abs(grid.period() - 2.0 * std::numbers::pi) > 1e-14)
    throw Error(ErrorKind::Sizing, "closed curves use a 2 pi parameter period");
  const auto ops = std::make_shared<const DiffOperators>(derivative_matrices(grid, setup.scheme));
  const Index n = grid.n();
  const auto metric_at = [setup](double t) {
    MetricField m = metric_family(setup.family, t, setup.eps);
    m.g_r = setup.g_r;
    return m;
  };
  const auto curve = [grid, w = setup.winding](const Vec& x) { return curve_from_state(grid, x, w); };

  ProblemInstance p;
  p.name = "geodesic-" + setup.family;
  p.n = 2 * n;
  p.functional = [=](const Vec& x, double t) { return energy_impl(curve(x), metric_at(t), *ops); };
  p.gradient = [=](const Vec& x, double t) { return residual_impl(curve(x), metric_at(t), *ops); };
  p.linearization = [=](const Vec& x, double t) { return linearization_impl(curve(x), metric_at(t), *ops); };
  p.gram.mass = kron(setup.g_r, grid.spacing() * Mat::Identity(n, n));
  p.gram.pairing = p.gram.mass;
  p.parameter_range = Interval{-10.0, 10.0};

  const bool translations = setup.translations;
  p.group.dim = translations ? 3 : 1;
  p.group.abelian = true;
  p.group.orbit_tangent = [=](const Vec& x) {
    const Mat v = velocity(curve(x), *ops);
    Mat b = Mat::Zero(2 * n, translations ? 3 : 1);
    b.col(0) << v.col(0), v.col(1);
    if (translations) {
      b.col(1).head(n).setOnes();
      b.col(2).tail(n).setOnes();
    }
    return b;
  };
  p.group.local_action = [=](const Vec& g, const Vec& x) -> std::optional<Vec> {
    Vec out = rotation_action(curve(x), g[0]).periodic;
    if (translations) {
      out.head(n).array() += g[1];
      out.tail(n).array() += g[2];
    }
    return out;
  };
  return p;
}

}  // namespace eqc::geodesics
