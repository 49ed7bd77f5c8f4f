#include "eqcont/harmonic.hpp"

#include <cmath>
#include <memory>

namespace eqc::harmonic {

namespace {

// Coefficients of exp_p(xi) = cos r p + s xi, r = |xi|:
//   s = sin r / r, c2 = s'(r) / r, d2 = c2'(r) / r.
struct ExpCoef {
  double cos_r = 1.0, s = 1.0, c2 = -1.0 / 3.0, d2 = 1.0 / 15.0;
};

ExpCoef exp_coef(double r) {
  ExpCoef e;
  e.cos_r = std::cos(r);
  if (r < 0.5) {
    // s = sum_k a_k r^2k with a_k = (-1)^k / (2k + 1)!
    const double r2 = r * r;
    double a = 1.0;
    e.s = e.c2 = e.d2 = 0.0;
    for (int k = 0; k < 12; ++k) {
      if (k > 0) a /= -static_cast<double>((2 * k) * (2 * k + 1));
      e.s += a * std::pow(r2, k);
      if (k >= 1) e.c2 += 2.0 * k * a * std::pow(r2, k - 1);
      if (k >= 2) e.d2 += 4.0 * k * (k - 1) * a * std::pow(r2, k - 2);
    }
    return e;
  }
  const double sn = std::sin(r);
  e.s = sn / r;
  e.c2 = (r * e.cos_r - sn) / (r * r * r);
  e.d2 = (-r * r * sn - 3.0 * r * e.cos_r + 3.0 * sn) / std::pow(r, 5);
  return e;
}

// sum_ab A_ab <d_a phi, d_b phi> per node; dx, dy hold one column per component.
Vec energy_density(const SourceWeights& w, const Mat& dx, const Mat& dy) {
  const Mat fx = w.a11.asDiagonal() * dx + w.a12.asDiagonal() * dy;
  const Mat fy = w.a12.asDiagonal() * dx + w.a22.asDiagonal() * dy;
  return (dx.cwiseProduct(fx) + dy.cwiseProduct(fy)).rowwise().sum();
}


void require_riemannian(const MetricField& metric) {
  if (metric.signature != Signature::Riemannian)
    throw Error(ErrorKind::ConfigInvalid, "harmonic maps need a Riemannian source metric, got " + metric.name);
}

Vec3 row3(const Mat& m, Index k) { return m.row(k).transpose(); }

// Exp-map state about reference points with frame (N^2 x 6).
struct SphereState {
  Mat points;             // N^2 x 3
  std::array<Mat, 2> jac; // d phi / d w_i, N^2 x 3 each
  std::vector<ExpCoef> coef;
  Vec w1, w2;
};

SphereState sphere_state(const Mat& ref, const Mat& frame, const Vec& w) {
  const Index m = ref.rows();
  if (w.size() != 2 * m) throw Error(ErrorKind::DimensionMismatch, "sphere state needs two coordinates per node");
  SphereState st;
  st.points.resize(m, 3);
  st.jac[0].resize(m, 3);
  st.jac[1].resize(m, 3);
  st.coef.resize(m);
  st.w1 = w.head(m);
  st.w2 = w.tail(m);
  for (Index k = 0; k < m; ++k) {
    const Vec3 p = row3(ref, k);
    const Vec3 e1 = frame.block<1, 3>(k, 0).transpose(), e2 = frame.block<1, 3>(k, 3).transpose();
    const double a = st.w1[k], b = st.w2[k];
    const Vec3 xi = a * e1 + b * e2;
    const ExpCoef c = exp_coef(std::hypot(a, b));
    st.coef[k] = c;
    st.points.row(k) = (c.cos_r * p + c.s * xi).transpose();
    st.jac[0].row(k) = (-c.s * a * p + c.s * e1 + c.c2 * a * xi).transpose();
    st.jac[1].row(k) = (-c.s * b * p + c.s * e2 + c.c2 * b * xi).transpose();
  }
  return st;
}

// Second derivative d^2 phi / dw_i dw_j at node k paired with v.
double exp_hessian(const SphereState& st, const Mat& ref, const Mat& frame, Index k, int i, int j, const Vec3& v) {
  const Vec3 p = row3(ref, k);
  const Vec3 e[2] = {frame.block<1, 3>(k, 0).transpose(), frame.block<1, 3>(k, 3).transpose()};
  const double w[2] = {st.w1[k], st.w2[k]};
  const Vec3 xi = w[0] * e[0] + w[1] * e[1];
  const ExpCoef& c = st.coef[k];
  Vec3 h = c.c2 * (w[j] * e[i] + w[i] * e[j]) + w[i] * w[j] * (-c.c2 * p + c.d2 * xi);
  if (i == j) h += -c.s * p + c.c2 * xi;
  return h.dot(v);
}

Vec3 log_coords(const Vec3& p, const Vec3& e1, const Vec3& e2, const Vec3& q, bool& ok) {
  const double theta = std::atan2(p.cross(q).norm(), p.dot(q));
  ok = theta < std::numbers::pi - 1e-3;
  const Vec3 v = q - std::cos(theta) * p;
  const double nv = v.norm();
  if (nv < 1e-300) return Vec3::Zero();
  const Vec3 t = theta * v / nv;
  return Vec3(t.dot(e1), t.dot(e2), 0.0);
}

Eigen::Matrix3d rotation(const Vec& g) {
  const Vec3 w(g[0], g[1], g[2]);
  const double angle = w.norm();
  if (angle < 1e-300) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

}  // namespace

Target parse_target(const std::string& name) {
  if (name == "circle") return Target::Circle;
  if (name == "sphere") return Target::Sphere;
  throw Error(ErrorKind::ConfigInvalid, "unknown harmonic target '" + name + "'");
}

const char* to_string(Target target) { return target == Target::Circle ? "circle" : "sphere"; }

Vec TorusMap::full_angle() const {
  if (target != Target::Circle) throw Error(ErrorKind::DimensionMismatch, "full_angle needs a circle-valued map");
  const Index n = grid.n();
  Vec out = angle;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out[i + n * j] += degree[0] * grid.node(i) + degree[1] * grid.node(j);
  return out;
}

TorusMap circle_map(const Grid& grid, const Eigen::Vector2i& degree, const MetricField& metric) {
  if (grid.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "harmonic maps live on a 2D grid");
  TorusMap m;
  m.target = Target::Circle;
  m.grid = grid;
  m.angle = Vec::Zero(grid.size());
  m.degree = degree;
  m.source_metric = metric;
  return m;
}

TorusMap equator_map(const Grid& grid, const Eigen::Vector2i& degree, const MetricField& metric) {
  TorusMap m = circle_map(grid, degree, metric);
  const Vec a = m.full_angle();
  m.target = Target::Sphere;
  m.angle = Vec();
  m.points.resize(grid.size(), 3);
  for (Index k = 0; k < grid.size(); ++k) m.points.row(k) << std::cos(a[k]), std::sin(a[k]), 0.0;
  return m;
}

TorusMap constant_sphere_map(const Grid& grid, const Vec3& value, const MetricField& metric) {
  TorusMap m = circle_map(grid, Eigen::Vector2i::Zero(), metric);
  m.target = Target::Sphere;
  m.angle = Vec();
  m.points = value.normalized().transpose().replicate(grid.size(), 1);
  return m;
}

SourceWeights source_weights(const Grid& grid, const MetricField& metric) {
  require_riemannian(metric);
  const Index n = grid.n();
  const Index m = grid.size();
  SourceWeights w;
  for (Vec* v : {&w.zeta, &w.a11, &w.a12, &w.a22, &w.bx, &w.by}) v->resize(m);
  auto adj = [](const Mat2& g) {
    Mat2 a;
    a << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
    return a;
  };
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Index k = i + n * j;
      const Vec2 q(grid.node(i), grid.node(j));
      const Mat2 g = metric.g(q);
      const double det = g.determinant();
      if (!(det > 1e-8)) throw Error(ErrorKind::ChartExit, "source metric degenerates at node " + std::to_string(k));
      const double zeta = std::sqrt(det);
      // A = adj(g) / zeta, dA = d adj(g) / zeta - A d zeta / zeta
      const Mat2 a = adj(g) / zeta;
      const Mat2 ginv = g.inverse();
      const std::array<Mat2, 2> dg = metric.dg(q);
      std::array<Mat2, 2> da;
      for (int c = 0; c < 2; ++c) {
        const double dzeta = 0.5 * zeta * (ginv * dg[c]).trace();
        da[c] = adj(dg[c]) / zeta - a * dzeta / zeta;
      }
      w.zeta[k] = zeta;
      w.a11[k] = a(0, 0);
      w.a12[k] = 0.5 * (a(0, 1) + a(1, 0));
      w.a22[k] = a(1, 1);
      w.bx[k] = da[0](0, 0) + da[1](1, 0);
      w.by[k] = da[0](0, 1) + da[1](1, 1);
    }
  return w;
}

Mat weighted_laplacian(const Grid& grid, const MetricField& metric, Scheme scheme) {
  return weighted_laplacian(derivative_matrices(grid, scheme), source_weights(grid, metric));
}

Mat weighted_laplacian(const DiffOperators& ops, const SourceWeights& w) {
  return -(w.a11.asDiagonal() * ops.dxx + 2.0 * w.a12.asDiagonal() * ops.dxy + w.a22.asDiagonal() * ops.dyy +
           w.bx.asDiagonal() * ops.dx + w.by.asDiagonal() * ops.dy);
}

namespace {

Mat ambient_values(const TorusMap& map) {
  if (map.target == Target::Circle) return map.full_angle();
  if (map.points.rows() != map.nodes() || map.points.cols() != 3)
    throw Error(ErrorKind::DimensionMismatch, "sphere map needs N^2 x 3 values");
  return map.points;
}

// div(A grad v) per column, expanded as A : D2 v + (div A) . grad v.
Mat divergence(const DiffOperators& ops, const SourceWeights& w, const Mat& v) {
  return w.a11.asDiagonal() * (ops.dxx * v) + 2.0 * w.a12.asDiagonal() * (ops.dxy * v) +
         w.a22.asDiagonal() * (ops.dyy * v) + w.bx.asDiagonal() * (ops.dx * v) + w.by.asDiagonal() * (ops.dy * v);
}

Vec map_density(const TorusMap& map, const DiffOperators& ops, const SourceWeights& w) {
  if (map.target == Target::Circle) {
    // derivatives of the full angle: degree plus periodic remainder
    Mat dx = ops.dx * map.angle, dy = ops.dy * map.angle;
    dx.array() += map.degree[0];
    dy.array() += map.degree[1];
    return energy_density(w, dx, dy);
  }
  const Mat v = ambient_values(map);
  return energy_density(w, ops.dx * v, ops.dy * v);
}

Mat map_divergence(const TorusMap& map, const DiffOperators& ops, const SourceWeights& w) {
  if (map.target == Target::Circle)
    return divergence(ops, w, map.angle) + map.degree[0] * w.bx + map.degree[1] * w.by;
  return divergence(ops, w, ambient_values(map));
}

}  // namespace

double dirichlet_energy(const TorusMap& map, Scheme scheme) {
  const DiffOperators ops = derivative_matrices(map.grid, scheme);
  const SourceWeights w = source_weights(map.grid, map.source_metric);
  return 0.5 * map.grid.weight() * map_density(map, ops, w).sum();
}

Mat tension_field(const TorusMap& map, Scheme scheme) {
  const DiffOperators ops = derivative_matrices(map.grid, scheme);
  const SourceWeights w = source_weights(map.grid, map.source_metric);
  Mat lap = map_divergence(map, ops, w);
  if (map.target == Target::Sphere) {
    for (Index k = 0; k < map.nodes(); ++k) {
      const Vec3 p = row3(map.points, k);
      const Vec3 l = row3(lap, k);
      lap.row(k) = (l - l.dot(p) * p).transpose();
    }
  }
  return w.zeta.cwiseInverse().asDiagonal() * lap;
}

Mat sphere_frame(const Mat& points) {
  Mat f(points.rows(), 6);
  for (Index k = 0; k < points.rows(); ++k) {
    const Vec3 p = row3(points, k);
    const Vec3 a = std::abs(p[2]) > 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
    const Vec3 e1 = (a - a.dot(p) * p).normalized();
    f.block<1, 3>(k, 0) = e1.transpose();
    f.block<1, 3>(k, 3) = p.cross(e1).transpose();
  }
  return f;
}

Mat harmonic_jacobi(const TorusMap& map, Scheme scheme) {
  const DiffOperators ops = derivative_matrices(map.grid, scheme);
  const SourceWeights w = source_weights(map.grid, map.source_metric);
  const Mat lw = weighted_laplacian(ops, w);
  if (map.target == Target::Circle) return lw;
  const Vec e = map_density(map, ops, w);
  const Mat frame = sphere_frame(map.points);
  const Index m = map.nodes();
  Mat j = Mat::Zero(2 * m, 2 * m);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Mat block = Mat::Zero(m, m);
      for (int c = 0; c < 3; ++c) {
        const Vec ea = frame.col(3 * a + c), eb = frame.col(3 * b + c);
        block += ea.asDiagonal() * lw * eb.asDiagonal();
      }
      if (a == b) block.diagonal() -= e;
      j.block(a * m, b * m, m, m) = block;
    }
  return j;
}

Mat target_killing_fields(const TorusMap& map) {
  const Index m = map.nodes();
  if (map.target == Target::Circle) return Mat::Ones(m, 1);
  const Mat frame = sphere_frame(map.points);
  Mat k(2 * m, 3);
  for (Index node = 0; node < m; ++node) {
    const Vec3 p = row3(map.points, node);
    for (int i = 0; i < 3; ++i) {
      const Vec3 v = Vec3::Unit(i).cross(p);
      k(node, i) = v.dot(frame.block<1, 3>(node, 0).transpose());
      k(m + node, i) = v.dot(frame.block<1, 3>(node, 3).transpose());
    }
  }
  return k;
}

TorusMap map_from_state(const Grid& grid, const HarmonicSetup& setup, const Vec& state, double t) {
  const MetricField metric = metric_family(setup.family, t, setup.eps);
  if (setup.target == Target::Circle) {
    TorusMap m = circle_map(grid, setup.degree, metric);
    if (state.size() != m.nodes()) throw Error(ErrorKind::DimensionMismatch, "circle state needs N^2 values");
    m.angle = state;
    return m;
  }
  TorusMap m = equator_map(grid, setup.degree, metric);
  m.points = sphere_state(m.points, sphere_frame(m.points), state).points;
  return m;
}

ProblemInstance make_harmonic_problem(const Grid& grid, const HarmonicSetup& setup) {
  if (grid.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "harmonic maps live on a 2D grid");
  require_riemannian(metric_family(setup.family, 0.0, setup.eps));
  const auto ops = std::make_shared<const DiffOperators>(derivative_matrices(grid, setup.scheme));
  const Index m = grid.size();
  const double weight = grid.weight();
  auto weights = [grid, setup](double t) { return source_weights(grid, metric_family(setup.family, t, setup.eps)); };
  auto lw_at = [ops](const SourceWeights& w) { return weighted_laplacian(*ops, w); };

  ProblemInstance p;
  p.name = std::string("harmonic-") + to_string(setup.target) + "-" + setup.family;
  p.parameter_range = Interval{-1.0 / std::max(setup.eps, 1e-12) + 1e-6, 1.0 / std::max(setup.eps, 1e-12) - 1e-6};

  if (setup.target == Target::Circle) {
    p.n = m;
    p.gram = GramPair::scaled_identity(m, weight);
    auto full = [grid, setup](const Vec& u) {
      TorusMap map = circle_map(grid, setup.degree, metric_family("flat_torus", 0.0));
      map.angle = u;
      return map;
    };
    p.functional = [=](const Vec& u, double t) {
      return 0.5 * weight * map_density(full(u), *ops, weights(t)).sum();
    };
    p.gradient = [=](const Vec& u, double t) {
      return Vec(-map_divergence(full(u), *ops, weights(t)));
    };
    p.linearization = [=](const Vec&, double t) { return lw_at(weights(t)); };
    p.group.dim = 1;
    p.group.abelian = true;
    p.group.orbit_tangent = [m](const Vec&) { return Mat(Mat::Ones(m, 1)); };
    p.group.local_action = [](const Vec& g, const Vec& u) -> std::optional<Vec> {
      return Vec(u.array() + g[0]);
    };
    return p;
  }

  const auto ref = std::make_shared<const Mat>(equator_map(grid, setup.degree, metric_family("flat_torus", 0.0)).points);
  const auto frame = std::make_shared<const Mat>(sphere_frame(*ref));
  p.n = 2 * m;
  p.gram = GramPair::scaled_identity(2 * m, weight);
  p.functional = [=](const Vec& w, double t) {
    const Mat pts = sphere_state(*ref, *frame, w).points;
    return 0.5 * weight * energy_density(weights(t), ops->dx * pts, ops->dy * pts).sum();
  };
  p.gradient = [=](const Vec& w, double t) {
    const SphereState st = sphere_state(*ref, *frame, w);
    const Mat lap = divergence(*ops, weights(t), st.points);
    Vec g(2 * m);
    g.head(m) = -(st.jac[0].cwiseProduct(lap)).rowwise().sum();
    g.tail(m) = -(st.jac[1].cwiseProduct(lap)).rowwise().sum();
    return g;
  };
  // d(-J^T L phi) = J^T (-L) J dw - <L phi, d^2 phi> dw
  p.linearization = [=](const Vec& w, double t) {
    const SourceWeights sw = weights(t);
    const SphereState st = sphere_state(*ref, *frame, w);
    const Mat lw = lw_at(sw);
    const Mat lap = -lw * st.points;
    Mat out = Mat::Zero(2 * m, 2 * m);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Mat block = Mat::Zero(m, m);
        for (int c = 0; c < 3; ++c) {
          const Vec ja = st.jac[a].col(c), jb = st.jac[b].col(c);
          block += ja.asDiagonal() * lw * jb.asDiagonal();
        }
        for (Index k = 0; k < m; ++k) block(k, k) -= exp_hessian(st, *ref, *frame, k, a, b, row3(lap, k));
        out.block(a * m, b * m, m, m) = block;
      }
    return out;
  };
  p.group.dim = 3;
  p.group.abelian = false;
  p.group.domain_radius = 1.0;
  p.group.orbit_tangent = [=](const Vec& w) {
    const SphereState st = sphere_state(*ref, *frame, w);
    Mat b(2 * m, 3);
    for (Index k = 0; k < m; ++k) {
      Eigen::Matrix<double, 3, 2> jk;
      jk.col(0) = row3(st.jac[0], k);
      jk.col(1) = row3(st.jac[1], k);
      const Eigen::Matrix2d gram = jk.transpose() * jk;
      const Vec3 p = row3(st.points, k);
      for (int i = 0; i < 3; ++i) {
        const Eigen::Vector2d c = gram.ldlt().solve(jk.transpose() * Vec3::Unit(i).cross(p));
        b(k, i) = c[0];
        b(m + k, i) = c[1];
      }
    }
    return b;
  };
  p.group.local_action = [=](const Vec& g, const Vec& w) -> std::optional<Vec> {
    const SphereState st = sphere_state(*ref, *frame, w);
    const Eigen::Matrix3d r = rotation(g);
    Vec out(2 * m);
    for (Index k = 0; k < m; ++k) {
      bool ok = true;
      const Vec3 c = log_coords(row3(*ref, k), frame->block<1, 3>(k, 0).transpose(),
                                frame->block<1, 3>(k, 3).transpose(), r * row3(st.points, k), ok);
      if (!ok) return std::nullopt;
      out[k] = c[0];
      out[m + k] = c[1];
    }
    return out;
  };
  return p;
}

}  // namespace eqc::harmonic
