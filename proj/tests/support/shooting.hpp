#pragma once

// Independent geodesic oracle: RK4 integration of q'' = -Gamma(q', q') with a
// Gauss-Newton periodicity solve. Shares only MetricField/christoffel with
// the library, not the spectral discretization.

#include "eqcont/metric.hpp"

#include <cmath>
#include <numbers>

namespace oracle {

using eqc::Mat2;
using eqc::Vec2;

struct Shot {
  Eigen::MatrixXd nodes;  // n x 2 positions at theta_k
  Eigen::Vector4d end;    // q(2pi), q'(2pi)
  bool ok = false;
};

inline Eigen::Vector4d geodesic_rhs(const eqc::MetricField& m, const Eigen::Vector4d& s) {
  const Vec2 q = s.head<2>(), v = s.tail<2>();
  const auto gam = eqc::christoffel(m, q);
  Eigen::Vector4d out;
  out.head<2>() = v;
  out[2] = -v.dot(gam[0] * v);
  out[3] = -v.dot(gam[1] * v);
  return out;
}

inline Shot shoot(const eqc::MetricField& m, const Vec2& q0, const Vec2& v0, int n, int substeps) {
  Shot shot;
  shot.nodes.resize(n, 2);
  Eigen::Vector4d s;
  s << q0, v0;
  const double dt = 2.0 * std::numbers::pi / (n * substeps);
  for (int k = 0; k < n; ++k) {
    shot.nodes.row(k) = s.head<2>().transpose();
    for (int j = 0; j < substeps; ++j) {
      const Eigen::Vector4d k1 = geodesic_rhs(m, s);
      const Eigen::Vector4d k2 = geodesic_rhs(m, s + 0.5 * dt * k1);
      const Eigen::Vector4d k3 = geodesic_rhs(m, s + 0.5 * dt * k2);
      const Eigen::Vector4d k4 = geodesic_rhs(m, s + dt * k3);
      s += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  shot.end = s;
  shot.ok = s.allFinite();
  return shot;
}

/// Closed geodesic with winding w through a point with y(0) = y0 fixed.
/// Unknowns: x(0), x'(0), y'(0). Returns nodal positions.
inline Shot periodic_geodesic(const eqc::MetricField& m, double y0, Eigen::Vector3d z, const Eigen::Vector2i& w,
                              int n, int substeps = 16) {
  const double two_pi = 2.0 * std::numbers::pi;
  auto residual = [&](const Eigen::Vector3d& u) {
    const Shot s = shoot(m, Vec2(u[0], y0), Vec2(u[1], u[2]), n, substeps);
    Eigen::Vector4d r;
    r[0] = s.end[0] - u[0] - two_pi * w[0];
    r[1] = s.end[1] - y0 - two_pi * w[1];
    r[2] = s.end[2] - u[1];
    r[3] = s.end[3] - u[2];
    return r;
  };
  for (int it = 0; it < 30; ++it) {
    const Eigen::Vector4d r = residual(z);
    if (r.lpNorm<Eigen::Infinity>() < 1e-13) break;
    Eigen::Matrix<double, 4, 3> jac;
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d zp = z, zm = z;
      zp[c] += 1e-7;
      zm[c] -= 1e-7;
      jac.col(c) = (residual(zp) - residual(zm)) / 2e-7;
    }
    z -= jac.colPivHouseholderQr().solve(r);
  }
  Shot out = shoot(m, Vec2(z[0], y0), Vec2(z[1], z[2]), n, substeps);
  out.ok = residual(z).lpNorm<Eigen::Infinity>() < 1e-10;
  return out;
}

}  // namespace oracle
