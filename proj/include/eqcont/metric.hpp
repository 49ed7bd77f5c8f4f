#pragma once

#include "eqcont/types.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace eqc {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class Signature { Riemannian, Lorentzian };

/// A metric on the periodic (x, y) chart of the 2-torus with analytic
/// first and second derivatives.
struct MetricField {
  std::string name;
  Signature signature = Signature::Riemannian;
  std::function<Mat2(const Vec2&)> g;
  std::function<std::array<Mat2, 2>(const Vec2&)> dg;   // d/dx, d/dy
  std::function<std::array<Mat2, 3>(const Vec2&)> ddg;  // xx, xy, yy
  /// Auxiliary Riemannian metric used in the pairing and T_g = g_R^-1 g.
  Mat2 g_r = Mat2::Identity();

  Mat2 tensor(const Vec2& q) const { return g_r.inverse() * g(q); }
};

/// Christoffel symbols of the second kind: gamma[k](i, j) = Gamma^k_ij.
std::array<Mat2, 2> christoffel(const MetricField& metric, const Vec2& q);

/// d/dq_c Gamma^k_ij, indexed [c][k](i, j).
std::array<std::array<Mat2, 2>, 2> christoffel_derivative(const MetricField& metric, const Vec2& q);

/// Riemann tensor R(d_i, d_j) d_k = R^l_ijk d_l, returned as r[l][i](j, k).
std::array<std::array<Mat2, 2>, 2> riemann(const MetricField& metric, const Vec2& q);

/// Throws ChartExit when |det g| < 1e-8 at q.
void check_nondegenerate(const MetricField& metric, const Vec2& q);

/// One-parameter families t -> g_t. `eps` is the deformation amplitude.
///   flat_torus       identity
///   conformal_torus  (1 + t eps cos x) I
///   lorentz_flat     diag(1, -1)
///   channel_torus    diag(1, 1 + t eps cos x)
///   wavy_channel     diag(1, 1 + eps cos(x - 0.3 t sin y))
///   warped_torus     diag(1, (1 + t eps cos x)^2)
MetricField metric_family(const std::string& name, double t, double eps = 0.1);

const std::vector<std::string>& metric_family_names();

}  // namespace eqc
