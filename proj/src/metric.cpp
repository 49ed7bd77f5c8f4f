#include "eqcont/metric.hpp"

#include <algorithm>
#include <cmath>

namespace eqc {

namespace {

// Builds a diagonal metric diag(a(q), b(q)) from scalar profiles and
// their derivatives.
struct Profile {
  std::function<double(const Vec2&)> f;
  std::function<Vec2(const Vec2&)> df;
  std::function<Mat2(const Vec2&)> ddf;
};

Profile constant(double c) {
  return {[c](const Vec2&) { return c; }, [](const Vec2&) { return Vec2::Zero().eval(); },
          [](const Vec2&) { return Mat2::Zero().eval(); }};
}

MetricField diagonal(const std::string& name, const Profile& a, const Profile& b) {
  MetricField m;
  m.name = name;
  m.g = [a, b](const Vec2& q) {
    Mat2 out = Mat2::Zero();
    out(0, 0) = a.f(q);
    out(1, 1) = b.f(q);
    return out;
  };
  m.dg = [a, b](const Vec2& q) {
    const Vec2 da = a.df(q), db = b.df(q);
    std::array<Mat2, 2> out;
    for (int c = 0; c < 2; ++c) {
      out[c] = Mat2::Zero();
      out[c](0, 0) = da[c];
      out[c](1, 1) = db[c];
    }
    return out;
  };
  m.ddg = [a, b](const Vec2& q) {
    const Mat2 ha = a.ddf(q), hb = b.ddf(q);
    std::array<Mat2, 3> out;
    const int idx[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (int c = 0; c < 3; ++c) {
      out[c] = Mat2::Zero();
      out[c](0, 0) = ha(idx[c][0], idx[c][1]);
      out[c](1, 1) = hb(idx[c][0], idx[c][1]);
    }
    return out;
  };
  return m;
}

// 1 + amp cos x
Profile cosine_x(double amp) {
  return {[amp](const Vec2& q) { return 1.0 + amp * std::cos(q[0]); },
          [amp](const Vec2& q) { return Vec2(-amp * std::sin(q[0]), 0.0); },
          [amp](const Vec2& q) {
            Mat2 h = Mat2::Zero();
            h(0, 0) = -amp * std::cos(q[0]);
            return h;
          }};
}

}  // namespace

std::array<Mat2, 2> christoffel(const MetricField& metric, const Vec2& q) {
  const Mat2 ginv = metric.g(q).inverse();
  const std::array<Mat2, 2> dg = metric.dg(q);
  // lowered symbols Gamma_{k,ij} = 1/2 (d_i g_kj + d_j g_ki - d_k g_ij)
  std::array<Mat2, 2> low;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) low[k](i, j) = 0.5 * (dg[i](k, j) + dg[j](k, i) - dg[k](i, j));
  std::array<Mat2, 2> out;
  for (int k = 0; k < 2; ++k) out[k] = ginv(k, 0) * low[0] + ginv(k, 1) * low[1];
  return out;
}

std::array<std::array<Mat2, 2>, 2> christoffel_derivative(const MetricField& metric, const Vec2& q) {
  const Mat2 ginv = metric.g(q).inverse();
  const std::array<Mat2, 2> dg = metric.dg(q);
  const std::array<Mat2, 3> h = metric.ddg(q);
  auto ddg = [&](int a, int b) -> const Mat2& { return a == b ? h[a == 0 ? 0 : 2] : h[1]; };
  std::array<std::array<Mat2, 2>, 2> out;
  for (int c = 0; c < 2; ++c) {
    const Mat2 dginv = -ginv * dg[c] * ginv;
    std::array<Mat2, 2> low, dlow;
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          low[k](i, j) = 0.5 * (dg[i](k, j) + dg[j](k, i) - dg[k](i, j));
          dlow[k](i, j) = 0.5 * (ddg(c, i)(k, j) + ddg(c, j)(k, i) - ddg(c, k)(i, j));
        }
    for (int k = 0; k < 2; ++k)
      out[c][k] = dginv(k, 0) * low[0] + dginv(k, 1) * low[1] + ginv(k, 0) * dlow[0] + ginv(k, 1) * dlow[1];
  }
  return out;
}

std::array<std::array<Mat2, 2>, 2> riemann(const MetricField& metric, const Vec2& q) {
  const std::array<Mat2, 2> gam = christoffel(metric, q);
  const auto dgam = christoffel_derivative(metric, q);
  std::array<std::array<Mat2, 2>, 2> r;
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          double v = dgam[i][l](j, k) - dgam[j][l](i, k);
          for (int m = 0; m < 2; ++m) v += gam[l](i, m) * gam[m](j, k) - gam[l](j, m) * gam[m](i, k);
          r[l][i](j, k) = v;
        }
  return r;
}

void check_nondegenerate(const MetricField& metric, const Vec2& q) {
  const double det = metric.g(q).determinant();
  if (!(std::abs(det) >= 1e-8))
    throw Error(ErrorKind::ChartExit, "metric " + metric.name + " is degenerate at (" + std::to_string(q[0]) + ", " +
                                          std::to_string(q[1]) + ")");
}

const std::vector<std::string>& metric_family_names() {
  static const std::vector<std::string> names = {"flat_torus",   "conformal_torus", "lorentz_flat",
                                                 "channel_torus", "wavy_channel",    "warped_torus"};
  return names;
}

MetricField metric_family(const std::string& name, double t, double eps) {
  if (name == "flat_torus") return diagonal(name, constant(1.0), constant(1.0));
  if (name == "lorentz_flat") {
    MetricField m = diagonal(name, constant(1.0), constant(-1.0));
    m.signature = Signature::Lorentzian;
    return m;
  }
  if (name == "conformal_torus") {
    const Profile p = cosine_x(t * eps);
    return diagonal(name, p, p);
  }
  if (name == "channel_torus") return diagonal(name, constant(1.0), cosine_x(t * eps));
  if (name == "wavy_channel") {
    const double a = 0.3 * t;
    Profile p;
    p.f = [=](const Vec2& q) { return 1.0 + eps * std::cos(q[0] - a * std::sin(q[1])); };
    p.df = [=](const Vec2& q) {
      const double s = std::sin(q[0] - a * std::sin(q[1]));
      return Vec2(-eps * s, eps * s * a * std::cos(q[1]));
    };
    p.ddf = [=](const Vec2& q) {
      const double psi = q[0] - a * std::sin(q[1]);
      const double c = std::cos(psi), s = std::sin(psi);
      const double py = -a * std::cos(q[1]);  // d psi / dy
      Mat2 h;
      h(0, 0) = -eps * c;
      h(0, 1) = h(1, 0) = -eps * c * py;
      h(1, 1) = -eps * (c * py * py + s * a * std::sin(q[1]));
      return h;
    };
    return diagonal(name, constant(1.0), p);
  }
  if (name == "warped_torus") {
    const double a = t * eps;
    Profile p;
    p.f = [a](const Vec2& q) { return std::pow(1.0 + a * std::cos(q[0]), 2); };
    p.df = [a](const Vec2& q) { return Vec2(-2.0 * a * std::sin(q[0]) * (1.0 + a * std::cos(q[0])), 0.0); };
    p.ddf = [a](const Vec2& q) {
      const double f = 1.0 + a * std::cos(q[0]);
      const double fp = -a * std::sin(q[0]);
      const double fpp = -a * std::cos(q[0]);
      Mat2 h = Mat2::Zero();
      h(0, 0) = 2.0 * (fp * fp + f * fpp);
      return h;
    };
    return diagonal(name, constant(1.0), p);
  }
  throw Error(ErrorKind::UnknownFamily, "unknown metric family '" + name + "'");
}

}  // namespace eqc
