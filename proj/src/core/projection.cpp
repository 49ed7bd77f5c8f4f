#include "eqcont/core.hpp"

#include <cmath>
#include <numbers>

namespace eqc {

namespace {

Vec expand(const SliceBasis& slice, const Vec& g_reduced) {
  Vec g = Vec::Zero(slice.group_dim);
  for (std::size_t k = 0; k < slice.generators.size(); ++k) g[slice.generators[k]] = g_reduced[static_cast<Index>(k)];
  return g;
}

std::optional<Vec> try_residual(const ProblemInstance& problem, const Vec& x, const SliceBasis& slice,
                                const Vec& g_reduced) {
  const Vec g = expand(slice, g_reduced);
  if (g.norm() > problem.group.domain_radius) return std::nullopt;
  const std::optional<Vec> moved = problem.group.local_action(g, x);
  if (!moved) return std::nullopt;
  return Vec(slice.y_basis.transpose() * (problem.gram.mass * (*moved - slice.x0)));
}

}  // namespace

Vec slice_residual(const ProblemInstance& problem, const Vec& x, const SliceBasis& slice, const Vec& g_reduced) {
  const std::optional<Vec> f = try_residual(problem, x, slice, g_reduced);
  if (!f) throw Error(ErrorKind::OutOfActionDomain, "group element outside the local action domain");
  return *f;
}

ProjectionResult slice_project(const ProblemInstance& problem, const Vec& x, const SliceBasis& slice,
                               const SolverOptions& opts) {
  const Index r = slice.effective_rank();
  ProjectionResult out;
  if (r == 0) {
    out.g = Vec::Zero(slice.group_dim);
    out.x_on_slice = x;
    return out;
  }
  Vec g = Vec::Zero(r);
  Vec f = slice_residual(problem, x, slice, g);
  const double fd_step = 1e-7;
  int it = 0;
  for (; it < opts.max_iter && f.lpNorm<Eigen::Infinity>() > 1e-3 * opts.projection_tol; ++it) {
    Mat jac(r, r);
    for (Index k = 0; k < r; ++k) {
      Vec gp = g, gm = g;
      gp[k] += fd_step;
      gm[k] -= fd_step;
      const std::optional<Vec> fp = try_residual(problem, x, slice, gp);
      const std::optional<Vec> fm = try_residual(problem, x, slice, gm);
      if (fp && fm) {
        jac.col(k) = (*fp - *fm) / (2.0 * fd_step);
      } else if (fp) {
        jac.col(k) = (*fp - f) / fd_step;
      } else if (fm) {
        jac.col(k) = (f - *fm) / fd_step;
      } else {
        throw Error(ErrorKind::OutOfActionDomain, "local action undefined around the current group element");
      }
    }
    const Vec dg = jac.fullPivLu().solve(-f);
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 20; ++k, alpha *= 0.5) {
      const std::optional<Vec> ft = try_residual(problem, x, slice, g + alpha * dg);
      if (ft && ft->norm() <= (1.0 - 1e-4 * alpha) * f.norm()) {
        g += alpha * dg;
        f = *ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.iterations = it;
  out.residual = f.lpNorm<Eigen::Infinity>();
  if (out.residual > opts.projection_tol)
    throw Error(ErrorKind::NoConvergence, "slice projection stalled with residual " + std::to_string(out.residual));
  out.g = expand(slice, g);
  out.x_on_slice = *problem.group.local_action(out.g, x);
  return out;
}

int winding_degree(const ProblemInstance& problem, const Vec& x, const SliceBasis& slice, double radius,
                   int samples) {
  const Index r = slice.effective_rank();
  if (r < 1 || r > 2)
    throw Error(ErrorKind::UnsupportedDimension,
                "winding degree needs effective group dimension 1 or 2, got " + std::to_string(r));
  if (radius > problem.group.domain_radius)
    throw Error(ErrorKind::OutOfActionDomain, "contour radius exceeds the action domain");
  auto eval = [&](const Vec& g) {
    const Vec f = slice_residual(problem, x, slice, g);
    if (f.norm() < 1e-14) throw Error(ErrorKind::ResidualVanishesOnContour, "slice residual vanishes on the contour");
    return f;
  };
  if (r == 1) {
    const double fp = eval(Vec::Constant(1, radius))[0];
    const double fm = eval(Vec::Constant(1, -radius))[0];
    const int sp = fp > 0.0 ? 1 : -1;
    const int sm = fm > 0.0 ? 1 : -1;
    return (sp - sm) / 2;
  }
  if (samples < 8) samples = 8;
  double total = 0.0;
  Vec g(2);
  g << radius, 0.0;
  Vec prev = eval(g);
  for (int k = 1; k <= samples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / samples;
    g << radius * std::cos(t), radius * std::sin(t);
    const Vec cur = eval(g);
    double d = std::atan2(cur[1], cur[0]) - std::atan2(prev[1], prev[0]);
    while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    while (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
    total += d;
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

double equivariance_residual(const ProblemInstance& problem, const Vec& x, double lambda) {
  const Mat b = problem.group.orbit_tangent(x);
  if (b.cols() == 0) return 0.0;
  return (b.transpose() * (problem.gram.pairing * problem.gradient(x, lambda))).lpNorm<Eigen::Infinity>();
}

double gradient_consistency(const ProblemInstance& problem, const Vec& x, const Vec& v, double lambda, double step) {
  const double paired = v.dot(problem.gram.pairing * problem.gradient(x, lambda));
  const double fd = (problem.functional(x + step * v, lambda) - problem.functional(x - step * v, lambda)) / (2.0 * step);
  return std::abs(paired - fd) / (1.0 + std::abs(fd));
}

}  // namespace eqc
