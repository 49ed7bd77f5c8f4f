#include "eqcont/core.hpp"
#include "eqcont/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eqc {

namespace {

// M = R^T R with R upper triangular.
struct MassFactor {
  Mat r;
  Mat r_inv;
};

MassFactor factor(const GramPair& gram) {
  Eigen::LLT<Mat> llt(gram.mass);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::Sizing, "mass matrix is not positive definite");
  MassFactor f;
  f.r = llt.matrixU();
  f.r_inv = f.r.triangularView<Eigen::Upper>().solve(Mat::Identity(f.r.rows(), f.r.cols()));
  return f;
}

// M-orthonormal basis for the column span of `a` (assumed full rank).
Mat m_orthonormalize(const Mat& a, const MassFactor& f) {
  if (a.cols() == 0) return a;
  Eigen::HouseholderQR<Mat> qr(f.r * a);
  const Mat q = qr.householderQ() * Mat::Identity(a.rows(), a.cols());
  return f.r_inv * q;
}

}  // namespace

GramPair GramPair::scaled_identity(Index n, double weight) {
  GramPair g;
  g.mass = weight * Mat::Identity(n, n);
  g.pairing = g.mass;
  return g;
}

void GramPair::validate() const {
  if (mass.rows() != mass.cols() || pairing.rows() != mass.rows() || pairing.cols() != mass.cols())
    throw Error(ErrorKind::DimensionMismatch, "gram matrices must be square and of equal size");
  if ((mass - mass.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + mass.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::Sizing, "mass matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(mass, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw Error(ErrorKind::Sizing, "mass matrix is not positive definite");
}

GroupModel GroupModel::trivial() {
  GroupModel g;
  g.dim = 0;
  g.orbit_tangent = [](const Vec& x) { return Mat(x.size(), 0); };
  g.local_action = [](const Vec&, const Vec& x) -> std::optional<Vec> { return x; };
  return g;
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Nondegenerate: return "nondegenerate";
    case Verdict::Degenerate: return "degenerate";
    case Verdict::Obstructed: return "obstructed";
  }
  return "unknown";
}

Mat fd_linearization(const ProblemInstance& problem, const Vec& x, double lambda) {
  const double step = 1e-6 * (1.0 + x.lpNorm<Eigen::Infinity>());
  auto field = [&problem, lambda](const Vec& y) { return problem.gradient(y, lambda); };
  return kernels::fd_jacobian(field, x, step);
}

Linearization assemble_linearization(const ProblemInstance& problem, const Vec& x0, double lambda0,
                                     const SolverOptions& opts) {
  if (x0.size() != problem.n)
    throw Error(ErrorKind::DimensionMismatch,
                "state has size " + std::to_string(x0.size()) + ", problem expects " + std::to_string(problem.n));
  Linearization lin;
  lin.residual = problem.gradient(x0, lambda0).lpNorm<Eigen::Infinity>();
  lin.off_critical = lin.residual > opts.residual_tol;
  if (problem.linearization) {
    lin.matrix = problem.linearization(x0, lambda0);
    lin.analytic = true;
  } else {
    lin.matrix = fd_linearization(problem, x0, lambda0);
  }
  if (lin.matrix.rows() != problem.n || lin.matrix.cols() != problem.n)
    throw Error(ErrorKind::DimensionMismatch, "linearization has the wrong shape");
  return lin;
}

KernelResult kernel_basis(const Mat& linear, const GramPair& gram, double svd_tol) {
  if (linear.rows() != linear.cols()) throw Error(ErrorKind::DimensionMismatch, "kernel_basis expects a square matrix");
  if (gram.size() != linear.rows()) throw Error(ErrorKind::DimensionMismatch, "gram size differs from operator size");
  const MassFactor f = factor(gram);
  const Mat op = f.r * linear * f.r_inv;
  Eigen::BDCSVD<Mat> svd(op, Eigen::ComputeFullV);
  KernelResult out;
  out.singular_values = svd.singularValues();
  const Index n = linear.rows();
  if (n == 0) return out;
  const double smax = out.singular_values[0];
  const double threshold = svd_tol * smax;
  Index kdim = 0;
  for (Index i = n - 1; i >= 0 && out.singular_values[i] <= threshold; --i) ++kdim;
  for (Index i = 0; i < n; ++i) {
    const double s = out.singular_values[i];
    if (s > threshold / 10.0 && s <= threshold * 10.0)
      throw Error(ErrorKind::AmbiguousKernel, "singular value " + std::to_string(s) +
                                                  " lies within a factor 10 of the kernel threshold " +
                                                  std::to_string(threshold));
  }
  if (kdim > 0 && kdim < n) {
    const double above = out.singular_values[n - kdim - 1];
    const double below = std::max(out.singular_values[n - kdim], std::numeric_limits<double>::min());
    out.gap = above / below;
  }
  out.basis = f.r_inv * svd.matrixV().rightCols(kdim);
  return out;
}

OrbitRank effective_orbit(const Mat& orbit, const GramPair& gram, double rank_tol) {
  OrbitRank out;
  if (orbit.cols() == 0) {
    out.columns = Mat(orbit.rows(), 0);
    return out;
  }
  double scale = 0.0;
  for (Index j = 0; j < orbit.cols(); ++j) scale = std::max(scale, std::sqrt(gram.inner(orbit.col(j), orbit.col(j))));
  std::vector<Vec> accepted;
  for (Index j = 0; j < orbit.cols(); ++j) {
    Vec v = orbit.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : accepted) v -= gram.inner(q, v) * q;
    const double norm = std::sqrt(std::max(0.0, gram.inner(v, v)));
    if (scale > 0.0 && norm > rank_tol * scale) {
      accepted.push_back(v / norm);
      out.generators.push_back(j);
    }
  }
  out.columns = Mat(orbit.rows(), out.rank());
  for (Index k = 0; k < out.rank(); ++k) out.columns.col(k) = orbit.col(out.generators[k]);
  return out;
}

double principal_angle(const Mat& a, const Mat& b, const GramPair& gram) {
  if (a.cols() != b.cols()) return 0.5 * std::numbers::pi;
  if (a.cols() == 0) return 0.0;
  const MassFactor f = factor(gram);
  const Mat qa = m_orthonormalize(a, f);
  const Mat qb = m_orthonormalize(b, f);
  // sine of the largest angle: norm of the part of span(a) outside span(b)
  const Mat resid = f.r * (qa - qb * (qb.transpose() * gram.mass * qa));
  Eigen::JacobiSVD<Mat> svd(resid);
  const double s = std::min(1.0, svd.singularValues()[0]);
  return std::asin(s);
}

NondegeneracyReport nondegeneracy_check(const KernelResult& kernel, const Mat& orbit, const GramPair& gram,
                                        double angle_tol, double rank_tol) {
  NondegeneracyReport rep;
  rep.singular_values = kernel.singular_values;
  rep.kernel_dim = kernel.dim();
  rep.group_dim = orbit.cols();
  const OrbitRank eff = effective_orbit(orbit, gram, rank_tol);
  rep.orbit_rank = eff.rank();
  rep.principal_angle = principal_angle(kernel.basis, eff.columns, gram);
  const bool ok = rep.kernel_dim == rep.orbit_rank && rep.principal_angle <= angle_tol;
  rep.verdict = ok ? Verdict::Nondegenerate : Verdict::Degenerate;
  return rep;
}

}  // namespace eqc
