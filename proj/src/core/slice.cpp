#include "eqcont/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eqc {

namespace {

Mat upper_factor(const GramPair& gram) {
  Eigen::LLT<Mat> llt(gram.mass);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::Sizing, "mass matrix is not positive definite");
  return llt.matrixU();
}

Mat jacobian(const ProblemInstance& problem, const Vec& x, double lambda) {
  return problem.linearization ? problem.linearization(x, lambda) : fd_linearization(problem, x, lambda);
}

double condition_number(const Mat& a) {
  if (a.rows() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

struct BorderedState {
  Vec s;
  Vec a;
};

Vec bordered_residual(const ProblemInstance& problem, const SliceBasis& slice, double lambda, const BorderedState& z) {
  const Vec x = slice.x0 + slice.s_basis * z.s;
  return problem.gradient(x, lambda) + slice.y_basis * z.a;
}

Mat bordered_matrix(const ProblemInstance& problem, const SliceBasis& slice, const Vec& x, double lambda) {
  const Index n = problem.n;
  const Index r = slice.effective_rank();
  Mat m(n, n);
  m.leftCols(n - r) = jacobian(problem, x, lambda) * slice.s_basis;
  m.rightCols(r) = slice.y_basis;
  return m;
}

Vec solve_linear(const Mat& m, const Vec& rhs) {
  Eigen::PartialPivLU<Mat> lu(m);
  if (!(lu.rcond() > 1e-15)) throw Error(ErrorKind::SingularBorderedMatrix, "bordered matrix is numerically singular");
  return lu.solve(rhs);
}

}  // namespace

const char* to_string(BranchStatus status) {
  switch (status) {
    case BranchStatus::Completed: return "completed";
    case BranchStatus::Obstructed: return "obstructed";
    case BranchStatus::DegenerateEncounter: return "degenerate_encounter";
  }
  return "unknown";
}

SliceBasis build_slice(const ProblemInstance& problem, const Vec& x0, double lambda0, const SolverOptions& opts) {
  const Linearization lin = assemble_linearization(problem, x0, lambda0, opts);
  const KernelResult kernel = kernel_basis(lin.matrix, problem.gram, opts.svd_tol);
  const Mat orbit = problem.group.orbit_tangent(x0);
  if (orbit.rows() != problem.n || orbit.cols() != problem.group.dim)
    throw Error(ErrorKind::DimensionMismatch, "orbit tangent has the wrong shape");

  SliceBasis slice;
  slice.x0 = x0;
  slice.lambda0 = lambda0;
  slice.orbit_basis = orbit;
  slice.group_dim = problem.group.dim;
  slice.report = nondegeneracy_check(kernel, orbit, problem.gram, opts.angle_tol, opts.rank_tol);
  if (slice.report.verdict != Verdict::Nondegenerate) {
    std::ostringstream msg;
    msg << "kernel dimension " << slice.report.kernel_dim << " vs orbit rank " << slice.report.orbit_rank
        << ", principal angle " << slice.report.principal_angle;
    throw Error(ErrorKind::DegenerateOrbit, msg.str());
  }

  const OrbitRank eff = effective_orbit(orbit, problem.gram, opts.rank_tol);
  slice.generators = eff.generators;
  slice.y_basis = eff.columns;
  slice.rank_warning = eff.rank() < problem.group.dim;

  const Index n = problem.n;
  const Index r = eff.rank();
  const Mat upper = upper_factor(problem.gram);
  const Mat upper_inv = upper.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  if (r == 0) {
    slice.s_basis = upper_inv;
  } else {
    Eigen::HouseholderQR<Mat> qr(upper * eff.columns);
    const Mat q = qr.householderQ();
    slice.s_basis = upper_inv * q.rightCols(n - r);
  }

  Mat bordered(n, n);
  bordered.leftCols(n - r) = lin.matrix * slice.s_basis;
  bordered.rightCols(r) = slice.y_basis;
  slice.condition = condition_number(bordered);
  if (slice.condition > opts.max_condition)
    throw Error(ErrorKind::IllPosedComplement,
                "bordered matrix condition number " + std::to_string(slice.condition) + " exceeds limit");
  return slice;
}

BorderedSolution solve_bordered(const ProblemInstance& problem, const SliceBasis& slice, double lambda,
                                const Vec& x_guess, const SolverOptions& opts) {
  if (x_guess.size() != problem.n) throw Error(ErrorKind::DimensionMismatch, "guess has the wrong size");
  const Index r = slice.effective_rank();
  BorderedSolution sol;
  BorderedState z;
  const Vec offset = x_guess - slice.x0;
  z.s = slice.s_basis.transpose() * (problem.gram.mass * offset);
  z.a = Vec::Zero(r);
  const Vec back = slice.s_basis * z.s;
  sol.guess_projected = (back - offset).lpNorm<Eigen::Infinity>() > 1e-10 * (1.0 + offset.lpNorm<Eigen::Infinity>());

  Vec f = bordered_residual(problem, slice, lambda, z);
  double fnorm = f.norm();
  int it = 0;
  for (; it < opts.max_iter && f.lpNorm<Eigen::Infinity>() > opts.newton_tol; ++it) {
    const Vec x = slice.x0 + slice.s_basis * z.s;
    const Vec dz = solve_linear(bordered_matrix(problem, slice, x, lambda), -f);
    const Index ns = z.s.size();
    double alpha = 1.0;
    BorderedState trial;
    Vec ftrial;
    // Armijo backtracking on the residual norm
    for (int k = 0; k < 12; ++k, alpha *= 0.5) {
      trial.s = z.s + alpha * dz.head(ns);
      trial.a = z.a + alpha * dz.tail(r);
      ftrial = bordered_residual(problem, slice, lambda, trial);
      if (ftrial.allFinite() && ftrial.norm() <= (1.0 - 1e-4 * alpha) * fnorm) break;
    }
    if (!ftrial.allFinite()) throw Error(ErrorKind::NoConvergence, "residual became non-finite");
    z = trial;
    f = ftrial;
    fnorm = f.norm();
  }
  sol.iterations = it;
  sol.residual = f.lpNorm<Eigen::Infinity>();
  if (sol.residual > opts.newton_tol)
    throw Error(ErrorKind::NoConvergence,
                "bordered Newton stopped after " + std::to_string(it) + " iterations, residual " +
                    std::to_string(sol.residual));
  sol.x = slice.x0 + slice.s_basis * z.s;
  sol.multipliers = z.a;
  return sol;
}

namespace {

// d/dlambda of the bordered unknowns (s, a) along the branch.
Vec branch_tangent(const ProblemInstance& problem, const SliceBasis& slice, const Vec& x, double lambda) {
  const double dl = 1e-6 * (1.0 + std::abs(lambda));
  const Vec dfdl = (problem.gradient(x, lambda + dl) - problem.gradient(x, lambda - dl)) / (2.0 * dl);
  return solve_linear(bordered_matrix(problem, slice, x, lambda), -dfdl);
}

struct StepOutcome {
  bool converged = false;
  BorderedSolution sol;
};

StepOutcome corrector(const ProblemInstance& problem, const SliceBasis& slice, const Vec& x, double lambda,
                      const Vec& tangent, double step, const SolverOptions& opts) {
  StepOutcome out;
  const Index ns = slice.s_basis.cols();
  const Vec x_pred = x + slice.s_basis * (step * tangent.head(ns));
  try {
    out.sol = solve_bordered(problem, slice, lambda + step, x_pred, opts);
    out.converged = true;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoConvergence && e.kind() != ErrorKind::SingularBorderedMatrix) throw;
  }
  return out;
}

Index sample_kernel_dim(const ProblemInstance& problem, const Vec& x, double lambda, const SolverOptions& opts,
                        NondegeneracyReport* report) {
  try {
    const KernelResult k = kernel_basis(jacobian(problem, x, lambda), problem.gram, opts.svd_tol);
    if (report)
      *report = nondegeneracy_check(k, problem.group.orbit_tangent(x), problem.gram, opts.angle_tol, opts.rank_tol);
    return k.dim();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AmbiguousKernel) throw;
    if (report) report->verdict = Verdict::Degenerate;
    return -1;
  }
}

}  // namespace

Branch continue_branch(const ProblemInstance& problem, const Vec& x0, double lambda0, double lambda_target,
                       const StepPolicy& policy, const SolverOptions& opts) {
  const double r0 = problem.gradient(x0, lambda0).lpNorm<Eigen::Infinity>();
  if (r0 > policy.critical_tol)
    throw Error(ErrorKind::InitialPointNotCritical, "initial residual " + std::to_string(r0));
  if (policy.steps < 1) throw Error(ErrorKind::ConfigInvalid, "step policy needs at least one step");

  Branch branch;
  branch.slice = build_slice(problem, x0, lambda0, opts);
  const SliceBasis& slice = branch.slice;
  const Index r = slice.effective_rank();

  BranchSample first;
  first.lambda = lambda0;
  first.x = x0;
  first.multipliers = Vec::Zero(r);
  first.residual = r0;
  first.kernel_dim = slice.report.kernel_dim;
  branch.samples.push_back(first);
  if (lambda_target == lambda0) return branch;

  const double direction = lambda_target > lambda0 ? 1.0 : -1.0;
  const double nominal = std::abs(lambda_target - lambda0) / policy.steps;
  double step = nominal;
  Vec x = x0;
  double lambda = lambda0;

  while (direction * (lambda_target - lambda) > 0.0) {
    const Vec tangent = branch_tangent(problem, slice, x, lambda);
    branch.samples.back().sensitivity = std::sqrt(
        std::max(0.0, tangent.head(slice.s_basis.cols()).squaredNorm()));

    const double remaining = std::abs(lambda_target - lambda);
    double h = std::min(step, remaining);
    StepOutcome out = corrector(problem, slice, x, lambda, tangent, direction * h, opts);
    while (!out.converged) {
      h *= 0.5;
      if (h < policy.min_step)
        throw Error(ErrorKind::StepUnderflow, "continuation step fell below " + std::to_string(policy.min_step) +
                                                  " at lambda = " + std::to_string(lambda));
      out = corrector(problem, slice, x, lambda, tangent, direction * h, opts);
    }

    const double amax = out.sol.multipliers.size() ? out.sol.multipliers.cwiseAbs().maxCoeff() : 0.0;
    if (amax > policy.multiplier_tol) {
      // confirm at half the step before declaring an obstruction
      const StepOutcome half = corrector(problem, slice, x, lambda, tangent, 0.5 * direction * h, opts);
      const double ahalf =
          half.converged && half.sol.multipliers.size() ? half.sol.multipliers.cwiseAbs().maxCoeff() : amax;
      if (!half.converged || ahalf > policy.multiplier_tol) {
        BranchSample s;
        s.lambda = lambda + direction * h;
        s.x = out.sol.x;
        s.multipliers = out.sol.multipliers;
        s.residual = out.sol.residual;
        s.kernel_dim = policy.track_kernel ? sample_kernel_dim(problem, s.x, s.lambda, opts, nullptr) : -1;
        branch.samples.push_back(s);
        branch.status = BranchStatus::Obstructed;
        std::ostringstream msg;
        msg << "kernel multipliers do not vanish: max|a| = " << amax << " at lambda = " << s.lambda
            << " (tolerance " << policy.multiplier_tol << ")";
        branch.message = msg.str();
        return branch;
      }
      h *= 0.5;
      out = half;
    }

    lambda = (h == remaining) ? lambda_target : lambda + direction * h;
    x = out.sol.x;
    BranchSample s;
    s.lambda = lambda;
    s.x = x;
    s.multipliers = out.sol.multipliers;
    s.residual = out.sol.residual;
    NondegeneracyReport rep;
    s.kernel_dim = policy.track_kernel ? sample_kernel_dim(problem, x, lambda, opts, &rep) : -1;
    branch.samples.push_back(s);
    if (policy.track_kernel && rep.verdict != Verdict::Nondegenerate) {
      branch.status = BranchStatus::DegenerateEncounter;
      std::ostringstream msg;
      msg << "equivariant nondegeneracy lost at lambda = " << lambda << " (kernel dimension " << s.kernel_dim
          << ", orbit rank " << rep.orbit_rank << ")";
      branch.message = msg.str();
      return branch;
    }
    step = std::min(nominal, 2.0 * h);
  }
  const Vec tangent = branch_tangent(problem, slice, x, lambda);
  branch.samples.back().sensitivity = tangent.head(slice.s_basis.cols()).norm();
  return branch;
}

}  // namespace eqc
