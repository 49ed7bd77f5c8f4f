#pragma once

#include "eqcont/types.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace eqc {

/// Quadrature pairings. `mass` realizes the inner product on states;
/// `pairing` pairs the gradient-like field with variations. In finite
/// dimensions both are the same quadrature mass matrix by default.
struct GramPair {
  Mat mass;
  Mat pairing;

  static GramPair scaled_identity(Index n, double weight);

  Index size() const { return mass.rows(); }
  double inner(const Vec& u, const Vec& v) const { return u.dot(mass * v); }
  /// Throws DimensionMismatch / Sizing when the mass matrix is not SPD.
  void validate() const;
};

/// Local action of a d-dimensional group. Group elements are coordinate
/// vectors in R^d with the identity at 0; `local_action` returns nullopt
/// outside the domain where the action is defined.
struct GroupModel {
  Index dim = 0;
  std::function<Mat(const Vec&)> orbit_tangent;
  std::function<std::optional<Vec>(const Vec& g, const Vec& x)> local_action;
  double domain_radius = std::numeric_limits<double>::infinity();
  bool abelian = true;

  /// Trivial group: orbit tangent is an n x 0 matrix, action is identity.
  static GroupModel trivial();
};

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// A discretized invariant variational problem.
struct ProblemInstance {
  std::string name;
  Index n = 0;
  std::function<double(const Vec&, double)> functional;
  std::function<Vec(const Vec&, double)> gradient;
  /// Optional analytic Jacobian of `gradient` in the state.
  std::function<Mat(const Vec&, double)> linearization;
  GramPair gram;
  GroupModel group;
  Interval parameter_range;
};

struct SolverOptions {
  double newton_tol = 1e-10;
  double svd_tol = 1e-8;
  double angle_tol = 1e-6;
  double rank_tol = 1e-8;
  double residual_tol = 1e-8;
  double max_condition = 1e10;
  double projection_tol = 1e-10;
  int max_iter = 50;
};

struct Linearization {
  Mat matrix;
  bool analytic = false;
  double residual = 0.0;
  bool off_critical = false;
};

Linearization assemble_linearization(const ProblemInstance& problem, const Vec& x0, double lambda0,
                                     const SolverOptions& opts = {});

/// Finite-difference Jacobian of the gradient-like field, step
/// 1e-6 * (1 + |x|_inf).
Mat fd_linearization(const ProblemInstance& problem, const Vec& x, double lambda);

struct KernelResult {
  Mat basis;            // M-orthonormal columns spanning the numeric kernel
  Vec singular_values;  // descending, in the M geometry
  double gap = std::numeric_limits<double>::infinity();
  Index dim() const { return basis.cols(); }
};

/// Numeric kernel {sigma_i <= svd_tol * sigma_max}. Throws AmbiguousKernel
/// when a singular value falls within a factor of 10 on either side of
/// the threshold.
KernelResult kernel_basis(const Mat& linear, const GramPair& gram, double svd_tol = 1e-8);

/// Orbit directions after removing isotropy: the greedy, order-preserving
/// selection of linearly independent columns of B(x).
struct OrbitRank {
  std::vector<Index> generators;
  Mat columns;
  Index rank() const { return static_cast<Index>(generators.size()); }
};

OrbitRank effective_orbit(const Mat& orbit, const GramPair& gram, double rank_tol = 1e-8);

enum class Verdict { Nondegenerate, Degenerate, Obstructed };
const char* to_string(Verdict verdict);

struct NondegeneracyReport {
  Vec singular_values;
  Index kernel_dim = 0;
  Index group_dim = 0;
  Index orbit_rank = 0;
  double principal_angle = 0.0;
  Verdict verdict = Verdict::Nondegenerate;
};

/// Largest principal angle between two subspaces in the M geometry, or
/// pi/2 when dimensions differ.
double principal_angle(const Mat& a, const Mat& b, const GramPair& gram);

NondegeneracyReport nondegeneracy_check(const KernelResult& kernel, const Mat& orbit, const GramPair& gram,
                                        double angle_tol = 1e-6, double rank_tol = 1e-8);

struct SliceBasis {
  Vec x0;
  double lambda0 = 0.0;
  Mat s_basis;
  Mat orbit_basis;
  Mat y_basis;
  std::vector<Index> generators;
  Index group_dim = 0;
  bool rank_warning = false;
  double condition = 0.0;
  NondegeneracyReport report;

  Index effective_rank() const { return y_basis.cols(); }
};

SliceBasis build_slice(const ProblemInstance& problem, const Vec& x0, double lambda0, const SolverOptions& opts = {});

struct BorderedSolution {
  Vec x;
  Vec multipliers;
  double residual = 0.0;
  int iterations = 0;
  bool guess_projected = false;
};

BorderedSolution solve_bordered(const ProblemInstance& problem, const SliceBasis& slice, double lambda,
                                const Vec& x_guess, const SolverOptions& opts = {});

struct StepPolicy {
  int steps = 20;
  double min_step = 1e-6;
  double multiplier_tol = 1e-8;
  double critical_tol = 1e-8;
  bool track_kernel = true;
};

struct BranchSample {
  double lambda = 0.0;
  Vec x;
  Vec multipliers;
  double residual = 0.0;
  Index kernel_dim = 0;
  double sensitivity = 0.0;
};

enum class BranchStatus { Completed, Obstructed, DegenerateEncounter };
const char* to_string(BranchStatus status);

struct Branch {
  std::vector<BranchSample> samples;
  BranchStatus status = BranchStatus::Completed;
  std::string message;
  SliceBasis slice;
};

Branch continue_branch(const ProblemInstance& problem, const Vec& x0, double lambda0, double lambda_target,
                       const StepPolicy& policy = {}, const SolverOptions& opts = {});

struct ProjectionResult {
  Vec g;
  Vec x_on_slice;
  double residual = 0.0;
  int iterations = 0;
};

/// Finds g with rho(g, x) on the slice through x0. Only the generators that
/// survive isotropy removal are solved for; the others stay at zero.
ProjectionResult slice_project(const ProblemInstance& problem, const Vec& x, const SliceBasis& slice,
                               const SolverOptions& opts = {});

/// Residual of the slice equation for the selected generators.
Vec slice_residual(const ProblemInstance& problem, const Vec& x, const SliceBasis& slice, const Vec& g_reduced);

int winding_degree(const ProblemInstance& problem, const Vec& x, const SliceBasis& slice, double radius,
                   int samples = 64);

/// ||B(x)^T M_pair delta_f(x, lambda)||_inf.
double equivariance_residual(const ProblemInstance& problem, const Vec& x, double lambda);

/// |v^T M_pair delta_f - FD of f along v| / (1 + |FD|).
double gradient_consistency(const ProblemInstance& problem, const Vec& x, const Vec& v, double lambda,
                            double step = 1e-6);

}  // namespace eqc
