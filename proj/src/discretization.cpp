#include "eqcont/discretization.hpp"

#include <cmath>

namespace eqc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Grid-aligned shifts are detected to this fraction of the spacing and
// mapped to exact permutations.
constexpr double kAlignTol = 1e-12;

// Periodic sinc for even n on a 2*pi period.
double periodic_sinc(Index n, double x) {
  const double s = std::sin(0.5 * x);
  if (std::abs(s) < 1e-14) return 1.0;
  return std::sin(0.5 * static_cast<double>(n) * x) * std::cos(0.5 * x) / (static_cast<double>(n) * s);
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Sizing: return "sizing";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::AmbiguousKernel: return "ambiguous-kernel";
    case ErrorKind::DegenerateOrbit: return "degenerate-orbit";
    case ErrorKind::IllPosedComplement: return "ill-posed-complement";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::SingularBorderedMatrix: return "singular-bordered-matrix";
    case ErrorKind::StepUnderflow: return "step-underflow";
    case ErrorKind::InitialPointNotCritical: return "initial-point-not-critical";
    case ErrorKind::OutOfActionDomain: return "out-of-action-domain";
    case ErrorKind::UnsupportedDimension: return "unsupported-dimension";
    case ErrorKind::ResidualVanishesOnContour: return "residual-vanishes-on-contour";
    case ErrorKind::ChartExit: return "chart-exit";
    case ErrorKind::UnknownFamily: return "unknown-family";
    case ErrorKind::SelfIntersection: return "self-intersection";
    case ErrorKind::NoPrimitive: return "no-primitive";
    case ErrorKind::RegraphFailure: return "regraph-failure";
    case ErrorKind::ConfigInvalid: return "config-invalid";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "spectral") return Scheme::Spectral;
  if (name == "fd4" || name == "fourth-order" || name == "fourth_order") return Scheme::FourthOrder;
  throw Error(ErrorKind::ConfigInvalid, "unknown differentiation scheme '" + name + "'");
}

const char* to_string(Scheme scheme) {
  return scheme == Scheme::Spectral ? "spectral" : "fd4";
}

Grid::Grid(Index n, double period, int dim) : n_(n), period_(period), dim_(dim) {
  if (n < 8 || n % 2 != 0)
    throw Error(ErrorKind::Sizing, "grid size must be even and >= 8, got " + std::to_string(n));
  if (!(period > 0.0)) throw Error(ErrorKind::Sizing, "grid period must be positive");
  if (dim != 1 && dim != 2) throw Error(ErrorKind::Sizing, "grid dimension must be 1 or 2");
}

Vec Grid::nodes() const {
  Vec out(n_);
  for (Index k = 0; k < n_; ++k) out[k] = node(k);
  return out;
}

double Grid::weight() const {
  const double h = spacing();
  return dim_ == 1 ? h : h * h;
}

Vec Grid::weights() const { return Vec::Constant(size(), weight()); }

double Grid::integrate(const Vec& values) const {
  if (values.size() != size())
    throw Error(ErrorKind::DimensionMismatch, "quadrature expects one value per node");
  return weight() * values.sum();
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Grid make_grid(Index n, double period, int dim) { return Grid(n, period, dim); }

Mat first_derivative_matrix(const Grid& grid, Scheme scheme) {
  const Index n = grid.n();
  const double scale = kTwoPi / grid.period();
  const double h = kTwoPi / static_cast<double>(n);
  Mat d = Mat::Zero(n, n);
  if (scheme == Scheme::Spectral) {
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) {
        if (j == k) continue;
        const Index m = j - k;
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        d(j, k) = scale * 0.5 * sign / std::tan(0.5 * static_cast<double>(m) * h);
      }
    return d;
  }
  const double hs = grid.spacing();
  for (Index j = 0; j < n; ++j) {
    d(j, (j + 1) % n) += 8.0 / (12.0 * hs);
    d(j, (j + n - 1) % n) -= 8.0 / (12.0 * hs);
    d(j, (j + 2) % n) -= 1.0 / (12.0 * hs);
    d(j, (j + n - 2) % n) += 1.0 / (12.0 * hs);
  }
  return d;
}

Mat second_derivative_matrix(const Grid& grid, Scheme scheme) {
  const Index n = grid.n();
  const double scale = kTwoPi / grid.period();
  const double h = kTwoPi / static_cast<double>(n);
  Mat d = Mat::Zero(n, n);
  if (scheme == Scheme::Spectral) {
    const double diag = -(std::numbers::pi * std::numbers::pi) / (3.0 * h * h) - 1.0 / 6.0;
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) {
        if (j == k) {
          d(j, k) = scale * scale * diag;
          continue;
        }
        const Index m = j - k;
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        const double s = std::sin(0.5 * static_cast<double>(m) * h);
        d(j, k) = -scale * scale * sign / (2.0 * s * s);
      }
    return d;
  }
  const double hs = grid.spacing();
  const double c = 1.0 / (12.0 * hs * hs);
  for (Index j = 0; j < n; ++j) {
    d(j, j) += -30.0 * c;
    d(j, (j + 1) % n) += 16.0 * c;
    d(j, (j + n - 1) % n) += 16.0 * c;
    d(j, (j + 2) % n) -= c;
    d(j, (j + n - 2) % n) -= c;
  }
  return d;
}

DiffOperators derivative_matrices(const Grid& grid, Scheme scheme) {
  DiffOperators ops;
  ops.scheme = scheme;
  ops.d1 = first_derivative_matrix(grid, scheme);
  ops.d2 = second_derivative_matrix(grid, scheme);
  if (grid.dim() == 2) {
    const Mat eye = Mat::Identity(grid.n(), grid.n());
    // flattened index i + n*j: x acts on the fast index
    ops.dx = kron(eye, ops.d1);
    ops.dy = kron(ops.d1, eye);
    ops.dxx = kron(eye, ops.d2);
    ops.dyy = kron(ops.d2, eye);
    ops.dxy = kron(ops.d1, ops.d1);
    ops.laplacian = ops.dxx + ops.dyy;
  }
  return ops;
}

Mat shift_matrix(const Grid& grid, double shift) {
  const Index n = grid.n();
  const double h = grid.spacing();
  const double steps = shift / h;
  const double rounded = std::round(steps);
  Mat t = Mat::Zero(n, n);
  if (std::abs(steps - rounded) <= kAlignTol * std::max(1.0, std::abs(steps))) {
    const Index offset = ((static_cast<Index>(rounded) % n) + n) % n;
    for (Index j = 0; j < n; ++j) t(j, (j + offset) % n) = 1.0;
    return t;
  }
  const double scale = kTwoPi / grid.period();
  for (Index j = 0; j < n; ++j)
    for (Index m = 0; m < n; ++m)
      t(j, m) = periodic_sinc(n, scale * (grid.node(j) + shift - grid.node(m)));
  return t;
}

Vec circular_shift(const Vec& values, double shift, const Grid& grid) {
  const Index n = grid.n();
  if (values.size() % n != 0)
    throw Error(ErrorKind::DimensionMismatch, "shifted vector must hold whole components");
  const Mat t = shift_matrix(grid, shift);
  Vec out(values.size());
  for (Index c = 0; c < values.size() / n; ++c) out.segment(c * n, n) = t * values.segment(c * n, n);
  return out;
}

TrigInterpolant::TrigInterpolant(const Grid& grid, const Vec& values) : omega_(kTwoPi / grid.period()) {
  const Index n = grid.n();
  if (values.size() != n) throw Error(ErrorKind::DimensionMismatch, "interpolant expects n values");
  const Index half = n / 2;
  a_ = Vec::Zero(half + 1);
  b_ = Vec::Zero(half + 1);
  const double h = kTwoPi / static_cast<double>(n);
  for (Index k = 0; k <= half; ++k) {
    double ak = 0.0, bk = 0.0;
    for (Index m = 0; m < n; ++m) {
      const double phase = static_cast<double>(k * m) * h;
      ak += values[m] * std::cos(phase);
      bk += values[m] * std::sin(phase);
    }
    a_[k] = 2.0 * ak / static_cast<double>(n);
    b_[k] = 2.0 * bk / static_cast<double>(n);
  }
  a_[0] *= 0.5;
  a_[half] *= 0.5;
  b_[half] = 0.0;
}

double TrigInterpolant::value(double t) const {
  double out = 0.0;
  for (Index k = 0; k < a_.size(); ++k) {
    const double phase = static_cast<double>(k) * omega_ * t;
    out += a_[k] * std::cos(phase) + b_[k] * std::sin(phase);
  }
  return out;
}

double TrigInterpolant::derivative(double t) const {
  double out = 0.0;
  for (Index k = 1; k < a_.size(); ++k) {
    const double w = static_cast<double>(k) * omega_;
    out += w * (-a_[k] * std::sin(w * t) + b_[k] * std::cos(w * t));
  }
  return out;
}

double TrigInterpolant::second_derivative(double t) const {
  double out = 0.0;
  for (Index k = 1; k < a_.size(); ++k) {
    const double w = static_cast<double>(k) * omega_;
    out -= w * w * (a_[k] * std::cos(w * t) + b_[k] * std::sin(w * t));
  }
  return out;
}

}  // namespace eqc
