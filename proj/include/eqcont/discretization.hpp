#pragma once

#include "eqcont/types.hpp"

#include <numbers>

namespace eqc {

enum class Scheme { Spectral, FourthOrder };

Scheme parse_scheme(const std::string& name);
const char* to_string(Scheme scheme);

/// Uniform periodic grid on S^1 (dim 1) or the tensor grid on T^2 (dim 2).
///
/// Nodes are k*period/n exactly. In 2D the flattened index of node (i, j)
/// is i + n*j, with i running along x and j along y.
class Grid {
 public:
  Grid(Index n, double period, int dim);

  Index n() const { return n_; }
  double period() const { return period_; }
  int dim() const { return dim_; }
  double spacing() const { return period_ / static_cast<double>(n_); }

  /// Number of nodes: n for S^1, n^2 for T^2.
  Index size() const { return dim_ == 1 ? n_ : n_ * n_; }

  /// The n parameter values along one axis.
  Vec nodes() const;
  double node(Index k) const { return static_cast<double>(k) * period_ / static_cast<double>(n_); }

  /// Trapezoid weights: h per node in 1D, h^2 per node in 2D.
  Vec weights() const;
  double weight() const;

  /// Quadrature of nodal values.
  double integrate(const Vec& values) const;

 private:
  Index n_;
  double period_;
  int dim_;
};

Grid make_grid(Index n, double period = 2.0 * std::numbers::pi, int dim = 1);

/// Dense derivative operators. In 1D only d1/d2 are filled; in 2D the
/// partial derivatives along x and y, the mixed derivative and the
/// Laplacian act on flattened tensor-grid vectors.
struct DiffOperators {
  Scheme scheme = Scheme::Spectral;
  Mat d1;
  Mat d2;
  Mat dx;
  Mat dy;
  Mat dxx;
  Mat dyy;
  Mat dxy;
  Mat laplacian;
};

DiffOperators derivative_matrices(const Grid& grid, Scheme scheme = Scheme::Spectral);

/// Kronecker product a (x) b.
Mat kron(const Mat& a, const Mat& b);

/// One-dimensional first and second derivative matrices.
Mat first_derivative_matrix(const Grid& grid, Scheme scheme);
Mat second_derivative_matrix(const Grid& grid, Scheme scheme);

/// Band-limited (periodic sinc) shift matrix: (T v)_j = p(theta_j + shift)
/// where p is the trigonometric interpolant of v. Grid-aligned shifts
/// produce an exact permutation matrix.
Mat shift_matrix(const Grid& grid, double shift);

/// v(. + shift) by trigonometric interpolation. `values` may hold several
/// components stacked one after another, each of length grid.n().
Vec circular_shift(const Vec& values, double shift, const Grid& grid);

/// Trigonometric interpolant of periodic nodal data; evaluates value and
/// derivatives anywhere. The Nyquist mode is carried as a cosine.
class TrigInterpolant {
 public:
  TrigInterpolant(const Grid& grid, const Vec& values);

  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

 private:
  double omega_;
  Vec a_;
  Vec b_;
};

}  // namespace eqc
