#include "eqcont/kernels.hpp"

#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eqc::kernels {

bool parallel_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

Mat fd_jacobian_parallel(const VectorField& field, const Vec& x, double step) {
  const Index rows = field(x).size();
  const Index cols = x.size();
  Mat jac(rows, cols);
#pragma omp parallel
  {
    Vec probe = x;
#pragma omp for schedule(static)
    for (Index k = 0; k < cols; ++k) {
      probe[k] = x[k] + step;
      const Vec plus = field(probe);
      probe[k] = x[k] - step;
      const Vec minus = field(probe);
      probe[k] = x[k];
      jac.col(k) = (plus - minus) / (2.0 * step);
    }
  }
  return jac;
}

Mat shift_matrix_parallel(const Grid& grid, double shift) {
  const Index n = grid.n();
  const double h = grid.spacing();
  const double steps = shift / h;
  if (std::abs(steps - std::round(steps)) <= 1e-12 * std::max(1.0, std::abs(steps)))
    return shift_matrix(grid, shift);
  const double scale = 2.0 * std::numbers::pi / grid.period();
  Mat t(n, n);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j)
    for (Index m = 0; m < n; ++m) {
      const double arg = scale * (grid.node(j) + shift - grid.node(m));
      const double s = std::sin(0.5 * arg);
      t(j, m) = std::abs(s) < 1e-14
                    ? 1.0
                    : std::sin(0.5 * static_cast<double>(n) * arg) * std::cos(0.5 * arg) /
                          (static_cast<double>(n) * s);
    }
  return t;
}

Mat fd_jacobian(const VectorField& field, const Vec& x, double step) {
  return fd_jacobian_parallel(field, x, step);
}

}  // namespace eqc::kernels
