#include "eqcont/kernels.hpp"

namespace eqc::kernels {

Mat fd_jacobian_serial(const VectorField& field, const Vec& x, double step) {
  const Vec f0 = field(x);
  Mat jac(f0.size(), x.size());
  Vec probe = x;
  for (Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + step;
    const Vec plus = field(probe);
    probe[k] = x[k] - step;
    const Vec minus = field(probe);
    probe[k] = x[k];
    jac.col(k) = (plus - minus) / (2.0 * step);
  }
  return jac;
}

Mat shift_matrix_serial(const Grid& grid, double shift) { return shift_matrix(grid, shift); }

}  // namespace eqc::kernels
