#pragma once

#include "eqcont/discretization.hpp"
#include "eqcont/types.hpp"

#include <functional>

namespace eqc::kernels {

using VectorField = std::function<Vec(const Vec&)>;

/// Central finite-difference Jacobian, one column per coordinate.
/// The callable must be pure: the parallel variant evaluates columns
/// concurrently.
Mat fd_jacobian_serial(const VectorField& field, const Vec& x, double step);
Mat fd_jacobian_parallel(const VectorField& field, const Vec& x, double step);

/// Dense band-limited shift operator assembly (see eqc::shift_matrix).
Mat shift_matrix_serial(const Grid& grid, double shift);
Mat shift_matrix_parallel(const Grid& grid, double shift);

/// Default dispatch used by the library; parallel when built with OpenMP.
Mat fd_jacobian(const VectorField& field, const Vec& x, double step);

bool parallel_enabled();

}  // namespace eqc::kernels
