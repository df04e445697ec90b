#pragma once

#include "xbar/matrix.hpp"

namespace xbar {

// Dense kernels used by the device model and the float network path. The
// default entry points parallelize with OpenMP above a size threshold; the
// xbar::reference namespace keeps plain serial versions for testing and for
// the benchmark. Per-element summation order is identical in both, so results
// are bit-identical regardless of thread count.

namespace reference {

// y = M v  (y_r = sum_c M(r,c) v_c)
Vector multiply(const Matrix& m, const Vector& v);

// y = M^T v  (y_c = sum_r M(r,c) v_r); this is the crossbar read direction:
// voltages on rows, currents summed per column.
Vector multiply_transpose(const Matrix& m, const Vector& v);

// acc += a b^T for vectors a (rows) and b (cols)
void add_outer(Matrix& acc, const Vector& a, const Vector& b);

}  // namespace reference

Vector multiply(const Matrix& m, const Vector& v);
Vector multiply_transpose(const Matrix& m, const Vector& v);
void add_outer(Matrix& acc, const Vector& a, const Vector& b);

}  // namespace xbar
