#pragma once

#include <cstddef>

namespace cellpop::kernels {

// y_i = sum_{j >= max(i,1)} W[i*n+j] * v[j]; W holds the discretized
// fragmentation gain (rows: target size, cols: mother size).
void upper_matvec_serial(const double* W, const double* v, double* y, int n);
void upper_matvec(const double* W, const double* v, double* y, int n);

// One explicit upwind step of the adder transport-reaction update.
//   out[i][j] = n[i][j] - (cx[j] n[i][j] - cx[j-1] n[i][j-1])
//                       - ca[j] (n[i][j] - n[i-1][j]) - rb[i][j] n[i][j]
// with n[-1][j] = bc[j] (newborn inflow) and n[i][-1] = 0.
void adder_step_serial(const double* n, const double* bc, const double* cx,
                       const double* ca, const double* rb, double* out, int n_a, int n_x);
void adder_step(const double* n, const double* bc, const double* cx, const double* ca,
                const double* rb, double* out, int n_a, int n_x);

}  // namespace cellpop::kernels
