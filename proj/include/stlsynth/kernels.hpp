/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace stlsynth {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

namespace kernels {

// Row-wise sparse matrix-vector products. The OpenMP variant splits work
// by output row, so each entry of the result is accumulated sequentially
// by a single thread and the output is bitwise identical to the serial
// reference regardless of thread count.

/// y = M x, serial reference.
void spmv_serial(const RowMatrix &M, const Vector &x, Vector &y);

/// y = M x, OpenMP over rows.
void spmv_omp(const RowMatrix &M, const Vector &x, Vector &y);

/// y = M x; uses the OpenMP kernel above a size threshold when enabled.
void spmv(const RowMatrix &M, const Vector &x, Vector &y);

bool parallel_enabled();
void set_parallel_enabled(bool on);

} // namespace kernels
} // namespace stlsynth
