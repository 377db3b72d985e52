/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/kernels.hpp"

#include <atomic>

namespace stlsynth::kernels {

static std::atomic<bool> g_parallel{true};

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel_enabled(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

void spmv_serial(const RowMatrix &M, const Vector &x, Vector &y) {
  y.resize(M.rows());
  const int *outer = M.outerIndexPtr();
  const int *inner = M.innerIndexPtr();
  const double *vals = M.valuePtr();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    double acc = 0.0;
    for (int k = outer[r]; k < outer[r + 1]; ++k) acc += vals[k] * x[inner[k]];
    y[r] = acc;
  }
}

void spmv_omp(const RowMatrix &M, const Vector &x, Vector &y) {
  y.resize(M.rows());
  const int *outer = M.outerIndexPtr();
  const int *inner = M.innerIndexPtr();
  const double *vals = M.valuePtr();
  const Eigen::Index rows = M.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int k = outer[r]; k < outer[r + 1]; ++k) acc += vals[k] * x[inner[k]];
    y[r] = acc;
  }
}

void spmv(const RowMatrix &M, const Vector &x, Vector &y) {
  // Threshold keeps tiny products on one thread; same arithmetic either way.
  if (parallel_enabled() && M.nonZeros() > 4096) {
    spmv_omp(M, x, y);
  } else {
    spmv_serial(M, x, y);
  }
}

} // namespace stlsynth::kernels
