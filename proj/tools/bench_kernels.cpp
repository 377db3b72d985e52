/* SPDX-License-Identifier: Apache-2.0 */
// Compares the serial reference kernels against the OpenMP variants and
// times parallel restarts against a serial pass over the same seeds.

#include "stlsynth/ccp.hpp"
#include "stlsynth/kernels.hpp"
#include "stlsynth/scenario.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

using namespace stlsynth;

static RowMatrix random_sparse(int rows, int cols, int nnz_per_row,
                               std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> col(0, cols - 1);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(rows) * nnz_per_row);
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < nnz_per_row; ++k) trip.emplace_back(r, col(rng), val(rng));
  RowMatrix M(rows, cols);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

template <typename F> static double time_best_of(int reps, F &&fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

int main() {
  std::printf("threads: %d\n\n", omp_get_max_threads());

  std::printf("%12s %12s %12s %8s %10s\n", "rows", "serial_ms", "omp_ms", "speedup",
              "bitwise");
  std::mt19937_64 rng(7);
  for (int rows : {20000, 100000, 400000}) {
    RowMatrix M = random_sparse(rows, rows / 4, 8, rng);
    Vector x = Vector::NullaryExpr(rows / 4, [&](Eigen::Index) {
      return std::uniform_real_distribution<double>(-1, 1)(rng);
    });
    Vector ys, yp;
    const int reps = 20;
    double ts = time_best_of(reps, [&] { kernels::spmv_serial(M, x, ys); });
    double tp = time_best_of(reps, [&] { kernels::spmv_omp(M, x, yp); });
    std::printf("%12d %12.3f %12.3f %8.2f %10s\n", rows, ts * 1e3, tp * 1e3, ts / tp,
                ys == yp ? "yes" : "NO");
  }

  std::printf("\nrestart batch (two-target, T=20, 4 restarts)\n");
  Scenario s = default_two_target_scenario();
  s.T = 20;
  s.ccp.restarts = 4;
  const Formula f = s.build_formula();
  const OpTree tree = unfold(f, 0, s.T, s.until_sem);

  s.ccp.parallel_restarts = false;
  auto t0 = std::chrono::steady_clock::now();
  CcpReport serial = solve_ccp(tree, s.system, s.x0, s.T, s.ccp);
  auto t1 = std::chrono::steady_clock::now();
  s.ccp.parallel_restarts = true;
  CcpReport parallel = solve_ccp(tree, s.system, s.x0, s.T, s.ccp);
  auto t2 = std::chrono::steady_clock::now();
  const double tser = std::chrono::duration<double>(t1 - t0).count();
  const double tpar = std::chrono::duration<double>(t2 - t1).count();
  std::printf("%12s %12.3f s\n%12s %12.3f s\n%12s %12.2fx\n", "serial", tser,
              "parallel", tpar, "speedup", tser / tpar);
  std::printf("same best robustness: %s\n",
              serial.exact_robustness == parallel.exact_robustness ? "yes" : "NO");
  return 0;
}
