/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <Eigen/Dense>

namespace stlsynth {

/// Discrete-time linear dynamics x_{t+1} = A x_t + B u_t with box bounds
/// on states and inputs.
struct LinearSystem {
  Eigen::MatrixXd A; // n x n
  Eigen::MatrixXd B; // n x m
  Eigen::VectorXd x_lo, x_hi; // n
  Eigen::VectorXd u_lo, u_hi; // m

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  void validate() const;
};

struct Trajectory {
  Eigen::MatrixXd x; // (T+1) x n, row t = state at timestep t
  Eigen::MatrixXd u; // T x m

  int T() const { return static_cast<int>(u.rows()); }
  int n() const { return static_cast<int>(x.cols()); }
  int m() const { return static_cast<int>(u.cols()); }
};

/// Simulate the dynamics from x0 under the input sequence u (T x m rows).
Trajectory rollout(const LinearSystem &sys, const Eigen::VectorXd &x0,
                   const Eigen::MatrixXd &u);

/// Planar double integrator: state (px, py, vx, vy), input (ax, ay),
/// position in [0,10]^2, velocity in [-1,1]^2, acceleration in [-0.2,0.2]^2.
LinearSystem double_integrator();

} // namespace stlsynth
