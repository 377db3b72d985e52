/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/system.hpp"

#include <stdexcept>

namespace stlsynth {

void LinearSystem::validate() const {
  const int n_ = n(), m_ = m();
  if (A.rows() != A.cols()) throw std::invalid_argument("A must be square");
  if (B.rows() != n_) throw std::invalid_argument("B row count must match A");
  if (x_lo.size() != n_ || x_hi.size() != n_)
    throw std::invalid_argument("state bounds must have length n");
  if (u_lo.size() != m_ || u_hi.size() != m_)
    throw std::invalid_argument("input bounds must have length m");
  if ((x_lo.array() > x_hi.array()).any() || (u_lo.array() > u_hi.array()).any())
    throw std::invalid_argument("lower bound exceeds upper bound");
}

Trajectory rollout(const LinearSystem &sys, const Eigen::VectorXd &x0,
                   const Eigen::MatrixXd &u) {
  sys.validate();
  if (x0.size() != sys.n())
    throw std::invalid_argument("initial state has wrong dimension");
  if (u.cols() != sys.m())
    throw std::invalid_argument("input sequence has wrong dimension");
  const int T = static_cast<int>(u.rows());
  Trajectory traj;
  traj.x.resize(T + 1, sys.n());
  traj.u = u;
  traj.x.row(0) = x0.transpose();
  for (int t = 0; t < T; ++t)
    traj.x.row(t + 1) =
        (sys.A * traj.x.row(t).transpose() + sys.B * u.row(t).transpose()).transpose();
  return traj;
}

LinearSystem double_integrator() {
  LinearSystem sys;
  sys.A = Eigen::MatrixXd::Zero(4, 4);
  sys.A.block<2, 2>(0, 0) = Eigen::Matrix2d::Identity();
  sys.A.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity();
  sys.A.block<2, 2>(2, 2) = Eigen::Matrix2d::Identity();
  sys.B = Eigen::MatrixXd::Zero(4, 2);
  sys.B.block<2, 2>(2, 0) = Eigen::Matrix2d::Identity();
  sys.x_lo = (Eigen::VectorXd(4) << 0.0, 0.0, -1.0, -1.0).finished();
  sys.x_hi = (Eigen::VectorXd(4) << 10.0, 10.0, 1.0, 1.0).finished();
  sys.u_lo = (Eigen::VectorXd(2) << -0.2, -0.2).finished();
  sys.u_hi = (Eigen::VectorXd(2) << 0.2, 0.2).finished();
  return sys;
}

} // namespace stlsynth
