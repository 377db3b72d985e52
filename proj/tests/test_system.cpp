/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/system.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace stlsynth;

TEST_CASE("double integrator matrices and bounds") {
  LinearSystem sys = double_integrator();
  CHECK(sys.n() == 4);
  CHECK(sys.m() == 2);
  CHECK(sys.A.row(0) == (Eigen::RowVectorXd(4) << 1, 0, 1, 0).finished());
  CHECK(sys.B.col(0) == (Eigen::VectorXd(4) << 0, 0, 1, 0).finished());
  CHECK(sys.x_lo == (Eigen::VectorXd(4) << 0, 0, -1, -1).finished());
  CHECK(sys.x_hi == (Eigen::VectorXd(4) << 10, 10, 1, 1).finished());
  CHECK(sys.u_lo == (Eigen::VectorXd(2) << -0.2, -0.2).finished());
  CHECK(sys.u_hi == (Eigen::VectorXd(2) << 0.2, 0.2).finished());
}

TEST_CASE("one step of the double integrator") {
  LinearSystem sys = double_integrator();
  Eigen::VectorXd x0(4);
  x0 << 2, 2, 0, 0;
  Eigen::MatrixXd u(1, 2);
  u << 0.2, 0;
  Trajectory traj = rollout(sys, x0, u);
  CHECK(traj.x.row(1) == (Eigen::RowVectorXd(4) << 2, 2, 0.2, 0).finished());
}

TEST_CASE("identity dynamics with zero input stay constant") {
  LinearSystem sys;
  sys.A = Eigen::MatrixXd::Identity(3, 3);
  sys.B = Eigen::MatrixXd::Ones(3, 1);
  sys.x_lo = Eigen::VectorXd::Constant(3, -10);
  sys.x_hi = Eigen::VectorXd::Constant(3, 10);
  sys.u_lo = Eigen::VectorXd::Constant(1, -1);
  sys.u_hi = Eigen::VectorXd::Constant(1, 1);
  Eigen::VectorXd x0(3);
  x0 << 1, -2, 3;
  Trajectory traj = rollout(sys, x0, Eigen::MatrixXd::Zero(5, 1));
  for (int t = 0; t <= 5; ++t) CHECK(traj.x.row(t) == x0.transpose());
}

TEST_CASE("rollout rejects dimension mismatches") {
  LinearSystem sys = double_integrator();
  CHECK_THROWS_AS(rollout(sys, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(2, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(rollout(sys, Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Zero(2, 3)),
                  std::invalid_argument);
  LinearSystem bad = sys;
  bad.x_lo[0] = 11.0; // above x_hi
  CHECK_THROWS_AS(rollout(bad, Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Zero(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("fuzz: rollout matches the matrix-power oracle exactly") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3, m = 2, T = 5;
    LinearSystem sys;
    sys.A = Eigen::MatrixXd::NullaryExpr(n, n, [&](Eigen::Index) { return val(rng); });
    sys.B = Eigen::MatrixXd::NullaryExpr(n, m, [&](Eigen::Index) { return val(rng); });
    sys.x_lo = Eigen::VectorXd::Constant(n, -100);
    sys.x_hi = Eigen::VectorXd::Constant(n, 100);
    sys.u_lo = Eigen::VectorXd::Constant(m, -1);
    sys.u_hi = Eigen::VectorXd::Constant(m, 1);
    Eigen::VectorXd x0 =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return val(rng); });
    Eigen::MatrixXd u =
        Eigen::MatrixXd::NullaryExpr(T, m, [&](Eigen::Index) { return val(rng); });
    Trajectory ours = rollout(sys, x0, u);
    Trajectory ref = oracles::rollout_powers(sys, x0, u);
    CHECK((ours.x - ref.x).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("fuzz: rollout superposition") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3, m = 2, T = 6;
    LinearSystem sys;
    sys.A = Eigen::MatrixXd::NullaryExpr(n, n, [&](Eigen::Index) { return val(rng); });
    sys.B = Eigen::MatrixXd::NullaryExpr(n, m, [&](Eigen::Index) { return val(rng); });
    sys.x_lo = Eigen::VectorXd::Constant(n, -1000);
    sys.x_hi = Eigen::VectorXd::Constant(n, 1000);
    sys.u_lo = Eigen::VectorXd::Constant(m, -10);
    sys.u_hi = Eigen::VectorXd::Constant(m, 10);
    Eigen::VectorXd x0 =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return val(rng); });
    Eigen::MatrixXd u =
        Eigen::MatrixXd::NullaryExpr(T, m, [&](Eigen::Index) { return val(rng); });
    Eigen::MatrixXd v =
        Eigen::MatrixXd::NullaryExpr(T, m, [&](Eigen::Index) { return val(rng); });
    Trajectory sum = rollout(sys, x0, u + v);
    Trajectory base = rollout(sys, x0, u);
    Trajectory zero = rollout(sys, Eigen::VectorXd::Zero(n), v);
    CHECK((sum.x - base.x - zero.x).cwiseAbs().maxCoeff() < 1e-10);
  }
}
