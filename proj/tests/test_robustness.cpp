/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/robustness.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace stlsynth;

namespace {

Trajectory single_state(std::initializer_list<double> x0) {
  Trajectory traj;
  traj.x.resize(1, static_cast<Eigen::Index>(x0.size()));
  int i = 0;
  for (double v : x0) traj.x(0, i++) = v;
  traj.u.resize(0, 1);
  return traj;
}

LinearPredicate pred4(double b) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(4);
  a[0] = 1.0;
  return LinearPredicate{a, b};
}

} // namespace

TEST_CASE("reversed evaluation of leaves, max, min") {
  Trajectory traj = single_state({3.0, 0.0, 0.0, 0.0});
  OpTree leaf = make_leaf(pred4(5.0), 0);
  CHECK(eval_reversed(leaf, traj) == doctest::Approx(-2.0));

  OpTree pos = make_leaf(pred4(2.0), 0); // value 1
  CHECK(eval_reversed(make_max({leaf, pos}), traj) == doctest::Approx(1.0));
  CHECK(eval_reversed(make_min({leaf, pos}), traj) == doctest::Approx(-2.0));
}

TEST_CASE("evaluation rejects out-of-range timesteps") {
  Trajectory traj = single_state({3.0, 0.0, 0.0, 0.0});
  OpTree leaf = make_leaf(pred4(5.0), 2);
  CHECK_THROWS_AS(eval_reversed(leaf, traj), std::out_of_range);
  CHECK_THROWS_AS(eval_smoothed(leaf, traj, SmoothingConfig{}), std::out_of_range);
}

TEST_CASE("original robustness is the exact negation") {
  Trajectory traj = single_state({3.0, 0.0, 0.0, 0.0});
  OpTree leaf = make_leaf(pred4(5.0), 0);
  CHECK(eval_original(leaf, traj) == doctest::Approx(2.0));
  OpTree zero = make_leaf(pred4(3.0), 0);
  CHECK(eval_original(zero, traj) == 0.0);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    OpTree t = oracles::random_tree(rng, 3, 4);
    Trajectory x = oracles::random_trajectory(rng, 3, 4);
    CHECK(eval_original(t, x) == -eval_reversed(t, x));
  }
}

TEST_CASE("smooth_min closed forms") {
  CHECK(smooth_min({0.7}, 3.0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(smooth_min({0.0, 0.0}, 1.0) == doctest::Approx(-std::log(2.0)));
  CHECK(smooth_min({0.0, 100.0}, 1.0) == doctest::Approx(0.0).epsilon(1e-30));
  CHECK_THROWS_AS(smooth_min({}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(smooth_min({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("smooth_min survives magnitudes that would overflow naively") {
  const double v = smooth_min({-500.0, -499.0}, 10.0);
  CHECK(std::isfinite(v));
  CHECK(v <= -500.0);
  CHECK(v >= -500.0 - std::log(2.0) / 10.0);
}

TEST_CASE("sandwich: min - ln(r)/k <= smooth_min <= min") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-20.0, 20.0);
  std::uniform_int_distribution<int> len(1, 10);
  for (double k : {1.0, 10.0, 100.0}) {
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<double> vals(len(rng));
      for (auto &v : vals) v = val(rng);
      const double lo = *std::min_element(vals.begin(), vals.end());
      const double sm = smooth_min(vals, k);
      CHECK(sm <= lo + 1e-9);
      CHECK(sm >= lo - std::log(static_cast<double>(vals.size())) / k - 1e-9);
    }
  }
}

TEST_CASE("smoothed evaluation: exact when min-free, smooth otherwise") {
  Trajectory traj = single_state({3.0, 0.0, 0.0, 0.0});
  OpTree maxonly = make_max({make_leaf(pred4(5.0), 0), make_leaf(pred4(2.0), 0)});
  CHECK(eval_smoothed(maxonly, traj, SmoothingConfig{1.0}) ==
        eval_reversed(maxonly, traj));

  OpTree ties = make_min({make_leaf(pred4(3.0), 0), make_leaf(pred4(3.0), 0)});
  CHECK(eval_smoothed(ties, traj, SmoothingConfig{1.0}) ==
        doctest::Approx(-std::log(2.0)));
}

TEST_CASE("fuzz: under-approximation and convergence in k") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    OpTree t = oracles::random_tree(rng, 2, 5);
    Trajectory x = oracles::random_trajectory(rng, 2, 5);
    const double exact = eval_reversed(t, x);
    for (double k : {1.0, 10.0, 100.0}) {
      const double sm = eval_smoothed(t, x, SmoothingConfig{k});
      CHECK(sm <= exact + 1e-12);
      CHECK(exact - sm <= smoothing_gap(t, k) + 1e-12);
    }
  }
}

TEST_CASE("gradient: single leaf places its coefficients at the right block") {
  std::mt19937_64 rng(3);
  Trajectory x = oracles::random_trajectory(rng, 4, 3);
  Eigen::VectorXd a(4);
  a << 0.5, -1.0, 2.0, 0.0;
  OpTree leaf = make_leaf(LinearPredicate{a, 1.0}, 2);
  Eigen::VectorXd g = grad_smoothed(leaf, x, SmoothingConfig{10.0});
  CHECK(g.segment(2 * 4, 4) == a);
  CHECK(g.head(8).isZero());
}

TEST_CASE("gradient: symmetric softmax splits equal-valued terms evenly") {
  Trajectory traj = single_state({0.0, 0.0, 0.0, 0.0});
  Eigen::VectorXd a1 = Eigen::VectorXd::Zero(4), a2 = Eigen::VectorXd::Zero(4);
  a1[0] = 1.0;
  a2[1] = 1.0;
  OpTree t = make_min({make_leaf(LinearPredicate{a1, 0.0}, 0),
                       make_leaf(LinearPredicate{a2, 0.0}, 0)});
  Eigen::VectorXd g = grad_smoothed(t, traj, SmoothingConfig{7.0});
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(0.5));
}

TEST_CASE("gradient: max ties break toward the first child") {
  Trajectory traj = single_state({1.0, 1.0, 0.0, 0.0});
  Eigen::VectorXd a1 = Eigen::VectorXd::Zero(4), a2 = Eigen::VectorXd::Zero(4);
  a1[0] = 1.0;
  a2[1] = 1.0;
  OpTree t = make_max({make_leaf(LinearPredicate{a1, 0.0}, 0),
                       make_leaf(LinearPredicate{a2, 0.0}, 0)});
  Eigen::VectorXd g = grad_smoothed(t, traj, SmoothingConfig{7.0});
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("fuzz: gradient matches central differences") {
  std::mt19937_64 rng(23);
  const double h = 1e-6, k = 10.0;
  int done = 0;
  while (done < 60) {
    OpTree t = oracles::random_tree(rng, 2, 4);
    Trajectory x = oracles::random_trajectory(rng, 2, 4);
    // finite differences are only a valid oracle away from max kinks
    if (oracles::near_max_tie(t, x, k, 1e-4)) continue;
    Eigen::VectorXd g = grad_smoothed(t, x, SmoothingConfig{k});
    Eigen::VectorXd fd = oracles::fd_gradient(t, x, k, h);
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    CHECK((g - fd).cwiseAbs().maxCoeff() / scale < 1e-5);
    ++done;
  }
}
