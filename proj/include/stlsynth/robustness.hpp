/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include "stlsynth/ast.hpp"
#include "stlsynth/system.hpp"

namespace stlsynth {

struct SmoothingConfig {
  double k = 10.0; // log-sum-exp sharpness, > 0
};

/// Reversed robustness: conjunction/always evaluate as max, disjunction/
/// eventually as min, and a trajectory satisfies the formula iff the value
/// is <= 0.
double eval_reversed(const OpTree &t, const Trajectory &x);

/// Conventional sign: positive means satisfied. Equals -eval_reversed.
double eval_original(const OpTree &t, const Trajectory &x);

/// -(1/k) * ln(sum_i exp(-k * v_i)), shifted so the exponentials never
/// overflow. Exact for a single element; under-approximates min otherwise.
double smooth_min(const std::vector<double> &values, double k);

/// eval_reversed with every min node replaced by smooth_min; max stays exact.
double eval_smoothed(const OpTree &t, const Trajectory &x, const SmoothingConfig &cfg);

/// Gradient of eval_smoothed with respect to the stacked state trajectory
/// (length n*(T+1), block t holding d/dx_t). Max nodes route the gradient
/// to their first argmax child; min nodes spread it by softmax weights.
Eigen::VectorXd grad_smoothed(const OpTree &t, const Trajectory &x,
                              const SmoothingConfig &cfg);

/// Upper bound on eval_reversed - eval_smoothed for any trajectory:
/// (max min nodes on a root-to-leaf path) * ln(max min fan-in) / k.
double smoothing_gap(const OpTree &t, double k);

} // namespace stlsynth
