/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stlsynth {

static double leaf_value(const OpTree &t, const Trajectory &x) {
  if (t.timestep >= x.x.rows())
    throw std::out_of_range("leaf timestep " + std::to_string(t.timestep) +
                            " beyond trajectory length");
  return t.pred.a.dot(x.x.row(t.timestep)) - t.pred.b;
}

double eval_reversed(const OpTree &t, const Trajectory &x) {
  if (t.kind == OpTree::Kind::leaf) return leaf_value(t, x);
  double acc = t.kind == OpTree::Kind::max_node
                   ? -std::numeric_limits<double>::infinity()
                   : std::numeric_limits<double>::infinity();
  for (const auto &c : t.children) {
    double v = eval_reversed(c, x);
    acc = t.kind == OpTree::Kind::max_node ? std::max(acc, v) : std::min(acc, v);
  }
  return acc;
}

double eval_original(const OpTree &t, const Trajectory &x) {
  return -eval_reversed(t, x);
}

double smooth_min(const std::vector<double> &values, double k) {
  if (values.empty()) throw std::invalid_argument("smooth_min of empty list");
  if (k <= 0.0) throw std::invalid_argument("smooth parameter must be positive");
  double lo = values[0];
  for (double v : values) lo = std::min(lo, v);
  double sum = 0.0;
  for (double v : values) sum += std::exp(-k * (v - lo));
  return lo - std::log(sum) / k;
}

double eval_smoothed(const OpTree &t, const Trajectory &x, const SmoothingConfig &cfg) {
  if (cfg.k <= 0.0) throw std::invalid_argument("smooth parameter must be positive");
  if (t.kind == OpTree::Kind::leaf) return leaf_value(t, x);
  if (t.kind == OpTree::Kind::max_node) {
    double acc = -std::numeric_limits<double>::infinity();
    for (const auto &c : t.children) acc = std::max(acc, eval_smoothed(c, x, cfg));
    return acc;
  }
  std::vector<double> vals;
  vals.reserve(t.children.size());
  for (const auto &c : t.children) vals.push_back(eval_smoothed(c, x, cfg));
  return smooth_min(vals, cfg.k);
}

static double grad_walk(const OpTree &t, const Trajectory &x, double k,
                        double weight, Eigen::VectorXd &grad) {
  if (t.kind == OpTree::Kind::leaf) {
    const int n = static_cast<int>(x.x.cols());
    grad.segment(t.timestep * n, n) += weight * t.pred.a;
    return leaf_value(t, x);
  }
  if (t.kind == OpTree::Kind::max_node) {
    // Value pass first; the whole weight goes to the first argmax child.
    std::vector<double> vals(t.children.size());
    size_t best = 0;
    for (size_t i = 0; i < t.children.size(); ++i) {
      vals[i] = eval_smoothed(t.children[i], x, SmoothingConfig{k});
      if (vals[i] > vals[best]) best = i;
    }
    grad_walk(t.children[best], x, k, weight, grad);
    return vals[best];
  }
  // min node: softmax weights exp(-k(v_i - lo)) / sum
  std::vector<double> vals(t.children.size());
  for (size_t i = 0; i < t.children.size(); ++i)
    vals[i] = eval_smoothed(t.children[i], x, SmoothingConfig{k});
  double lo = *std::min_element(vals.begin(), vals.end());
  double denom = 0.0;
  for (double v : vals) denom += std::exp(-k * (v - lo));
  for (size_t i = 0; i < t.children.size(); ++i) {
    double w = std::exp(-k * (vals[i] - lo)) / denom;
    grad_walk(t.children[i], x, k, weight * w, grad);
  }
  return lo - std::log(denom) / k;
}

Eigen::VectorXd grad_smoothed(const OpTree &t, const Trajectory &x,
                              const SmoothingConfig &cfg) {
  if (cfg.k <= 0.0) throw std::invalid_argument("smooth parameter must be positive");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.x.rows() * x.x.cols());
  grad_walk(t, x, cfg.k, 1.0, grad);
  return grad;
}

double smoothing_gap(const OpTree &t, double k) {
  if (k <= 0.0) throw std::invalid_argument("smooth parameter must be positive");
  const int depth = min_depth(t);
  const int fanin = max_min_fanin(t);
  if (depth == 0 || fanin <= 1) return 0.0;
  return depth * std::log(static_cast<double>(fanin)) / k;
}

} // namespace stlsynth
