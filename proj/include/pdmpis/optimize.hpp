#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pdmpis {

struct ObjectiveEvaluation {
  double value = 0.0;
  std::vector<double> gradient;
};

using Objective = std::function<ObjectiveEvaluation(std::span<const double>)>;
using ValueFunction = std::function<double(std::span<const double>)>;

struct BfgsOptions {
  double grad_tol = 1e-20;
  std::size_t max_iters = 200;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  std::size_t max_backtracks = 60;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  /// Set when no finite improving step could be found from the start.
  bool stalled_at_start = false;
  std::string message;
};

/// Projected BFGS on the box [lo, hi] with backtracking Armijo search.
/// Returns the best iterate, which is never worse than the start.
BfgsResult bfgs_minimize(const Objective& objective, std::span<const double> start,
                         std::span<const double> lo, std::span<const double> hi,
                         const BfgsOptions& options = {});

/// Central differences with step h * (1 + |x_i|).
std::vector<double> finite_diff_grad(const ValueFunction& f, std::span<const double> x,
                                     double h = 1e-5);

}  // namespace pdmpis
