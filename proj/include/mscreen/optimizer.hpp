#pragma once

#include <functional>
#include <map>
#include <vector>

#include "mscreen/objective.hpp"
#include "mscreen/types.hpp"

namespace mscreen {

/// Feasible set {beta >= 0, ||beta||_1 <= b} with optional coordinates pinned
/// at fixed values (used by the hierarchical screening rounds).
struct ConstraintSet {
  double budget = 1.0;
  std::map<Index, double> pinned;  // coordinate -> fixed value >= 0

  double pinned_sum() const {
    double s = 0;
    for (const auto& [k, v] : pinned) s += v;
    return s;
  }
  void validate(Index p) const;
};

struct AscentConfig {
  double step_coeff = 1.0;       // stepsize alpha = step_coeff / p
  double l1_penalty = 0.0;       // lambda >= 0, applied as a gradient shift
  int max_iters = 200;           // independent of p
  double stationarity_tol = 0.0; // 0 = auto: 1e-8 * budget
  double support_tol = 0.0;      // 0 = auto: 1e-6 * budget
  bool backtracking = false;     // optional halving line search
  int backtracking_max_halvings = 20;

  // Diagnostics hook, called with (iteration, iterate) after every step.
  std::function<void(int, const Vector&)> on_iterate;

  void validate() const;
};

struct AscentResult {
  Vector beta;
  std::vector<double> objective_trace;  // penalized objective, incl. start
  bool converged = false;
  int iterations = 0;
  std::vector<Index> support;  // free coordinates with beta_j > support_tol
};

/// Euclidean projection onto the constraint set. Pinned coordinates are held
/// at their fixed values; the free part clips negatives and, when the clipped
/// sum exceeds the residual budget, projects onto the scaled simplex by the
/// sort-and-threshold method.
Vector project(const Vector& v, const ConstraintSet& cs);

/// Projected gradient ascent, beta <- project(beta + alpha * (grad - lambda)),
/// until the projected displacement drops below the stationarity tolerance or
/// max_iters is reached. The last iterate is reported either way.
AscentResult ascend_fn(const ObjectiveFn& objective, const ConstraintSet& cs,
                       const AscentConfig& cfg, const Vector& beta0);

AscentResult ascend(const WeightedDataset& ds, const KernelSpec& spec,
                    const ConstraintSet& cs, const AscentConfig& cfg,
                    const Vector& beta0, const EvalOptions& opts = {});

/// True iff the projected-gradient displacement at beta is within tolerance.
bool is_stationary_fn(const ObjectiveFn& objective, const ConstraintSet& cs,
                      const AscentConfig& cfg, const Vector& beta);

bool is_stationary(const WeightedDataset& ds, const KernelSpec& spec,
                   const ConstraintSet& cs, const AscentConfig& cfg,
                   const Vector& beta, const EvalOptions& opts = {});

}  // namespace mscreen
