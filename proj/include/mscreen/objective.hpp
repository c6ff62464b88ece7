#pragma once

#include <cstdint>
#include <functional>

#include "mscreen/dataset.hpp"
#include "mscreen/kernel.hpp"
#include "mscreen/types.hpp"

namespace mscreen {

struct EvalOptions {
  int threads = 0;  // 0 = process default

  // Optional mini-batch of unordered pairs, sampled without replacement.
  // 0 evaluates the full U-statistic.
  Index pair_sample = 0;
  std::uint64_t sample_seed = 0;
};

struct ObjectiveEval {
  double value = 0.0;
  Vector gradient;  // empty unless a gradient was requested
};

/// Between-minus-within weighted average of f(<beta, delta>) over distinct
/// sample pairs, each side normalized by its own pair mass.
///
/// One fused pass is O(n^2 p) time and O(p) extra memory per block; the
/// n x n delta tensor is never materialized. Pairs are reduced in fixed-size
/// index blocks combined in block order, so results do not depend on the
/// thread count.
double evaluate(const WeightedDataset& ds, const Vector& beta,
                const KernelSpec& spec, const EvalOptions& opts = {});

/// Coordinate j of the gradient is the between-minus-within weighted average
/// of delta_j * f'(<beta, delta>).
Vector gradient(const WeightedDataset& ds, const Vector& beta,
                const KernelSpec& spec, const EvalOptions& opts = {});

/// Single fused pass producing both the value and the gradient.
ObjectiveEval evaluate_with_gradient(const WeightedDataset& ds,
                                     const Vector& beta,
                                     const KernelSpec& spec,
                                     const EvalOptions& opts = {});

/// Objective abstraction consumed by the optimizer: beta -> (value, grad).
using ObjectiveFn = std::function<ObjectiveEval(const Vector&)>;

/// Wrap a dataset (captured by value) as an ObjectiveFn.
ObjectiveFn make_sample_objective(WeightedDataset ds, KernelSpec spec,
                                  EvalOptions opts = {});

}  // namespace mscreen
