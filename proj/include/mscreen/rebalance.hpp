#pragma once

#include <vector>

#include "mscreen/dataset.hpp"
#include "mscreen/kernel.hpp"
#include "mscreen/types.hpp"

namespace mscreen {

struct BoostConfig {
  int rounds = 100;
  double learning_rate = 0.1;
  int max_leaves = 8;  // caps tree depth at log2(max_leaves)
  int min_leaf = 10;

  void validate() const;
};

/// Small regression tree on a subset of coordinates; leaf values are logit
/// increments.
struct BoostedTree {
  struct Node {
    Index feature = -1;  // absolute column; -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;  // leaf value (unscaled Newton step)
    int left = -1;
    int right = -1;
  };
  std::vector<Node> nodes;

  template <typename Row>
  double eval(const Row& x) const {
    int k = 0;
    while (nodes[k].feature >= 0)
      k = x[nodes[k].feature] <= nodes[k].threshold ? nodes[k].left
                                                    : nodes[k].right;
    return nodes[k].value;
  }
};

/// Fitted conditional model for P(Y=1 | X_A): unpenalized intercept plus a
/// boosted stump ensemble restricted to the columns of A. Predictions are
/// clamped to [1e-6, 1 - 1e-6].
struct CondProbModel {
  std::vector<Index> selected;  // the conditioning set A
  double intercept = 0.0;       // logit scale, recalibrated after boosting
  double learning_rate = 0.1;
  std::vector<BoostedTree> ensemble;
  bool near_degenerate = false;  // clamping active or recalibration stalled

  static constexpr double kClamp = 1e-6;

  template <typename Row>
  double logit(const Row& x) const {
    double f = intercept;
    for (const auto& t : ensemble) f += learning_rate * t.eval(x);
    return f;
  }

  template <typename Row>
  double prob1(const Row& x) const {
    const double p = 1.0 / (1.0 + std::exp(-logit(x)));
    return std::min(1.0 - kClamp, std::max(kClamp, p));
  }
};

/// Fit P(Y=1 | X_A) by logistic-loss gradient boosting on the raw (unweighted)
/// sample, then solve a one-dimensional Newton problem in the intercept so
/// that sum_i (y_i - p_i) = 0. A = empty yields the intercept-only base rate.
CondProbModel fit_conditional(const WeightedDataset& ds,
                              const std::vector<Index>& A,
                              const BoostConfig& cfg = {});

struct WeightUpdate {
  Vector weights;
  double between_mass = 0.0;
  double within_mass = 0.0;
  double effective_size_class0 = 0.0;
  double effective_size_class1 = 0.0;
};

/// Rebalancing weights w_i = phat(Y = 1 - y_i | x_i).
WeightUpdate compute_weights(const CondProbModel& model, const WeightedDataset& ds);

/// Diagnostic F((b/|A|) 1_A; Q_n) on the already-reweighted dataset; zero for
/// an empty set by convention. Small after correct rebalancing.
double residual_dependence(const WeightedDataset& ds_reweighted,
                           const std::vector<Index>& A, const KernelSpec& spec,
                           double budget);

}  // namespace mscreen
