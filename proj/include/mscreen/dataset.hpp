#pragma once

#include <utility>

#include "mscreen/types.hpp"

namespace mscreen {

/// Feature matrix, binary labels and per-sample weights defining the
/// reweighted empirical measure. Weights live in [0, 1]; both classes must
/// carry positive weight.
struct WeightedDataset {
  Matrix features;  // n x p
  LabelVector labels;  // n, values in {0, 1}
  Vector weights;   // n, values in [0, 1]

  WeightedDataset() = default;
  WeightedDataset(Matrix x, LabelVector y, Vector w)
      : features(std::move(x)), labels(std::move(y)), weights(std::move(w)) {
    validate();
    feature_bound_ = features.size() > 0 ? features.cwiseAbs().maxCoeff() : 0.0;
  }

  Index n() const { return features.rows(); }
  Index p() const { return features.cols(); }

  /// Max |x_ij| recorded at construction (the bounded-feature constant).
  double feature_bound() const { return feature_bound_; }

  void validate() const;

  /// Closed-form weights for the empty conditioning set: each sample gets the
  /// empirical frequency of the opposite class.
  static Vector initial_weights(const LabelVector& labels);

  /// Same dataset with new weights (features/labels shared by copy).
  WeightedDataset reweighted(Vector w) const {
    return WeightedDataset(features, labels, std::move(w));
  }

 private:
  double feature_bound_ = 0.0;
};

/// Build a dataset with the class-frequency initial weights.
WeightedDataset make_dataset(Matrix features, LabelVector labels);

/// Total between/within pair weight over ordered distinct pairs (i != i').
struct PairMass {
  double between_mass = 0.0;
  double within_mass = 0.0;

  /// Degeneracy floor: 1e-12 * (sum of weights)^2.
  bool degenerate(double total_weight) const {
    const double floor = 1e-12 * total_weight * total_weight;
    return between_mass <= floor || within_mass <= floor;
  }
};

/// Closed-form pair masses in O(n).
PairMass pair_mass(const WeightedDataset& ds);

}  // namespace mscreen
