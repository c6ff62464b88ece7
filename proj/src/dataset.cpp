#include "mscreen/dataset.hpp"

namespace mscreen {

void WeightedDataset::validate() const {
  const Index n = features.rows();
  if (n < 2) throw DataError("dataset needs at least two samples");
  if (labels.size() != n || weights.size() != n)
    throw DataError("features, labels and weights must have matching length");
  bool pos0 = false, pos1 = false;
  for (Index i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) throw DataError("labels must be binary {0,1}");
    const double w = weights[i];
    if (!(w >= 0.0 && w <= 1.0)) throw DataError("weights must lie in [0,1]");
    if (w > 0.0) (y == 1 ? pos1 : pos0) = true;
  }
  if (!pos0 || !pos1)
    throw DataError("each class needs at least one positively weighted sample");
  if (!features.allFinite()) throw DataError("features contain non-finite values");
}

Vector WeightedDataset::initial_weights(const LabelVector& labels) {
  const Index n = labels.size();
  Index ones = 0;
  for (Index i = 0; i < n; ++i) ones += labels[i];
  const double frac1 = static_cast<double>(ones) / static_cast<double>(n);
  Vector w(n);
  for (Index i = 0; i < n; ++i) w[i] = labels[i] == 1 ? 1.0 - frac1 : frac1;
  return w;
}

WeightedDataset make_dataset(Matrix features, LabelVector labels) {
  Vector w = WeightedDataset::initial_weights(labels);
  return WeightedDataset(std::move(features), std::move(labels), std::move(w));
}

PairMass pair_mass(const WeightedDataset& ds) {
  double s0 = 0, s1 = 0, q0 = 0, q1 = 0;
  for (Index i = 0; i < ds.n(); ++i) {
    const double w = ds.weights[i];
    if (ds.labels[i] == 1) {
      s1 += w;
      q1 += w * w;
    } else {
      s0 += w;
      q0 += w * w;
    }
  }
  PairMass m;
  m.between_mass = 2.0 * s0 * s1;
  m.within_mass = (s0 * s0 - q0) + (s1 * s1 - q1);
  return m;
}

}  // namespace mscreen
