#include "mscreen/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mscreen/objective.hpp"

namespace mscreen {

void BoostConfig::validate() const {
  if (rounds < 0) throw std::invalid_argument("rounds must be >= 0");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be > 0");
  if (max_leaves < 2) throw std::invalid_argument("max_leaves must be >= 2");
  if (min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
}

namespace {

constexpr double kHessFloor = 1e-12;

struct TreeBuilder {
  const Matrix& x;
  const std::vector<Index>& cols;
  const Vector& grad;
  const Vector& hess;
  int max_depth;
  int min_leaf;
  BoostedTree tree;

  static double leaf_score(double g, double h) { return g * g / (h + kHessFloor); }

  int build(std::vector<Index>& idx, int lo, int hi, int depth) {
    double g = 0, h = 0;
    for (int k = lo; k < hi; ++k) {
      g += grad[idx[k]];
      h += hess[idx[k]];
    }

    double best_gain = 0;
    Index best_col = -1;
    double best_thresh = 0;
    if (depth < max_depth && hi - lo >= 2 * min_leaf) {
      for (Index col : cols) {
        std::sort(idx.begin() + lo, idx.begin() + hi,
                  [&](Index a, Index b) { return x(a, col) < x(b, col); });
        double gl = 0, hl = 0;
        for (int k = lo; k < hi - 1; ++k) {
          gl += grad[idx[k]];
          hl += hess[idx[k]];
          const double v = x(idx[k], col);
          const double next = x(idx[k + 1], col);
          if (v == next) continue;
          const int nl = k - lo + 1;
          const int nr = hi - k - 1;
          if (nl < min_leaf || nr < min_leaf) continue;
          const double gain =
              leaf_score(gl, hl) + leaf_score(g - gl, h - hl) - leaf_score(g, h);
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best_col = col;
            best_thresh = 0.5 * (v + next);
          }
        }
      }
    }

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (best_col < 0) {
      tree.nodes[node_id].value = g / (h + kHessFloor);
      return node_id;
    }

    // Partition indices around the winning threshold.
    std::sort(idx.begin() + lo, idx.begin() + hi,
              [&](Index a, Index b) { return x(a, best_col) < x(b, best_col); });
    int mid = lo;
    while (mid < hi && x(idx[mid], best_col) <= best_thresh) ++mid;

    tree.nodes[node_id].feature = best_col;
    tree.nodes[node_id].threshold = best_thresh;
    const int left = build(idx, lo, mid, depth + 1);
    const int right = build(idx, mid, hi, depth + 1);
    tree.nodes[node_id].left = left;
    tree.nodes[node_id].right = right;
    return node_id;
  }
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_prob(double p) {
  return std::min(1.0 - CondProbModel::kClamp, std::max(CondProbModel::kClamp, p));
}

}  // namespace

CondProbModel fit_conditional(const WeightedDataset& ds,
                              const std::vector<Index>& A,
                              const BoostConfig& cfg) {
  cfg.validate();
  const Index n = ds.n();
  if (n == 0) throw std::invalid_argument("fit_conditional: empty dataset");
  Index ones = 0;
  for (Index i = 0; i < n; ++i) ones += ds.labels[i];
  if (ones == 0 || ones == n)
    throw std::invalid_argument("fit_conditional: single-class dataset");
  for (Index j : A)
    if (j < 0 || j >= ds.p())
      throw std::invalid_argument("fit_conditional: column out of range");

  CondProbModel model;
  model.selected = A;
  model.learning_rate = cfg.learning_rate;
  const double rate = static_cast<double>(ones) / static_cast<double>(n);
  model.intercept = std::log(rate / (1.0 - rate));

  Vector logits = Vector::Constant(n, model.intercept);
  if (!A.empty()) {
    const int depth_cap = static_cast<int>(std::floor(std::log2(cfg.max_leaves)));
    const int max_depth = std::min<int>(depth_cap, static_cast<int>(A.size()));
    Vector grad(n), hess(n);
    std::vector<Index> idx(n);
    for (int round = 0; round < cfg.rounds; ++round) {
      for (Index i = 0; i < n; ++i) {
        const double p = sigmoid(logits[i]);
        grad[i] = ds.labels[i] - p;
        hess[i] = p * (1.0 - p);
      }
      std::iota(idx.begin(), idx.end(), Index{0});
      TreeBuilder builder{ds.features, A, grad, hess, max_depth, cfg.min_leaf, {}};
      builder.build(idx, 0, static_cast<int>(n), 0);
      if (builder.tree.nodes.size() == 1 && builder.tree.nodes[0].value == 0.0)
        break;  // nothing left to fit
      for (Index i = 0; i < n; ++i)
        logits[i] += cfg.learning_rate * builder.tree.eval(ds.features.row(i));
      model.ensemble.push_back(std::move(builder.tree));
    }
  }

  // Newton recalibration of the intercept against the clamped predictions.
  double offset = 0;
  const double target_tol = 1e-10 * static_cast<double>(n) * 0.5;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    double resid = 0, curvature = 0;
    for (Index i = 0; i < n; ++i) {
      const double p = clamp_prob(sigmoid(logits[i] + offset));
      resid += ds.labels[i] - p;
      if (p > CondProbModel::kClamp && p < 1.0 - CondProbModel::kClamp)
        curvature += p * (1.0 - p);
    }
    if (std::abs(resid) <= target_tol) {
      converged = true;
      break;
    }
    if (curvature <= kHessFloor) break;  // every prediction clamped
    offset += resid / curvature;
  }
  model.intercept += offset;
  if (!converged) model.near_degenerate = true;

  for (Index i = 0; i < n; ++i) {
    const double p = sigmoid(logits[i] + offset);
    if (p <= CondProbModel::kClamp || p >= 1.0 - CondProbModel::kClamp) {
      model.near_degenerate = true;
      break;
    }
  }
  return model;
}

WeightUpdate compute_weights(const CondProbModel& model, const WeightedDataset& ds) {
  const Index n = ds.n();
  WeightUpdate upd;
  upd.weights.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double p1 = model.prob1(ds.features.row(i));
    upd.weights[i] = ds.labels[i] == 1 ? 1.0 - p1 : p1;
    (ds.labels[i] == 1 ? upd.effective_size_class1 : upd.effective_size_class0) +=
        upd.weights[i];
  }
  const PairMass m = pair_mass(WeightedDataset(ds.features, ds.labels, upd.weights));
  upd.between_mass = m.between_mass;
  upd.within_mass = m.within_mass;
  return upd;
}

double residual_dependence(const WeightedDataset& ds_reweighted,
                           const std::vector<Index>& A, const KernelSpec& spec,
                           double budget) {
  if (A.empty()) return 0.0;
  Vector beta = Vector::Zero(ds_reweighted.p());
  const double value = budget / static_cast<double>(A.size());
  for (Index j : A) beta[j] = value;
  return evaluate(ds_reweighted, beta, spec);
}

}  // namespace mscreen
