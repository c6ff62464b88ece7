#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "mscreen/dataset.hpp"
#include "mscreen/kernel.hpp"
#include "mscreen/objective.hpp"
#include "mscreen/rng.hpp"
#include "mscreen/types.hpp"

namespace mscreen {

// ---------------------------------------------------------------------------
// Simulation models
// ---------------------------------------------------------------------------

/// Main effects through unequal class variances on the first four coordinates.
struct UnequalVarianceModel {
  double sigma2 = 1.0;
  std::vector<double> deltas = {0.4, 0.35, 0.3, 0.25};
  Index p = 54;
};

/// Two correlated signal blocks (1,2) and (3,4) whose correlation flips sign
/// with the class; weak main effects on coordinates 2 and 4.
struct QdaModel {
  double delta1 = 0.25;
  double delta2 = 0.2;
  double xi = 0.1;
  double rho = 0.5;
  Index p = 54;
};

/// logit P(Y=1|X) = |X2|/|X1| + coef * |X4|/|X3|, all features N(0,1).
struct RatioLogisticModel {
  double coef = 0.8;
  Index p = 54;
};

/// Pure interaction Y = 1{X1 * X2 > 0}, all features N(0,1).
struct XorModel {
  Index p = 100;
};

/// Binary +-1/2 features with per-coordinate signal delta_j (masking model):
/// P(X_j = +-1/2 | Y=1) = (1 +- delta_j)/2 and mirrored for Y=0.
struct BinaryMainEffectsModel {
  std::vector<double> deltas;
  Index p = 0;  // coordinates beyond deltas.size() are delta = 0 noise
};

/// Finite-support joint distribution of (X, Y).
struct DiscreteDist {
  struct Atom {
    Vector x;
    int y = 0;
    double prob = 0.0;
  };
  std::vector<Atom> support;

  Index p() const { return support.empty() ? 0 : support.front().x.size(); }
  void validate() const;
  double prob_y1() const;
};

struct DiscreteModel {
  DiscreteDist dist;
};

using ModelSpec = std::variant<UnequalVarianceModel, QdaModel,
                               RatioLogisticModel, XorModel,
                               BinaryMainEffectsModel, DiscreteModel>;

Index model_dim(const ModelSpec& model);
std::vector<Index> model_signal_set(const ModelSpec& model);
void validate_model(const ModelSpec& model);

struct RawData {
  Matrix features;
  LabelVector labels;
};

/// i.i.d. draws per the model's law; deterministic given the seed.
RawData generate(const ModelSpec& model, Index n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Discrete-distribution oracle
// ---------------------------------------------------------------------------

/// Weight function on support atoms; must be nonnegative.
using WeightFn = std::function<double(const Vector&, int)>;

/// w(x, y) = P(Y = 1-y), the class-balancing initial weights.
WeightFn balance_weight_fn(const DiscreteDist& dist);

/// w(x, y) = P(Y = 1-y | X_A = x_A), the exact rebalancing weights.
WeightFn rebalance_weight_fn(const DiscreteDist& dist, const std::vector<Index>& A);

/// Exact F(beta; Q^w) over all ordered support pairs including identical
/// atoms: the population measure draws the two points independently.
double population_objective(const DiscreteDist& dist, const Vector& beta,
                            const KernelSpec& spec, const WeightFn& weight_fn = {});

Vector population_gradient(const DiscreteDist& dist, const Vector& beta,
                           const KernelSpec& spec, const WeightFn& weight_fn = {});

/// Population objective/gradient wrapped for the optimizer.
ObjectiveFn make_population_objective(DiscreteDist dist, KernelSpec spec,
                                      WeightFn weight_fn = {});

/// Enumerated objective for the order-2 sign interaction under NegExp with an
/// independent-noise offset c: 0.5 * e^{-c/s} (1 - e^{-b1/s})(1 - e^{-b2/s}).
double xor_closed_form(double beta1, double beta2, double c,
                       const KernelSpec& spec = KernelSpec::neg_exp());

// Discrete-support builders (coordinates take values +-1/2).
DiscreteDist xor_discrete(int order, Index p);
DiscreteDist binary_main_effects_discrete(const std::vector<double>& deltas, Index p);

/// Sample n rows from a finite-support distribution.
RawData sample_discrete(const DiscreteDist& dist, Index n, Rng& rng);

/// The empirical distribution of a sample with uniform atom masses.
DiscreteDist empirical_distribution(const RawData& data);

}  // namespace mscreen
