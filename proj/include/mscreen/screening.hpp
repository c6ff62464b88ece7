#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mscreen/dataset.hpp"
#include "mscreen/kernel.hpp"
#include "mscreen/optimizer.hpp"
#include "mscreen/rebalance.hpp"
#include "mscreen/types.hpp"

namespace mscreen {

enum class ScreenMode { LowDim, HighDim, Hier };

/// gamma = c_gamma * sqrt(log p / n) * (1 + t)
struct GammaTheory {
  double c_gamma = 1.0;
  double t = 0.0;
};

/// Empirical quantile of F(beta0; Qn)^2 over label permutations.
struct GammaPermutation {
  int n_perm = 200;
  double quantile = 0.95;
};

using GammaMode = std::variant<GammaTheory, GammaPermutation>;

struct ScreenConfig {
  ScreenMode mode = ScreenMode::LowDim;
  GammaMode gamma_mode = GammaPermutation{};
  double lambda_coeff = 1.0;  // c_lambda for the l1 penalty (HighDim/Hier)
  double lambda_t = 0.0;      // lambda = c_lambda * sqrt(log p / n) * (1 + t)
  double budget = 10.0;
  AscentConfig ascent;
  std::optional<double> tau;  // Hier pin value; default budget / (2 * max_rounds)
  int max_rounds = 10;
  Index max_selected = 0;  // 0 = no cap
  KernelSpec kernel;
  BoostConfig boost;
  std::uint64_t seed = 0;
  int threads = 0;

  void validate() const;
  double hier_tau() const {
    return tau ? *tau : budget / (2.0 * static_cast<double>(max_rounds));
  }
};

enum class RoundOutcome {
  Continued,          // variables selected, screening proceeds
  ThresholdFailed,    // F(beta0)^2 <= gamma (LowDim)
  NoNewVariables,     // round added nothing (HighDim/Hier convergence)
  CapReached,
  MaxRounds,
  DegenerateWeights,
};

const char* to_string(RoundOutcome outcome);

struct WeightSummary {
  double effective_size_class0 = 0;
  double effective_size_class1 = 0;
  double between_mass = 0;
  double within_mass = 0;
  double min_weight = 0;
  double max_weight = 0;
};

struct RoundDiagnostics {
  double objective_at_init = 0;  // F(beta0; Qn) under this round's weights
  double threshold_used = 0;     // gamma (LowDim) or lambda (HighDim/Hier)
  bool ascent_ran = false;
  AscentResult ascent;
  WeightSummary weight_summary;
  std::vector<Index> new_support;  // after any cap truncation
  RoundOutcome termination_reason = RoundOutcome::Continued;
};

struct ScreenResult {
  std::vector<std::vector<Index>> selected;  // cumulative trajectory per round
  std::vector<RoundDiagnostics> rounds;
  std::vector<Index> final_selected;  // ordered by selection
  RoundOutcome termination = RoundOutcome::MaxRounds;
};

/// Self-penalized screening: rounds of unpenalized ascent gated by the
/// threshold check F(beta0; Qn)^2 > gamma.
ScreenResult screen_low_dim(const WeightedDataset& ds, const ScreenConfig& cfg);

/// l1-penalized screening; stops when a round adds no new variables.
ScreenResult screen_high_dim(const WeightedDataset& ds, const ScreenConfig& cfg);

/// Like screen_high_dim, but every previously selected coordinate is pinned
/// at tau during later rounds.
ScreenResult screen_hier(const WeightedDataset& ds, const ScreenConfig& cfg);

ScreenResult screen(const WeightedDataset& ds, const ScreenConfig& cfg);

/// Empirical quantile of F(beta0; Qn^pi)^2 over label permutations that
/// preserve class counts, holding the per-sample weights fixed.
double calibrate_gamma_permutation(const WeightedDataset& ds,
                                   const ScreenConfig& cfg, int n_perm,
                                   double quantile);

/// f'(0) times the weighted between-minus-within mean absolute difference of
/// column j.
double signal_strength_main(const WeightedDataset& ds, const KernelSpec& spec,
                            Index j);

/// (1/tau) * E_{B-W}[f(tau * ||x_A - x'_A||_1)] under the current weights.
double signal_strength_hier(const WeightedDataset& ds, const KernelSpec& spec,
                            const std::vector<Index>& A, double tau);

}  // namespace mscreen
