#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mscreen/screening.hpp"
#include "mscreen/simgen.hpp"
#include "mscreen/types.hpp"

namespace mscreen {

enum class Method { MetricLaplace, MetricGaussian, MarginalDCor };

const char* to_string(Method method);

struct ExperimentPlan {
  ModelSpec model = UnequalVarianceModel{};
  std::vector<Index> noise_dims = {50, 250, 500, 750, 1000};
  Index n = 500;
  int reps = 50;
  std::vector<Method> methods = {Method::MetricLaplace, Method::MetricGaussian,
                                 Method::MarginalDCor};
  Index select_k = 0;  // 0 = number of signal variables in the model
  std::uint64_t seed = 0;

  // Screening configuration shared by the metric methods. By default rounds
  // run until select_k variables are chosen (coefficient-size tie-break);
  // gamma_gate enables the permutation threshold instead of the cap protocol.
  double budget = 10.0;
  bool gamma_gate = false;
  int n_perm = 100;
  double quantile = 0.95;
  AscentConfig ascent;
  int max_rounds = 10;

  int threads = 0;  // harness parallelism over (rep, noise_dim) tasks

  void validate() const;
  Index resolved_select_k() const;
};

struct RecoveryCell {
  Method method = Method::MetricLaplace;
  Index noise_dim = 0;
  std::vector<double> recovery;  // per signal variable, in model order
  double all_recovered = 0.0;
  int reps = 0;
  int failed = 0;
  double mean_runtime_ms = 0.0;
};

struct RecoveryReport {
  std::vector<Index> signal_variables;
  std::vector<RecoveryCell> cells;  // methods x noise_dims, plan order
};

/// Sample distance correlation between a column and the labels, computed from
/// double-centered pairwise distance matrices (V-statistic form). Returns 0
/// for a constant column.
double distance_correlation(const Vector& x, const Vector& y);

/// For each rep and noise dimension: generate data, run every method, and
/// record whether each signal variable lands in the top select_k choices.
RecoveryReport run_plan(const ExperimentPlan& plan);

struct ScalingProbeOptions {
  double delta = 0.5;   // variance gap of the single signal coordinate
  double sigma2 = 1.0;
  Index n_draws = 100000;  // Monte Carlo pair draws per dimension
  std::uint64_t seed = 0;
};

struct ScalingProbeRow {
  Index p = 0;
  double objective_gauss = 0, objective_gauss_se = 0;
  double objective_lap = 0, objective_lap_se = 0;
  double gradient_gauss = 0, gradient_gauss_se = 0;
  double gradient_lap = 0, gradient_lap_se = 0;
};

struct ScalingProbeResult {
  std::vector<ScalingProbeRow> rows;
  // Log-log slopes of |value| against p.
  double objective_slope_gauss = 0;
  double objective_slope_lap = 0;
  double gradient_slope_gauss = 0;
  double gradient_slope_lap = 0;
};

/// Monte Carlo estimates of the population objective and its first gradient
/// coordinate at beta = (1/p) 1, for the Laplace and Gaussian kernels on the
/// unequal-variance single-signal model, with log-log slope fits over p.
ScalingProbeResult l1_vs_l2_scaling_probe(const std::vector<Index>& p_list,
                                          const ScalingProbeOptions& opts = {});

}  // namespace mscreen
