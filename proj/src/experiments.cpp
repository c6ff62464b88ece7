#include "mscreen/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mscreen/parallel.hpp"

namespace mscreen {

const char* to_string(Method method) {
  switch (method) {
    case Method::MetricLaplace: return "metric_laplace";
    case Method::MetricGaussian: return "metric_gaussian";
    case Method::MarginalDCor: return "marginal_dcor";
  }
  return "unknown";
}

void ExperimentPlan::validate() const {
  validate_model(model);
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (n < 4) throw std::invalid_argument("n must be >= 4");
  if (noise_dims.empty()) throw std::invalid_argument("noise_dims must be nonempty");
  if (methods.empty()) throw std::invalid_argument("methods must be nonempty");
  if (resolved_select_k() < 1) throw std::invalid_argument("select_k must be >= 1");
  if (std::holds_alternative<DiscreteModel>(model))
    throw std::invalid_argument("recovery plans need a parametric model");
}

Index ExperimentPlan::resolved_select_k() const {
  return select_k > 0 ? select_k
                      : static_cast<Index>(model_signal_set(model).size());
}

namespace {

ModelSpec with_dimension(const ModelSpec& model, Index p) {
  ModelSpec out = model;
  std::visit(
      [p](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (!std::is_same_v<T, DiscreteModel>) m.p = p;
      },
      out);
  return out;
}

std::vector<Index> top_k_by_dcor(const RawData& data, Index k) {
  const Index p = data.features.cols();
  Vector y(data.labels.size());
  for (Index i = 0; i < y.size(); ++i) y[i] = data.labels[i];
  std::vector<std::pair<double, Index>> scored(p);
  for (Index j = 0; j < p; ++j)
    scored[j] = {distance_correlation(data.features.col(j), y), j};
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<Index> out;
  for (Index j = 0; j < std::min<Index>(k, p); ++j) out.push_back(scored[j].second);
  return out;
}

std::vector<Index> run_metric_method(const RawData& data, const ExperimentPlan& plan,
                                     DeltaOrder q, std::uint64_t seed) {
  // Columns are rescaled to max |x| = 1 (the feature-bound convention) so the
  // budget keeps <beta, delta> in the kernel's responsive range.
  Matrix x = data.features;
  for (Index j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).cwiseAbs().maxCoeff();
    if (m > 0) x.col(j) /= m;
  }
  ScreenConfig cfg;
  cfg.mode = ScreenMode::LowDim;
  if (plan.gamma_gate)
    cfg.gamma_mode = GammaPermutation{plan.n_perm, plan.quantile};
  else
    cfg.gamma_mode = GammaTheory{0.0, 0.0};  // cap-terminated rounds
  cfg.budget = plan.budget;
  cfg.ascent = plan.ascent;
  cfg.max_rounds = plan.max_rounds;
  cfg.max_selected = plan.resolved_select_k();
  cfg.kernel = KernelSpec::neg_exp(1.0, q);
  cfg.seed = seed;
  cfg.threads = 1;  // the harness parallelizes across cells
  const ScreenResult res = screen(make_dataset(std::move(x), data.labels), cfg);
  return res.final_selected;
}

}  // namespace

double distance_correlation(const Vector& x, const Vector& y) {
  const Index n = x.size();
  if (n != y.size()) throw std::invalid_argument("length mismatch");
  if (n < 4) throw std::invalid_argument("need n >= 4");

  // Row means and grand means of the |.| distance matrices.
  Vector ax = Vector::Zero(n), ay = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      ax[i] += std::abs(x[i] - x[j]);
      ay[i] += std::abs(y[i] - y[j]);
    }
  }
  ax /= static_cast<double>(n);
  ay /= static_cast<double>(n);
  const double gx = ax.mean();
  const double gy = ay.mean();

  double sxy = 0, sxx = 0, syy = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double a = std::abs(x[i] - x[j]) - ax[i] - ax[j] + gx;
      const double b = std::abs(y[i] - y[j]) - ay[i] - ay[j] + gy;
      sxy += a * b;
      sxx += a * a;
      syy += b * b;
    }
  }
  if (sxx <= 0 || syy <= 0) return 0.0;  // constant argument
  const double dcor2 = sxy / std::sqrt(sxx * syy);
  return std::sqrt(std::max(0.0, dcor2));
}

RecoveryReport run_plan(const ExperimentPlan& plan) {
  plan.validate();
  const std::vector<Index> signals = model_signal_set(plan.model);
  const Index select_k = plan.resolved_select_k();
  const Index signal_count = static_cast<Index>(signals.size());
  const std::size_t n_dims = plan.noise_dims.size();
  const std::size_t n_methods = plan.methods.size();

  struct TaskResult {
    // hits[m][v] = 1 if method m recovered signal v in this rep
    std::vector<std::vector<int>> hits;
    std::vector<int> ok;
    std::vector<double> runtime_ms;
  };
  std::vector<TaskResult> results(n_dims * plan.reps);

  const Rng root(plan.seed);
  auto task = [&](std::size_t t) {
    const std::size_t dim_idx = t / plan.reps;
    const int rep = static_cast<int>(t % plan.reps);
    const Index noise = plan.noise_dims[dim_idx];
    const Index p = signal_count + noise;
    const ModelSpec model = with_dimension(plan.model, p);

    Rng cell_rng = root.fork(dim_idx * 1000003ULL + rep + 1);
    const RawData data = generate(model, plan.n, cell_rng.next_u64());

    TaskResult out;
    out.hits.assign(n_methods, std::vector<int>(signal_count, 0));
    out.ok.assign(n_methods, 0);
    out.runtime_ms.assign(n_methods, 0.0);

    for (std::size_t m = 0; m < n_methods; ++m) {
      const auto start = std::chrono::steady_clock::now();
      try {
        std::vector<Index> chosen;
        switch (plan.methods[m]) {
          case Method::MetricLaplace:
            chosen = run_metric_method(data, plan, DeltaOrder::L1,
                                       cell_rng.next_u64());
            break;
          case Method::MetricGaussian:
            chosen = run_metric_method(data, plan, DeltaOrder::L2,
                                       cell_rng.next_u64());
            break;
          case Method::MarginalDCor:
            chosen = top_k_by_dcor(data, select_k);
            break;
        }
        out.ok[m] = 1;
        for (Index v = 0; v < signal_count; ++v)
          out.hits[m][v] =
              std::find(chosen.begin(), chosen.end(), signals[v]) != chosen.end();
      } catch (const Error&) {
        out.ok[m] = 0;  // failed cell, recorded below
      }
      out.runtime_ms[m] =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - start)
              .count();
    }
    results[t] = std::move(out);
  };

  parallel_for_index(n_dims * plan.reps, task, plan.threads);

  RecoveryReport report;
  report.signal_variables = signals;
  for (std::size_t m = 0; m < n_methods; ++m) {
    for (std::size_t d = 0; d < n_dims; ++d) {
      RecoveryCell cell;
      cell.method = plan.methods[m];
      cell.noise_dim = plan.noise_dims[d];
      cell.recovery.assign(signal_count, 0.0);
      double runtime = 0;
      for (int rep = 0; rep < plan.reps; ++rep) {
        const TaskResult& r = results[d * plan.reps + rep];
        ++cell.reps;
        runtime += r.runtime_ms[m];
        if (!r.ok[m]) {
          ++cell.failed;
          continue;
        }
        bool all = true;
        for (Index v = 0; v < signal_count; ++v) {
          cell.recovery[v] += r.hits[m][v];
          all = all && r.hits[m][v];
        }
        cell.all_recovered += all;
      }
      const int effective = cell.reps - cell.failed;
      if (effective > 0) {
        for (double& r : cell.recovery) r /= effective;
        cell.all_recovered /= effective;
      }
      cell.mean_runtime_ms = runtime / std::max(cell.reps, 1);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

namespace {

struct MonteCarloStat {
  double sum = 0, sumsq = 0;
  Index count = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++count;
  }
  double mean() const { return sum / count; }
  double se() const {
    const double m = mean();
    const double var = std::max(0.0, sumsq / count - m * m);
    return std::sqrt(var / count);
  }
};

double fit_log_slope(const std::vector<Index>& ps, const std::vector<double>& vals) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const Index m = static_cast<Index>(ps.size());
  for (Index i = 0; i < m; ++i) {
    const double lx = std::log(static_cast<double>(ps[i]));
    const double ly = std::log(std::abs(vals[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

ScalingProbeResult l1_vs_l2_scaling_probe(const std::vector<Index>& p_list,
                                          const ScalingProbeOptions& opts) {
  if (p_list.size() < 2) throw std::invalid_argument("need at least two dimensions");
  for (std::size_t i = 1; i < p_list.size(); ++i)
    if (p_list[i] <= p_list[i - 1])
      throw std::invalid_argument("p_list must be increasing");
  if (!(opts.delta > 0 && opts.delta < 1))
    throw std::invalid_argument("delta must lie in (0,1)");

  ScalingProbeResult result;
  const double sigma = std::sqrt(opts.sigma2);
  const double sd_class[2] = {sigma * std::sqrt(1.0 + opts.delta),
                              sigma * std::sqrt(1.0 - opts.delta)};

  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    const Index p = p_list[pi];
    if (p < 2) throw std::invalid_argument("dimensions must be >= 2");
    Rng rng = Rng(opts.seed).fork(pi + 1);
    const double beta_coord = 1.0 / static_cast<double>(p);

    MonteCarloStat obj_g, obj_l, grad_g, grad_l;
    // Between and within expectations share the signal-coordinate normals and
    // the noise offset of each draw, so their difference is estimated with
    // O(1) relative error instead of being swamped by the O(1) level terms.
    for (Index d = 0; d < opts.n_draws; ++d) {
      double c1 = 0, c2 = 0;  // noise offsets for q = 1 and q = 2
      for (Index j = 1; j < p; ++j) {
        const double diff = sigma * (rng.normal() - rng.normal());
        c1 += beta_coord * std::abs(diff);
        c2 += beta_coord * diff * diff;
      }
      const double z1 = rng.normal();
      const double z2 = rng.normal();

      double f1[2][2], f2[2][2], g1[2][2], g2[2][2];
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double diff = sd_class[a] * z1 - sd_class[b] * z2;
          const double d1 = std::abs(diff);
          const double d2 = diff * diff;
          const double e1 = std::exp(-(c1 + beta_coord * d1));
          const double e2 = std::exp(-(c2 + beta_coord * d2));
          f1[a][b] = -e1;
          f2[a][b] = -e2;
          g1[a][b] = d1 * e1;
          g2[a][b] = d2 * e2;
        }
      }
      auto bw = [](double h[2][2]) {
        return 0.5 * (h[0][1] + h[1][0]) - 0.5 * (h[0][0] + h[1][1]);
      };
      obj_l.add(bw(f1));
      obj_g.add(bw(f2));
      grad_l.add(bw(g1));
      grad_g.add(bw(g2));
    }

    ScalingProbeRow row;
    row.p = p;
    row.objective_gauss = obj_g.mean();
    row.objective_gauss_se = obj_g.se();
    row.objective_lap = obj_l.mean();
    row.objective_lap_se = obj_l.se();
    row.gradient_gauss = grad_g.mean();
    row.gradient_gauss_se = grad_g.se();
    row.gradient_lap = grad_l.mean();
    row.gradient_lap_se = grad_l.se();
    result.rows.push_back(row);
  }

  std::vector<double> og, ol, gg, gl;
  for (const auto& r : result.rows) {
    og.push_back(r.objective_gauss);
    ol.push_back(r.objective_lap);
    gg.push_back(r.gradient_gauss);
    gl.push_back(r.gradient_lap);
  }
  result.objective_slope_gauss = fit_log_slope(p_list, og);
  result.objective_slope_lap = fit_log_slope(p_list, ol);
  result.gradient_slope_gauss = fit_log_slope(p_list, gg);
  result.gradient_slope_lap = fit_log_slope(p_list, gl);
  return result;
}

}  // namespace mscreen
