#include "mscreen/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace mscreen {

void ConstraintSet::validate(Index p) const {
  if (!(budget > 0)) throw InfeasibleConstraint("budget must be positive");
  double s = 0;
  for (const auto& [k, v] : pinned) {
    if (k < 0 || k >= p) throw InfeasibleConstraint("pinned index out of range");
    if (!(v >= 0)) throw InfeasibleConstraint("pinned values must be >= 0");
    s += v;
  }
  if (s > budget)
    throw InfeasibleConstraint("pinned values exceed the l1 budget");
}

void AscentConfig::validate() const {
  if (!(step_coeff > 0)) throw std::invalid_argument("step_coeff must be > 0");
  if (!(l1_penalty >= 0)) throw std::invalid_argument("l1_penalty must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
}

Vector project(const Vector& v, const ConstraintSet& cs) {
  if (!v.allFinite()) throw std::invalid_argument("project: non-finite input");
  const Index p = v.size();
  cs.validate(p);
  const double residual = cs.budget - cs.pinned_sum();

  Vector out(p);
  std::vector<Index> free;
  free.reserve(p);
  for (Index j = 0; j < p; ++j) {
    auto it = cs.pinned.find(j);
    if (it != cs.pinned.end()) {
      out[j] = it->second;
    } else {
      free.push_back(j);
      out[j] = std::max(v[j], 0.0);
    }
  }

  double clipped_sum = 0;
  for (Index j : free) clipped_sum += out[j];
  // Relative slack keeps re-projection of an already-projected point exact.
  if (clipped_sum <= residual + 1e-14 * (1.0 + residual)) return out;

  // Simplex projection of the clipped free part at radius `residual`.
  std::vector<double> u;
  u.reserve(free.size());
  for (Index j : free) u.push_back(out[j]);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0;
  double theta = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - residual) / static_cast<double>(k + 1);
    if (u[k] - t > 0)
      theta = t;
    else
      break;
  }
  for (Index j : free) out[j] = std::max(out[j] - theta, 0.0);
  return out;
}

namespace {

double penalized_value(double value, const Vector& beta, double lambda) {
  return lambda == 0.0 ? value : value - lambda * beta.sum();
}

}  // namespace

AscentResult ascend_fn(const ObjectiveFn& objective, const ConstraintSet& cs,
                       const AscentConfig& cfg, const Vector& beta0) {
  cfg.validate();
  const Index p = beta0.size();
  cs.validate(p);
  const double alpha0 = cfg.step_coeff / static_cast<double>(p);
  const double tol = cfg.stationarity_tol > 0 ? cfg.stationarity_tol
                                              : 1e-8 * cs.budget;
  const double stol = cfg.support_tol > 0 ? cfg.support_tol : 1e-6 * cs.budget;

  AscentResult res;
  res.beta = beta0;
  ObjectiveEval cur = objective(res.beta);
  res.objective_trace.push_back(penalized_value(cur.value, res.beta, cfg.l1_penalty));

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    Vector step_grad = (cur.gradient.array() - cfg.l1_penalty).matrix();
    double alpha = alpha0;
    Vector next = project(res.beta + alpha * step_grad, cs);
    const double displacement = (next - res.beta).lpNorm<Eigen::Infinity>();
    res.iterations = iter + 1;

    if (displacement <= tol) {
      res.converged = true;
      if (cfg.on_iterate) cfg.on_iterate(res.iterations, res.beta);
      break;
    }

    ObjectiveEval next_eval = objective(next);
    if (cfg.backtracking) {
      const double cur_pen = res.objective_trace.back();
      int halvings = 0;
      while (penalized_value(next_eval.value, next, cfg.l1_penalty) <
                 cur_pen - 1e-12 &&
             halvings < cfg.backtracking_max_halvings) {
        alpha *= 0.5;
        next = project(res.beta + alpha * step_grad, cs);
        next_eval = objective(next);
        ++halvings;
      }
    }

    res.beta = next;
    cur = next_eval;
    res.objective_trace.push_back(
        penalized_value(cur.value, res.beta, cfg.l1_penalty));
    if (cfg.on_iterate) cfg.on_iterate(res.iterations, res.beta);
  }

  for (Index j = 0; j < p; ++j)
    if (!cs.pinned.count(j) && res.beta[j] > stol) res.support.push_back(j);
  return res;
}

AscentResult ascend(const WeightedDataset& ds, const KernelSpec& spec,
                    const ConstraintSet& cs, const AscentConfig& cfg,
                    const Vector& beta0, const EvalOptions& opts) {
  if (opts.pair_sample > 0) {
    // Resample a fresh pair mini-batch every iteration, deterministically.
    std::uint64_t iter_counter = 0;
    auto fn = [&ds, spec, opts, &iter_counter](const Vector& beta) mutable {
      EvalOptions it_opts = opts;
      it_opts.sample_seed = opts.sample_seed + iter_counter++;
      return evaluate_with_gradient(ds, beta, spec, it_opts);
    };
    return ascend_fn(fn, cs, cfg, beta0);
  }
  return ascend_fn(
      [&ds, &spec, &opts](const Vector& beta) {
        return evaluate_with_gradient(ds, beta, spec, opts);
      },
      cs, cfg, beta0);
}

bool is_stationary_fn(const ObjectiveFn& objective, const ConstraintSet& cs,
                      const AscentConfig& cfg, const Vector& beta) {
  cfg.validate();
  cs.validate(beta.size());
  const double alpha = cfg.step_coeff / static_cast<double>(beta.size());
  const double tol = cfg.stationarity_tol > 0 ? cfg.stationarity_tol
                                              : 1e-8 * cs.budget;
  ObjectiveEval eval = objective(beta);
  Vector step = beta + alpha * (eval.gradient.array() - cfg.l1_penalty).matrix();
  return (project(step, cs) - beta).lpNorm<Eigen::Infinity>() <= tol;
}

bool is_stationary(const WeightedDataset& ds, const KernelSpec& spec,
                   const ConstraintSet& cs, const AscentConfig& cfg,
                   const Vector& beta, const EvalOptions& opts) {
  return is_stationary_fn(
      [&](const Vector& b) { return evaluate_with_gradient(ds, b, spec, opts); },
      cs, cfg, beta);
}

}  // namespace mscreen
