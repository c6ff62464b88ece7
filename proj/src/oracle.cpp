#include "mscreen/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mscreen/objective.hpp"
#include "mscreen/rebalance.hpp"
#include "mscreen/rng.hpp"
#include "mscreen/simgen.hpp"

namespace mscreen {

Vector project_bruteforce(const Vector& v, const ConstraintSet& cs) {
  const Index p = v.size();
  cs.validate(p);
  std::vector<Index> free;
  for (Index j = 0; j < p; ++j)
    if (!cs.pinned.count(j)) free.push_back(j);
  const double residual = cs.budget - cs.pinned_sum();
  const std::size_t nf = free.size();
  if (nf > 20) throw std::invalid_argument("project_bruteforce: p too large");

  Vector base = Vector::Zero(p);
  for (const auto& [k, val] : cs.pinned) base[k] = val;

  double best_dist = std::numeric_limits<double>::infinity();
  Vector best = base;
  Vector cand(p);
  for (std::size_t mask = 0; mask < (std::size_t{1} << nf); ++mask) {
    // Candidate A: support = mask, budget slack (x = v on the support).
    // Candidate B: support = mask, budget tight (uniform shift theta).
    for (int tight = 0; tight < 2; ++tight) {
      cand = base;
      double support_sum = 0;
      int support_size = 0;
      for (std::size_t b = 0; b < nf; ++b) {
        if (mask >> b & 1) {
          support_sum += v[free[b]];
          ++support_size;
        }
      }
      const double theta =
          tight ? (support_size > 0 ? (support_sum - residual) / support_size : 0.0)
                : 0.0;
      if (tight && support_size == 0) continue;
      bool feasible = true;
      double total = 0;
      for (std::size_t b = 0; b < nf; ++b) {
        double x = 0;
        if (mask >> b & 1) x = v[free[b]] - theta;
        if (x < -1e-12) {
          feasible = false;
          break;
        }
        x = std::max(x, 0.0);
        cand[free[b]] = x;
        total += x;
      }
      if (!feasible || total > residual + 1e-9) continue;
      double dist = 0;
      for (std::size_t b = 0; b < nf; ++b) {
        const double d = cand[free[b]] - v[free[b]];
        dist += d * d;
      }
      if (dist < best_dist) {
        best_dist = dist;
        best = cand;
      }
    }
  }
  return best;
}

namespace {

WeightedDataset random_dataset(Rng& rng, Index n, Index p) {
  Matrix x(n, p);
  LabelVector y(n);
  for (Index i = 0; i < n; ++i) {
    y[i] = rng.bernoulli(0.5) ? 1 : 0;
    for (Index j = 0; j < p; ++j)
      x(i, j) = rng.normal() + (y[i] == 1 ? 0.3 * rng.uniform() : 0.0);
  }
  // Keep both classes present.
  y[0] = 0;
  y[1] = 1;
  return make_dataset(std::move(x), std::move(y));
}

OracleCheck check_xor_closed_form(const OracleOptions& opts) {
  OracleCheck check{"xor_closed_form_vs_enumeration", true, ""};
  if (opts.kernel.family != KernelFamily::NegExp) {
    check.detail = "skipped: closed form applies to the NegExp family";
    return check;
  }
  KernelSpec spec = opts.kernel;
  spec.q = DeltaOrder::L1;
  const DiscreteDist dist = xor_discrete(2, 2);
  Rng rng(opts.seed);
  double worst = 0;
  for (int k = 0; k < 25; ++k) {
    Vector beta(2);
    beta << 3.0 * rng.uniform(), 3.0 * rng.uniform();
    const double enumerated = population_objective(dist, beta, spec);
    const double closed = xor_closed_form(beta[0], beta[1], 0.0, spec);
    worst = std::max(worst, std::abs(enumerated - closed));
  }
  check.passed = worst <= 1e-12;
  std::ostringstream os;
  os << "max |enumeration - closed form| = " << worst;
  check.detail = os.str();
  return check;
}

OracleCheck check_gradient_fd(const OracleOptions& opts) {
  OracleCheck check{"gradient_vs_central_differences", true, ""};
  Rng rng(opts.seed + 1);
  const EvalOptions eval{opts.threads, 0, 0};
  double worst = 0;
  for (int inst = 0; inst < 5; ++inst) {
    const Index n = 40, p = 8;
    WeightedDataset ds = random_dataset(rng, n, p);
    Vector beta(p);
    for (Index j = 0; j < p; ++j) beta[j] = 0.05 + 0.4 * rng.uniform();
    Vector grad = gradient(ds, beta, opts.kernel, eval);
    if (opts.gradient_hook) grad = opts.gradient_hook(grad);
    double scale = 1.0;
    Vector fd(p);
    for (Index j = 0; j < p; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(beta[j]));
      Vector hi = beta, lo = beta;
      hi[j] += h;
      lo[j] -= h;
      fd[j] = (evaluate(ds, hi, opts.kernel, eval) -
               evaluate(ds, lo, opts.kernel, eval)) /
              (2 * h);
    }
    scale = std::max(1e-8, fd.cwiseAbs().maxCoeff());
    worst = std::max(worst, (grad - fd).cwiseAbs().maxCoeff() / scale);
  }
  check.passed = worst <= 1e-6;
  std::ostringstream os;
  os << "max relative deviation = " << worst;
  check.detail = os.str();
  return check;
}

OracleCheck check_projection(const OracleOptions& opts) {
  OracleCheck check{"projection_vs_bruteforce_qp", true, ""};
  Rng rng(opts.seed + 2);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const Index p = 2 + static_cast<Index>(rng.below(5));
    Vector v(p);
    for (Index j = 0; j < p; ++j) v[j] = 4.0 * rng.uniform() - 1.5;
    ConstraintSet cs;
    cs.budget = 0.5 + 2.5 * rng.uniform();
    if (k % 3 == 0 && p >= 3) cs.pinned[0] = 0.2 * cs.budget;
    const Vector fast = project(v, cs);
    const Vector slow = project_bruteforce(v, cs);
    worst = std::max(worst, (fast - slow).lpNorm<Eigen::Infinity>());
  }
  check.passed = worst <= 1e-9;
  std::ostringstream os;
  os << "max coordinate deviation = " << worst;
  check.detail = os.str();
  return check;
}

OracleCheck check_balance_identity(const OracleOptions& opts) {
  OracleCheck check{"rebalancing_class_balance_identity", true, ""};
  Rng rng(opts.seed + 3);
  double worst = 0;
  for (int k = 0; k < 5; ++k) {
    const Index n = 120, p = 4;
    WeightedDataset ds = random_dataset(rng, n, p);
    std::vector<Index> A;
    for (Index j = 0; j < 1 + static_cast<Index>(rng.below(3)); ++j) A.push_back(j);
    const CondProbModel model = fit_conditional(ds, A);
    const WeightUpdate upd = compute_weights(model, ds);
    worst = std::max(worst, std::abs(upd.effective_size_class1 -
                                     upd.effective_size_class0) /
                                static_cast<double>(n));
  }
  check.passed = worst <= 1e-10;
  std::ostringstream os;
  os << "max |sum_1 w - sum_0 w| / n = " << worst;
  check.detail = os.str();
  return check;
}

}  // namespace

std::vector<OracleCheck> run_oracle_checks(const OracleOptions& opts) {
  return {check_xor_closed_form(opts), check_gradient_fd(opts),
          check_projection(opts), check_balance_identity(opts)};
}

}  // namespace mscreen
