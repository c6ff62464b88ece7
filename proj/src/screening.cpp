#include "mscreen/screening.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mscreen/objective.hpp"
#include "mscreen/rng.hpp"

namespace mscreen {

void ScreenConfig::validate() const {
  kernel.validate();
  ascent.validate();
  boost.validate();
  if (!(budget > 0)) throw std::invalid_argument("budget must be > 0");
  if (!(lambda_coeff >= 0)) throw std::invalid_argument("lambda_coeff must be >= 0");
  if (max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
  if (max_selected < 0) throw std::invalid_argument("max_selected must be >= 0");
  if (tau && *tau < 0) throw std::invalid_argument("tau must be >= 0");
  if (mode == ScreenMode::Hier &&
      hier_tau() > budget / static_cast<double>(max_rounds) + 1e-12)
    throw std::invalid_argument("tau must satisfy tau <= budget / max_rounds");
  if (const auto* perm = std::get_if<GammaPermutation>(&gamma_mode)) {
    if (perm->n_perm < 20) throw std::invalid_argument("need n_perm >= 20");
    if (!(perm->quantile > 0 && perm->quantile <= 1))
      throw std::invalid_argument("quantile must lie in (0, 1]");
  }
}

const char* to_string(RoundOutcome outcome) {
  switch (outcome) {
    case RoundOutcome::Continued: return "continued";
    case RoundOutcome::ThresholdFailed: return "threshold_failed";
    case RoundOutcome::NoNewVariables: return "no_new_variables";
    case RoundOutcome::CapReached: return "cap_reached";
    case RoundOutcome::MaxRounds: return "max_rounds";
    case RoundOutcome::DegenerateWeights: return "degenerate_weights";
  }
  return "unknown";
}

namespace {

Vector uniform_beta0(Index p, double budget) {
  return Vector::Constant(p, budget / static_cast<double>(p));
}

WeightSummary summarize_weights(const WeightedDataset& ds) {
  WeightSummary s;
  s.min_weight = ds.weights.minCoeff();
  s.max_weight = ds.weights.maxCoeff();
  for (Index i = 0; i < ds.n(); ++i)
    (ds.labels[i] == 1 ? s.effective_size_class1 : s.effective_size_class0) +=
        ds.weights[i];
  const PairMass m = pair_mass(ds);
  s.between_mass = m.between_mass;
  s.within_mass = m.within_mass;
  return s;
}

bool weights_degenerate(const WeightedDataset& ds, const WeightSummary& s) {
  const double total = s.effective_size_class0 + s.effective_size_class1;
  if (s.effective_size_class0 < 1e-9 * ds.n() ||
      s.effective_size_class1 < 1e-9 * ds.n())
    return true;
  return PairMass{s.between_mass, s.within_mass}.degenerate(total);
}

double theory_threshold(double coeff, double t, Index p, Index n) {
  return coeff * std::sqrt(std::log(std::max<Index>(p, 2)) / static_cast<double>(n)) *
         (1.0 + t);
}

// Sorts descending by the ascent coefficient (cap tie-breaking rule).
std::vector<Index> order_by_coefficient(std::vector<Index> support,
                                        const Vector& beta) {
  std::sort(support.begin(), support.end(), [&beta](Index a, Index b) {
    if (beta[a] != beta[b]) return beta[a] > beta[b];
    return a < b;
  });
  return support;
}

struct ScreenState {
  std::vector<Index> selected;  // ordered by selection
  std::set<Index> selected_set;
  WeightedDataset data;
};

ScreenResult run_screen(const WeightedDataset& input, const ScreenConfig& cfg) {
  cfg.validate();
  const Index p = input.p();
  const Index n = input.n();

  ScreenState st;
  // Algorithm initialization resets incoming weights to the class-frequency
  // closed form (the empty conditioning set).
  st.data = input.reweighted(WeightedDataset::initial_weights(input.labels));

  ScreenResult res;
  const double lambda =
      cfg.mode == ScreenMode::LowDim
          ? 0.0
          : theory_threshold(cfg.lambda_coeff, cfg.lambda_t, p, n);
  const double tau = cfg.mode == ScreenMode::Hier ? cfg.hier_tau() : 0.0;
  const EvalOptions eval_opts{cfg.threads, 0, 0};

  for (int round = 0; round < cfg.max_rounds; ++round) {
    RoundDiagnostics diag;
    diag.weight_summary = summarize_weights(st.data);

    auto finish_round = [&](RoundOutcome outcome) {
      diag.termination_reason = outcome;
      res.rounds.push_back(std::move(diag));
      res.selected.push_back(st.selected);
      res.termination = outcome;
    };

    if (weights_degenerate(st.data, diag.weight_summary)) {
      finish_round(RoundOutcome::DegenerateWeights);
      return res;
    }

    // Constraints and initialization for this round.
    ConstraintSet cs;
    cs.budget = cfg.budget;
    if (cfg.mode == ScreenMode::Hier) {
      if (static_cast<double>(st.selected.size()) * tau > cfg.budget)
        throw InfeasibleConstraint("pinned mass |S| * tau exceeds the budget");
      for (Index k : st.selected) cs.pinned[k] = tau;
    }
    Vector beta0 = uniform_beta0(p, cfg.budget);
    if (!cs.pinned.empty()) beta0 = project(beta0, cs);

    AscentConfig ascent_cfg = cfg.ascent;
    ascent_cfg.l1_penalty = lambda;

    try {
      diag.objective_at_init = evaluate(st.data, beta0, cfg.kernel, eval_opts);

      if (cfg.mode == ScreenMode::LowDim) {
        double gamma = 0;
        if (const auto* theory = std::get_if<GammaTheory>(&cfg.gamma_mode))
          gamma = theory_threshold(theory->c_gamma, theory->t, p, n);
        else {
          const auto& perm = std::get<GammaPermutation>(cfg.gamma_mode);
          ScreenConfig perm_cfg = cfg;
          perm_cfg.seed = Rng(cfg.seed).fork(round + 1).next_u64();
          gamma = calibrate_gamma_permutation(st.data, perm_cfg, perm.n_perm,
                                              perm.quantile);
        }
        diag.threshold_used = gamma;
        if (!(diag.objective_at_init * diag.objective_at_init > gamma)) {
          finish_round(RoundOutcome::ThresholdFailed);
          return res;
        }
      } else {
        diag.threshold_used = lambda;
      }

      diag.ascent = ascend(st.data, cfg.kernel, cs, ascent_cfg, beta0, eval_opts);
      diag.ascent_ran = true;
    } catch (const DegeneratePairs&) {
      finish_round(RoundOutcome::DegenerateWeights);
      return res;
    }

    // New variables this round, largest coefficients first.
    std::vector<Index> incoming;
    for (Index j : diag.ascent.support)
      if (!st.selected_set.count(j)) incoming.push_back(j);
    incoming = order_by_coefficient(std::move(incoming), diag.ascent.beta);

    bool cap_hit = false;
    if (cfg.max_selected > 0) {
      const Index room = cfg.max_selected - static_cast<Index>(st.selected.size());
      if (static_cast<Index>(incoming.size()) >= room) {
        incoming.resize(static_cast<std::size_t>(std::max<Index>(room, 0)));
        cap_hit = true;
      }
    }
    diag.new_support = incoming;

    if (incoming.empty() && !cap_hit) {
      // A round that adds nothing leaves weights unchanged, so every later
      // round would repeat this state verbatim.
      finish_round(cfg.mode == ScreenMode::LowDim ? RoundOutcome::MaxRounds
                                                  : RoundOutcome::NoNewVariables);
      return res;
    }

    for (Index j : incoming) {
      st.selected.push_back(j);
      st.selected_set.insert(j);
    }

    if (cap_hit) {
      finish_round(RoundOutcome::CapReached);
      return res;
    }
    if (round + 1 >= cfg.max_rounds) {
      finish_round(RoundOutcome::MaxRounds);
      return res;
    }

    // Rebalance against the full current selection.
    const CondProbModel model = fit_conditional(st.data, st.selected, cfg.boost);
    const WeightUpdate upd = compute_weights(model, st.data);
    st.data = st.data.reweighted(upd.weights);

    finish_round(RoundOutcome::Continued);
  }

  return res;
}

}  // namespace

ScreenResult screen_low_dim(const WeightedDataset& ds, const ScreenConfig& cfg) {
  ScreenConfig c = cfg;
  c.mode = ScreenMode::LowDim;
  return screen(ds, c);
}

ScreenResult screen_high_dim(const WeightedDataset& ds, const ScreenConfig& cfg) {
  ScreenConfig c = cfg;
  c.mode = ScreenMode::HighDim;
  return screen(ds, c);
}

ScreenResult screen_hier(const WeightedDataset& ds, const ScreenConfig& cfg) {
  ScreenConfig c = cfg;
  c.mode = ScreenMode::Hier;
  return screen(ds, c);
}

ScreenResult screen(const WeightedDataset& ds, const ScreenConfig& cfg) {
  ScreenResult res = run_screen(ds, cfg);
  res.final_selected = res.selected.empty() ? std::vector<Index>{}
                                            : res.selected.back();
  return res;
}

double calibrate_gamma_permutation(const WeightedDataset& ds,
                                   const ScreenConfig& cfg, int n_perm,
                                   double quantile) {
  if (n_perm < 20) throw std::invalid_argument("need n_perm >= 20");
  if (!(quantile > 0 && quantile <= 1))
    throw std::invalid_argument("quantile must lie in (0, 1]");
  const Index n = ds.n();
  const Index p = ds.p();
  Index ones = 0;
  for (Index i = 0; i < n; ++i) ones += ds.labels[i];
  if (ones == 0 || ones == n)
    throw std::invalid_argument("degenerate classes: need both labels present");

  const Vector beta0 = uniform_beta0(p, cfg.budget);

  // Kernel values at beta0 are label-independent; cache them per pair so each
  // permutation costs O(n^2) instead of O(n^2 p).
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::vector<double> ww(total), wwf(total);
  {
    Matrix xt = ds.features.transpose();
    Vector delta(p);
    std::uint64_t k = 0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j, ++k) {
        const double m = ds.weights[i] * ds.weights[j];
        delta = (xt.col(i) - xt.col(j)).cwiseAbs();
        if (cfg.kernel.q == DeltaOrder::L2) delta.array() *= delta.array();
        ww[k] = m;
        wwf[k] = m * f_eval(cfg.kernel, beta0.dot(delta));
      }
    }
  }

  std::vector<int> labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = ds.labels[i];

  Rng rng(cfg.seed);
  std::vector<double> stats(n_perm);
  for (int perm = 0; perm < n_perm; ++perm) {
    for (Index i = n - 1; i > 0; --i)
      std::swap(labels[i], labels[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    double mb = 0, mw = 0, vb = 0, vw = 0;
    std::uint64_t k = 0;
    for (Index i = 0; i < n; ++i) {
      const int yi = labels[i];
      for (Index j = i + 1; j < n; ++j, ++k) {
        if (yi != labels[j]) {
          mb += ww[k];
          vb += wwf[k];
        } else {
          mw += ww[k];
          vw += wwf[k];
        }
      }
    }
    if (!(mb > 0) || !(mw > 0))
      throw DegeneratePairs("permutation produced an empty pair class");
    const double f = vb / mb - vw / mw;
    stats[perm] = f * f;
  }

  std::sort(stats.begin(), stats.end());
  const int k = std::min<int>(
      n_perm, std::max<int>(1, static_cast<int>(std::ceil(quantile * n_perm))));
  return stats[k - 1];
}

namespace {

// Weighted between-minus-within mean of a per-pair statistic.
template <typename PairStat>
double between_minus_within(const WeightedDataset& ds, PairStat&& stat) {
  const Index n = ds.n();
  double mb = 0, mw = 0, vb = 0, vw = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double m = ds.weights[i] * ds.weights[j];
      if (m == 0) continue;
      const double v = stat(i, j);
      if (ds.labels[i] != ds.labels[j]) {
        mb += m;
        vb += m * v;
      } else {
        mw += m;
        vw += m * v;
      }
    }
  }
  const double total = ds.weights.sum();
  if (PairMass{2 * mb, 2 * mw}.degenerate(total))
    throw DegeneratePairs("between or within pair mass below degeneracy floor");
  return vb / mb - vw / mw;
}

}  // namespace

double signal_strength_main(const WeightedDataset& ds, const KernelSpec& spec,
                            Index j) {
  if (j < 0 || j >= ds.p())
    throw std::invalid_argument("signal_strength_main: column out of range");
  const auto& x = ds.features;
  const double mean_diff = between_minus_within(
      ds, [&](Index a, Index b) { return std::abs(x(a, j) - x(b, j)); });
  return f_prime(spec, 0.0) * mean_diff;
}

double signal_strength_hier(const WeightedDataset& ds, const KernelSpec& spec,
                            const std::vector<Index>& A, double tau) {
  if (A.empty()) throw std::invalid_argument("signal_strength_hier: empty set");
  if (!(tau > 0)) throw std::invalid_argument("signal_strength_hier: tau must be > 0");
  for (Index j : A)
    if (j < 0 || j >= ds.p())
      throw std::invalid_argument("signal_strength_hier: column out of range");
  const auto& x = ds.features;
  const double mean_f = between_minus_within(ds, [&](Index a, Index b) {
    double l1 = 0;
    for (Index j : A) l1 += std::abs(x(a, j) - x(b, j));
    return f_eval(spec, tau * l1);
  });
  return mean_f / tau;
}

}  // namespace mscreen
