#include <doctest.h>

#include <cmath>
#include <limits>

#include "mscreen/objective.hpp"
#include "mscreen/rng.hpp"
#include "mscreen/screening.hpp"
#include "mscreen/simgen.hpp"

using namespace mscreen;

namespace {

WeightedDataset model_sample(const ModelSpec& model, Index n, std::uint64_t seed,
                             bool rescale = false) {
  RawData raw = generate(model, n, seed);
  if (rescale) {
    for (Index j = 0; j < raw.features.cols(); ++j) {
      const double m = raw.features.col(j).cwiseAbs().maxCoeff();
      if (m > 0) raw.features.col(j) /= m;
    }
  }
  return make_dataset(raw.features, raw.labels);
}

bool same_result(const ScreenResult& a, const ScreenResult& b) {
  if (a.final_selected != b.final_selected) return false;
  if (a.selected != b.selected) return false;
  if (a.termination != b.termination) return false;
  if (a.rounds.size() != b.rounds.size()) return false;
  for (std::size_t r = 0; r < a.rounds.size(); ++r) {
    const auto& x = a.rounds[r];
    const auto& y = b.rounds[r];
    if (x.objective_at_init != y.objective_at_init) return false;
    if (x.threshold_used != y.threshold_used) return false;
    if (x.termination_reason != y.termination_reason) return false;
    if (x.ascent_ran != y.ascent_ran) return false;
    if (x.ascent_ran && x.ascent.beta != y.ascent.beta) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("an infinite threshold stops before any optimization") {
  WeightedDataset ds = model_sample(XorModel{6}, 200, 3);
  ScreenConfig cfg;
  cfg.mode = ScreenMode::LowDim;
  cfg.gamma_mode = GammaTheory{std::numeric_limits<double>::infinity(), 0.0};
  const ScreenResult res = screen(ds, cfg);
  CHECK(res.final_selected.empty());
  CHECK(res.termination == RoundOutcome::ThresholdFailed);
  REQUIRE(res.rounds.size() == 1);
  CHECK_FALSE(res.rounds[0].ascent_ran);
}

TEST_CASE("permutation calibration is seeded and respects the quantile order") {
  WeightedDataset ds = model_sample(XorModel{8}, 300, 5);
  ScreenConfig cfg;
  cfg.seed = 11;
  const double g95 = calibrate_gamma_permutation(ds, cfg, 40, 0.95);
  CHECK(g95 == calibrate_gamma_permutation(ds, cfg, 40, 0.95));
  const double gmax = calibrate_gamma_permutation(ds, cfg, 40, 1.0);
  CHECK(gmax >= g95);
  CHECK(g95 > 0);
  CHECK_THROWS_AS(calibrate_gamma_permutation(ds, cfg, 10, 0.95),
                  std::invalid_argument);
}

TEST_CASE("identical seed and config reproduce the result bit for bit") {
  WeightedDataset ds = model_sample(UnequalVarianceModel{1.0, {0.4, 0.3}, 10},
                                    300, 17);
  ScreenConfig cfg;
  cfg.mode = ScreenMode::LowDim;
  cfg.gamma_mode = GammaPermutation{40, 0.95};
  cfg.budget = 5.0;
  cfg.seed = 99;
  cfg.max_rounds = 4;
  const ScreenResult a = screen(ds, cfg);
  const ScreenResult b = screen(ds, cfg);
  CHECK(same_result(a, b));
}

TEST_CASE("masking: the strong effect is found first, then the masked one") {
  WeightedDataset ds =
      model_sample(BinaryMainEffectsModel{{0.45, 0.15}, 2}, 2000, 41);
  ScreenConfig cfg;
  cfg.mode = ScreenMode::LowDim;
  cfg.gamma_mode = GammaPermutation{100, 0.95};
  cfg.budget = 3.0;
  cfg.ascent.step_coeff = 10.0;
  cfg.ascent.max_iters = 120;
  cfg.seed = 7;
  const ScreenResult res = screen(ds, cfg);
  REQUIRE(res.rounds.size() >= 2);
  CHECK(res.rounds[0].new_support == std::vector<Index>{0});
  CHECK(res.rounds[1].new_support == std::vector<Index>{1});
  CHECK(res.final_selected == std::vector<Index>{0, 1});
}

TEST_CASE("low-dimensional screening finds a pure interaction") {
  WeightedDataset ds = model_sample(XorModel{10}, 800, 23, /*rescale=*/true);
  ScreenConfig cfg;
  cfg.mode = ScreenMode::LowDim;
  cfg.gamma_mode = GammaPermutation{60, 0.95};
  cfg.budget = 10.0;
  cfg.ascent.step_coeff = 20.0;
  cfg.ascent.max_iters = 1500;
  cfg.seed = 5;
  const ScreenResult res = screen(ds, cfg);
  std::vector<Index> sorted = res.final_selected;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<Index>{0, 1});
}

TEST_CASE("high-dimensional screening stops once no new variables appear") {
  // Both signals clear the penalty: Signal({j}) = delta_j^2 versus
  // 2 * lambda = 2 * 0.5 * sqrt(log(30)/800) = 0.065.
  WeightedDataset ds =
      model_sample(BinaryMainEffectsModel{{0.45, 0.3}, 30}, 800, 13);
  ScreenConfig cfg;
  cfg.mode = ScreenMode::HighDim;
  cfg.lambda_coeff = 0.5;
  cfg.budget = 3.0;
  cfg.ascent.step_coeff = 2.0;
  cfg.ascent.max_iters = 600;
  cfg.seed = 3;
  const ScreenResult res = screen(ds, cfg);
  CHECK(res.termination == RoundOutcome::NoNewVariables);
  std::vector<Index> sorted = res.final_selected;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<Index>{0, 1});
}

TEST_CASE("hier with tau = 0 behaves like the penalized screen") {
  WeightedDataset ds =
      model_sample(BinaryMainEffectsModel{{0.45, 0.3}, 20}, 800, 29);
  ScreenConfig cfg;
  cfg.lambda_coeff = 0.5;
  cfg.budget = 3.0;
  cfg.ascent.step_coeff = 2.0;
  cfg.ascent.max_iters = 600;
  cfg.seed = 9;
  cfg.mode = ScreenMode::HighDim;
  const ScreenResult high = screen(ds, cfg);
  cfg.mode = ScreenMode::Hier;
  cfg.tau = 0.0;  // pins at zero: exclusion plus rebalance
  const ScreenResult hier = screen(ds, cfg);
  CHECK(high.final_selected == hier.final_selected);
}

TEST_CASE("hier matches the penalized screen on main-effects-only data") {
  int agree = 0;
  for (int rep = 0; rep < 10; ++rep) {
    WeightedDataset ds = model_sample(
        BinaryMainEffectsModel{{0.5, 0.4}, 12}, 700, 100 + rep);
    ScreenConfig cfg;
    cfg.lambda_coeff = 0.5;
    cfg.budget = 3.0;
    cfg.ascent.step_coeff = 2.0;
    cfg.ascent.max_iters = 500;
    cfg.seed = rep;
    cfg.mode = ScreenMode::HighDim;
    const ScreenResult high = screen(ds, cfg);
    cfg.mode = ScreenMode::Hier;
    const ScreenResult hier = screen(ds, cfg);
    std::vector<Index> a = high.final_selected, b = hier.final_selected;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a == b) ++agree;
  }
  CHECK(agree >= 9);
}

TEST_CASE("hier pins previously selected coordinates at tau") {
  WeightedDataset ds =
      model_sample(BinaryMainEffectsModel{{0.45, 0.25}, 6}, 1500, 51);
  ScreenConfig cfg;
  cfg.mode = ScreenMode::Hier;
  cfg.lambda_coeff = 0.4;
  cfg.budget = 3.0;
  cfg.ascent.step_coeff = 2.0;
  cfg.ascent.max_iters = 600;
  cfg.tau = 0.3;
  cfg.seed = 2;
  const ScreenResult res = screen(ds, cfg);
  REQUIRE(res.rounds.size() >= 2);
  REQUIRE(res.rounds[0].new_support == std::vector<Index>{0});
  // In round 2 the first coordinate sits exactly at tau.
  CHECK(res.rounds[1].ascent.beta[0] == 0.3);
}

TEST_CASE("the selection cap truncates by coefficient size") {
  WeightedDataset ds = model_sample(
      UnequalVarianceModel{1.0, {0.4, 0.35, 0.3, 0.25}, 8}, 500, 31,
      /*rescale=*/true);
  ScreenConfig cfg;
  cfg.mode = ScreenMode::LowDim;
  cfg.gamma_mode = GammaTheory{1e-6, 0.0};
  cfg.budget = 10.0;
  cfg.ascent.step_coeff = 20.0;
  cfg.ascent.max_iters = 800;
  cfg.max_selected = 2;
  cfg.seed = 4;
  const ScreenResult res = screen(ds, cfg);
  CHECK(res.termination == RoundOutcome::CapReached);
  CHECK(res.final_selected.size() == 2);
  // The reported order matches decreasing coefficient size.
  const auto& round = res.rounds.back();
  REQUIRE(round.new_support.size() == 2);
  CHECK(round.ascent.beta[round.new_support[0]] >=
        round.ascent.beta[round.new_support[1]]);
}

TEST_CASE("selection trajectory is monotone across rounds") {
  WeightedDataset ds =
      model_sample(BinaryMainEffectsModel{{0.45, 0.15}, 4}, 1200, 61);
  ScreenConfig cfg;
  cfg.mode = ScreenMode::LowDim;
  cfg.gamma_mode = GammaPermutation{40, 0.95};
  cfg.budget = 3.0;
  cfg.ascent.step_coeff = 2.0;
  cfg.ascent.max_iters = 500;
  cfg.seed = 6;
  const ScreenResult res = screen(ds, cfg);
  REQUIRE(res.selected.size() == res.rounds.size());
  for (std::size_t r = 1; r < res.selected.size(); ++r) {
    CHECK(res.selected[r].size() >= res.selected[r - 1].size());
    for (std::size_t k = 0; k < res.selected[r - 1].size(); ++k)
      CHECK(res.selected[r][k] == res.selected[r - 1][k]);
  }
  CHECK(res.final_selected == res.selected.back());
}

TEST_CASE("main-effect signal strength") {
  SUBCASE("hand-computed weighted value on a tiny dataset") {
    Matrix x(4, 1);
    x << 0.0, 1.0, 0.0, 2.0;
    LabelVector y(4);
    y << 0, 0, 1, 1;
    Vector w(4);
    w << 1.0, 0.5, 1.0, 0.25;
    WeightedDataset ds(x, y, w);
    // Between pairs: (0,2):0, (0,3):2, (1,2):1, (1,3):1 with masses 1, .25, .5, .125.
    // Within pairs: (0,1):1, (2,3):2 with masses .5 and .25.
    const double between = (1.0 * 0 + 0.25 * 2 + 0.5 * 1 + 0.125 * 1) / 1.875;
    const double within = (0.5 * 1 + 0.25 * 2) / 0.75;
    const double expected = between - within;  // f'(0) = 1 for NegExp
    CHECK(signal_strength_main(ds, KernelSpec::neg_exp(), 0) ==
          doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("binary delta model converges to delta squared") {
    WeightedDataset ds =
        model_sample(BinaryMainEffectsModel{{0.4}, 1}, 4000, 71);
    CHECK(signal_strength_main(ds, KernelSpec::neg_exp(), 0) ==
          doctest::Approx(0.16).epsilon(0.25));
    CHECK(std::abs(signal_strength_main(ds, KernelSpec::neg_exp(), 0) - 0.16) <=
          0.03);
  }

  SUBCASE("independent column gives a near-zero signal") {
    Rng rng(81);
    Matrix x(600, 1);
    LabelVector y(600);
    for (Index i = 0; i < 600; ++i) {
      y[i] = rng.bernoulli(0.5) ? 1 : 0;
      x(i, 0) = rng.normal();
    }
    y[0] = 0;
    y[1] = 1;
    WeightedDataset ds = make_dataset(std::move(x), std::move(y));
    CHECK(std::abs(signal_strength_main(ds, KernelSpec::neg_exp(), 0)) <= 0.1);
  }
}

TEST_CASE("hierarchical signal strength") {
  WeightedDataset ds =
      model_sample(BinaryMainEffectsModel{{0.45, 0.15}, 3}, 1500, 91);
  const KernelSpec spec = KernelSpec::neg_exp();

  SUBCASE("tau to zero recovers the first-order expansion") {
    const std::vector<Index> A{0, 1};
    const double tiny = signal_strength_hier(ds, spec, A, 1e-4);
    // First-order value: f'(0) * E_{B-W} ||x_A - x'_A||_1, reusing the main
    // formula on an auxiliary column holding the l1 distance contributions.
    const double first_order =
        signal_strength_main(ds, spec, 0) + signal_strength_main(ds, spec, 1);
    CHECK(tiny == doctest::Approx(first_order).epsilon(1e-3));
  }

  SUBCASE("singleton set at small tau matches the main-effect signal") {
    const double hier = signal_strength_hier(ds, spec, {0}, 1e-5);
    const double main = signal_strength_main(ds, spec, 0);
    CHECK(hier == doctest::Approx(main).epsilon(1e-4));
  }

  SUBCASE("at tau = 1 the interaction support reproduces the enumerated value") {
    // Balanced exact-count sample over the 4-point interaction support.
    const DiscreteDist dist = xor_discrete(2, 2);
    const Index reps = 400;
    Matrix x(4 * reps, 2);
    LabelVector y(4 * reps);
    for (Index r = 0; r < reps; ++r) {
      for (int k = 0; k < 4; ++k) {
        x.row(4 * r + k) = dist.support[k].x.transpose();
        y[4 * r + k] = dist.support[k].y;
      }
    }
    WeightedDataset xds = make_dataset(std::move(x), std::move(y));
    const double target = 0.5 * std::pow(1.0 - std::exp(-1.0), 2);
    CHECK(signal_strength_hier(xds, spec, {0, 1}, 1.0) ==
          doctest::Approx(target).epsilon(5e-3));
  }

  CHECK_THROWS_AS(signal_strength_hier(ds, spec, {}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(signal_strength_hier(ds, spec, {0}, 0.0), std::invalid_argument);
}

TEST_CASE("config validation") {
  ScreenConfig cfg;
  cfg.mode = ScreenMode::Hier;
  cfg.budget = 10.0;
  cfg.max_rounds = 10;
  cfg.tau = 2.0;  // tau > budget / max_rounds
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.tau = 0.5;
  CHECK_NOTHROW(cfg.validate());
}
