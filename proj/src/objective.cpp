#include "mscreen/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "mscreen/parallel.hpp"
#include "mscreen/rng.hpp"

namespace mscreen {

namespace {

constexpr std::uint64_t kBlockPairs = 8192;

// Linear index k in [0, n(n-1)/2) -> unordered pair (i, j), i < j,
// enumerated row-major: (0,1), (0,2), ..., (1,2), ...
inline void decode_pair(std::uint64_t k, Index n, Index& i, Index& j) {
  // Largest i with i*n - i*(i+1)/2 <= k, found by the quadratic formula and
  // fixed up for rounding.
  const double nn = static_cast<double>(n);
  double guess = std::floor(
      (2.0 * nn - 1.0 -
       std::sqrt((2.0 * nn - 1.0) * (2.0 * nn - 1.0) - 8.0 * static_cast<double>(k))) /
      2.0);
  Index ii = static_cast<Index>(std::max(0.0, guess));
  auto row_start = [n](Index r) {
    return static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(n) -
           static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(r + 1) / 2;
  };
  while (ii > 0 && row_start(ii) > k) --ii;
  while (ii + 1 < n && row_start(ii + 1) <= k) ++ii;
  i = ii;
  j = static_cast<Index>(k - row_start(ii)) + ii + 1;
}

struct BlockAcc {
  double mass_b = 0, mass_w = 0;
  double val_b = 0, val_w = 0;
};

struct Accumulated {
  double mass_b = 0, mass_w = 0;
  double val_b = 0, val_w = 0;
  Vector grad_b, grad_w;
};

// Evaluates the fused pass over the given pair index stream. `pairs` is
// either empty (full enumeration of all n(n-1)/2 pairs in natural order) or
// a sorted list of sampled linear indices.
Accumulated accumulate_pairs(const WeightedDataset& ds, const Vector& beta,
                             const KernelSpec& spec, bool want_grad,
                             const std::vector<std::uint64_t>& pairs,
                             int threads) {
  const Index n = ds.n();
  const Index p = ds.p();
  const std::uint64_t total =
      pairs.empty() ? static_cast<std::uint64_t>(n) * (n - 1) / 2 : pairs.size();
  const std::uint64_t nblocks = (total + kBlockPairs - 1) / kBlockPairs;

  // Column-major transpose so each sample is a contiguous column.
  Matrix xt = ds.features.transpose();
  const double* const wts = ds.weights.data();
  const int* const labels = ds.labels.data();

  std::vector<BlockAcc> acc(nblocks);
  Matrix grad_b, grad_w;
  if (want_grad) {
    grad_b.setZero(p, nblocks);
    grad_w.setZero(p, nblocks);
  }

  const bool neg_exp = spec.family == KernelFamily::NegExp;
  const double inv_scale = 1.0 / spec.scale;
  const double eps = spec.epsilon;
  const bool l2 = spec.q == DeltaOrder::L2;

  auto run_block = [&](std::size_t b) {
    const std::uint64_t begin = b * kBlockPairs;
    const std::uint64_t end = std::min<std::uint64_t>(begin + kBlockPairs, total);
    BlockAcc a;
    Vector delta(p);
    Vector gb, gw;
    if (want_grad) {
      gb.setZero(p);
      gw.setZero(p);
    }

    Index i = 0, j = 0;
    if (pairs.empty()) decode_pair(begin, n, i, j);
    for (std::uint64_t k = begin; k < end; ++k) {
      if (!pairs.empty()) decode_pair(pairs[k], n, i, j);
      const double ww = wts[i] * wts[j];
      if (ww != 0.0) {
        delta = (xt.col(i) - xt.col(j)).cwiseAbs();
        if (l2) delta.array() *= delta.array();
        const double s = beta.dot(delta);
        double fv, fp;
        if (neg_exp) {
          const double e = std::exp(-s * inv_scale);
          fv = -e;
          fp = e * inv_scale;
        } else {
          const double r = std::sqrt(s + eps);
          fv = r;
          fp = 0.5 / r;
        }
        if (labels[i] != labels[j]) {
          a.mass_b += ww;
          a.val_b += ww * fv;
          if (want_grad) gb += (ww * fp) * delta;
        } else {
          a.mass_w += ww;
          a.val_w += ww * fv;
          if (want_grad) gw += (ww * fp) * delta;
        }
      }
      if (pairs.empty()) {
        if (++j == n) {
          ++i;
          j = i + 1;
        }
      }
    }
    acc[b] = a;
    if (want_grad) {
      grad_b.col(b) = gb;
      grad_w.col(b) = gw;
    }
  };

  parallel_for_index(nblocks, run_block, threads);

  Accumulated out;
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    out.mass_b += acc[b].mass_b;
    out.mass_w += acc[b].mass_w;
    out.val_b += acc[b].val_b;
    out.val_w += acc[b].val_w;
  }
  if (want_grad) {
    out.grad_b.setZero(p);
    out.grad_w.setZero(p);
    for (std::uint64_t b = 0; b < nblocks; ++b) {
      out.grad_b += grad_b.col(b);
      out.grad_w += grad_w.col(b);
    }
  }
  return out;
}

// Sample m distinct pair indices from [0, total) without replacement,
// returned sorted so the blocked reduction stays deterministic.
std::vector<std::uint64_t> sample_pairs(std::uint64_t total, std::uint64_t m,
                                        std::uint64_t seed) {
  std::vector<std::uint64_t> out;
  if (m >= total) return out;  // empty = full enumeration
  Rng rng(seed);
  out.reserve(m);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(m * 2);
  // Floyd's algorithm.
  for (std::uint64_t k = total - m; k < total; ++k) {
    const std::uint64_t t = rng.below(k + 1);
    if (seen.insert(t).second) {
      out.push_back(t);
    } else {
      seen.insert(k);
      out.push_back(k);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ObjectiveEval run(const WeightedDataset& ds, const Vector& beta,
                  const KernelSpec& spec, bool want_grad,
                  const EvalOptions& opts) {
  spec.validate();
  if (beta.size() != ds.p())
    throw std::invalid_argument("beta length must match feature count");
  if ((beta.array() < 0.0).any())
    throw std::invalid_argument("beta must be nonnegative");

  const std::uint64_t total =
      static_cast<std::uint64_t>(ds.n()) * (ds.n() - 1) / 2;
  std::vector<std::uint64_t> pairs;
  if (opts.pair_sample > 0 &&
      static_cast<std::uint64_t>(opts.pair_sample) < total)
    pairs = sample_pairs(total, opts.pair_sample, opts.sample_seed);

  Accumulated acc =
      accumulate_pairs(ds, beta, spec, want_grad, pairs, opts.threads);

  const double total_weight = ds.weights.sum();
  const double floor = 1e-12 * total_weight * total_weight;
  // Masses here count unordered pairs; the ordered-pair convention doubles
  // them, which cancels in the ratios below.
  if (2.0 * acc.mass_b <= floor || 2.0 * acc.mass_w <= floor)
    throw DegeneratePairs("between or within pair mass below degeneracy floor");

  ObjectiveEval result;
  result.value = acc.val_b / acc.mass_b - acc.val_w / acc.mass_w;
  if (want_grad)
    result.gradient = acc.grad_b / acc.mass_b - acc.grad_w / acc.mass_w;
  return result;
}

}  // namespace

double evaluate(const WeightedDataset& ds, const Vector& beta,
                const KernelSpec& spec, const EvalOptions& opts) {
  return run(ds, beta, spec, /*want_grad=*/false, opts).value;
}

Vector gradient(const WeightedDataset& ds, const Vector& beta,
                const KernelSpec& spec, const EvalOptions& opts) {
  return run(ds, beta, spec, /*want_grad=*/true, opts).gradient;
}

ObjectiveEval evaluate_with_gradient(const WeightedDataset& ds,
                                     const Vector& beta, const KernelSpec& spec,
                                     const EvalOptions& opts) {
  return run(ds, beta, spec, /*want_grad=*/true, opts);
}

ObjectiveFn make_sample_objective(WeightedDataset ds, KernelSpec spec,
                                  EvalOptions opts) {
  return [ds = std::move(ds), spec, opts](const Vector& beta) {
    return evaluate_with_gradient(ds, beta, spec, opts);
  };
}

}  // namespace mscreen
