#include "mscreen/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mscreen {

void DiscreteDist::validate() const {
  if (support.empty()) throw std::invalid_argument("empty discrete support");
  const Index dim = support.front().x.size();
  double total = 0;
  for (const auto& a : support) {
    if (a.x.size() != dim)
      throw std::invalid_argument("inconsistent support dimensions");
    if (a.y != 0 && a.y != 1) throw std::invalid_argument("labels must be binary");
    if (!(a.prob > 0)) throw std::invalid_argument("atom probabilities must be > 0");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("atom probabilities must sum to 1");
}

double DiscreteDist::prob_y1() const {
  double s = 0;
  for (const auto& a : support)
    if (a.y == 1) s += a.prob;
  return s;
}

Index model_dim(const ModelSpec& model) {
  return std::visit(
      [](const auto& m) -> Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiscreteModel>)
          return m.dist.p();
        else
          return m.p;
      },
      model);
}

std::vector<Index> model_signal_set(const ModelSpec& model) {
  return std::visit(
      [](const auto& m) -> std::vector<Index> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UnequalVarianceModel>) {
          std::vector<Index> s;
          for (Index j = 0; j < static_cast<Index>(m.deltas.size()); ++j)
            s.push_back(j);
          return s;
        } else if constexpr (std::is_same_v<T, QdaModel>) {
          return {0, 1, 2, 3};
        } else if constexpr (std::is_same_v<T, RatioLogisticModel>) {
          return {0, 1, 2, 3};
        } else if constexpr (std::is_same_v<T, XorModel>) {
          return {0, 1};
        } else if constexpr (std::is_same_v<T, BinaryMainEffectsModel>) {
          std::vector<Index> s;
          for (Index j = 0; j < static_cast<Index>(m.deltas.size()); ++j)
            if (m.deltas[j] != 0.0) s.push_back(j);
          return s;
        } else {
          return {};
        }
      },
      model);
}

void validate_model(const ModelSpec& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UnequalVarianceModel>) {
          if (!(m.sigma2 > 0)) throw std::invalid_argument("sigma2 must be > 0");
          if (m.p < static_cast<Index>(m.deltas.size()))
            throw std::invalid_argument("p smaller than the number of signals");
          for (double d : m.deltas)
            if (!(d > 0 && d < 1))
              throw std::invalid_argument("deltas must lie in (0,1)");
        } else if constexpr (std::is_same_v<T, QdaModel>) {
          if (m.p < 4) throw std::invalid_argument("QDA model needs p >= 4");
          if (!(std::abs(m.rho) < 1))
            throw std::invalid_argument("|rho| must be < 1");
        } else if constexpr (std::is_same_v<T, RatioLogisticModel>) {
          if (m.p < 4) throw std::invalid_argument("ratio model needs p >= 4");
        } else if constexpr (std::is_same_v<T, XorModel>) {
          if (m.p < 2) throw std::invalid_argument("XOR model needs p >= 2");
        } else if constexpr (std::is_same_v<T, BinaryMainEffectsModel>) {
          if (m.p < static_cast<Index>(m.deltas.size()))
            throw std::invalid_argument("p smaller than the number of signals");
          for (double d : m.deltas)
            if (!(d >= 0 && d < 1))
              throw std::invalid_argument("deltas must lie in [0,1)");
        } else if constexpr (std::is_same_v<T, DiscreteModel>) {
          m.dist.validate();
        }
      },
      model);
}

namespace {

RawData generate_unequal_variance(const UnequalVarianceModel& m, Index n, Rng& rng) {
  RawData d;
  d.features.resize(n, m.p);
  d.labels.resize(n);
  const double sigma = std::sqrt(m.sigma2);
  const Index s = static_cast<Index>(m.deltas.size());
  for (Index i = 0; i < n; ++i) {
    const int y = rng.bernoulli(0.5) ? 1 : 0;
    d.labels[i] = y;
    for (Index j = 0; j < m.p; ++j) {
      double sd = sigma;
      if (j < s) sd = sigma * std::sqrt(y == 1 ? 1.0 - m.deltas[j] : 1.0 + m.deltas[j]);
      d.features(i, j) = sd * rng.normal();
    }
  }
  return d;
}

RawData generate_qda(const QdaModel& m, Index n, Rng& rng) {
  RawData d;
  d.features.resize(n, m.p);
  d.labels.resize(n);
  const double mu[4] = {m.delta1, m.xi, m.delta2, m.xi};
  for (Index i = 0; i < n; ++i) {
    const int y = rng.bernoulli(0.5) ? 1 : 0;
    d.labels[i] = y;
    const double sign = y == 1 ? 1.0 : -1.0;
    const double c = sign * m.rho;
    const double root = std::sqrt(1.0 - c * c);
    for (int blk = 0; blk < 2; ++blk) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      d.features(i, 2 * blk) = sign * mu[2 * blk] + z1;
      d.features(i, 2 * blk + 1) = sign * mu[2 * blk + 1] + c * z1 + root * z2;
    }
    for (Index j = 4; j < m.p; ++j) d.features(i, j) = rng.normal();
  }
  return d;
}

RawData generate_ratio_logistic(const RatioLogisticModel& m, Index n, Rng& rng) {
  RawData d;
  d.features.resize(n, m.p);
  d.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m.p; ++j) d.features(i, j) = rng.normal();
    const double eta =
        std::abs(d.features(i, 1)) / std::abs(d.features(i, 0)) +
        m.coef * std::abs(d.features(i, 3)) / std::abs(d.features(i, 2));
    const double prob = std::isfinite(eta) ? 1.0 / (1.0 + std::exp(-eta)) : 1.0;
    d.labels[i] = rng.bernoulli(prob) ? 1 : 0;
  }
  return d;
}

RawData generate_xor(const XorModel& m, Index n, Rng& rng) {
  RawData d;
  d.features.resize(n, m.p);
  d.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m.p; ++j) d.features(i, j) = rng.normal();
    d.labels[i] = d.features(i, 0) * d.features(i, 1) > 0 ? 1 : 0;
  }
  return d;
}

RawData generate_binary_main_effects(const BinaryMainEffectsModel& m, Index n,
                                     Rng& rng) {
  RawData d;
  d.features.resize(n, m.p);
  d.labels.resize(n);
  const Index s = static_cast<Index>(m.deltas.size());
  for (Index i = 0; i < n; ++i) {
    const int y = rng.bernoulli(0.5) ? 1 : 0;
    d.labels[i] = y;
    for (Index j = 0; j < m.p; ++j) {
      const double delta = j < s ? m.deltas[j] : 0.0;
      const double p_plus = y == 1 ? 0.5 * (1 + delta) : 0.5 * (1 - delta);
      d.features(i, j) = rng.bernoulli(p_plus) ? 0.5 : -0.5;
    }
  }
  return d;
}

}  // namespace

RawData generate(const ModelSpec& model, Index n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  validate_model(model);
  Rng rng(seed);
  return std::visit(
      [&](const auto& m) -> RawData {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UnequalVarianceModel>)
          return generate_unequal_variance(m, n, rng);
        else if constexpr (std::is_same_v<T, QdaModel>)
          return generate_qda(m, n, rng);
        else if constexpr (std::is_same_v<T, RatioLogisticModel>)
          return generate_ratio_logistic(m, n, rng);
        else if constexpr (std::is_same_v<T, XorModel>)
          return generate_xor(m, n, rng);
        else if constexpr (std::is_same_v<T, BinaryMainEffectsModel>)
          return generate_binary_main_effects(m, n, rng);
        else
          return sample_discrete(m.dist, n, rng);
      },
      model);
}

WeightFn balance_weight_fn(const DiscreteDist& dist) {
  const double p1 = dist.prob_y1();
  return [p1](const Vector&, int y) { return y == 1 ? 1.0 - p1 : p1; };
}

WeightFn rebalance_weight_fn(const DiscreteDist& dist, const std::vector<Index>& A) {
  if (A.empty()) return balance_weight_fn(dist);
  // Exact conditional class probabilities over matching X_A patterns.
  struct Cell {
    double mass_y1 = 0, mass = 0;
  };
  auto key_of = [A](const Vector& x) {
    std::vector<double> key;
    key.reserve(A.size());
    for (Index j : A) key.push_back(x[j]);
    return key;
  };
  std::map<std::vector<double>, Cell> cells;
  for (const auto& a : dist.support) {
    Cell& c = cells[key_of(a.x)];
    c.mass += a.prob;
    if (a.y == 1) c.mass_y1 += a.prob;
  }
  return [cells, key_of](const Vector& x, int y) {
    auto it = cells.find(key_of(x));
    if (it == cells.end()) return 0.0;
    const double p1 = it->second.mass_y1 / it->second.mass;
    return y == 1 ? 1.0 - p1 : p1;
  };
}

namespace {

struct PopulationEval {
  double value;
  Vector gradient;
};

PopulationEval population_eval(const DiscreteDist& dist, const Vector& beta,
                               const KernelSpec& spec, const WeightFn& weight_fn,
                               bool want_grad) {
  dist.validate();
  spec.validate();
  const Index p = dist.p();
  if (beta.size() != p)
    throw std::invalid_argument("beta length must match support dimension");

  const WeightFn& w = weight_fn ? weight_fn : balance_weight_fn(dist);
  const std::size_t K = dist.support.size();
  std::vector<double> mass(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& a = dist.support[k];
    const double wk = w(a.x, a.y);
    if (!(wk >= 0)) throw std::invalid_argument("weight function must be >= 0");
    mass[k] = a.prob * wk;
  }

  double mb = 0, mw = 0, vb = 0, vw = 0;
  Vector gb = Vector::Zero(p), gw = Vector::Zero(p);
  Vector delta(p);
  for (std::size_t k = 0; k < K; ++k) {
    if (mass[k] == 0) continue;
    for (std::size_t l = 0; l < K; ++l) {
      const double m = mass[k] * mass[l];
      if (m == 0) continue;
      delta = (dist.support[k].x - dist.support[l].x).cwiseAbs();
      if (spec.q == DeltaOrder::L2) delta.array() *= delta.array();
      const double s = beta.dot(delta);
      const bool between = dist.support[k].y != dist.support[l].y;
      (between ? mb : mw) += m;
      (between ? vb : vw) += m * f_eval(spec, s);
      if (want_grad) (between ? gb : gw) += (m * f_prime(spec, s)) * delta;
    }
  }
  if (!(mb > 0) || !(mw > 0))
    throw DegeneratePairs("degenerate reweighted class mass");

  PopulationEval out;
  out.value = vb / mb - vw / mw;
  if (want_grad) out.gradient = gb / mb - gw / mw;
  return out;
}

}  // namespace

double population_objective(const DiscreteDist& dist, const Vector& beta,
                            const KernelSpec& spec, const WeightFn& weight_fn) {
  return population_eval(dist, beta, spec, weight_fn, false).value;
}

Vector population_gradient(const DiscreteDist& dist, const Vector& beta,
                           const KernelSpec& spec, const WeightFn& weight_fn) {
  return population_eval(dist, beta, spec, weight_fn, true).gradient;
}

ObjectiveFn make_population_objective(DiscreteDist dist, KernelSpec spec,
                                      WeightFn weight_fn) {
  return [dist = std::move(dist), spec,
          weight_fn = std::move(weight_fn)](const Vector& beta) {
    PopulationEval e = population_eval(dist, beta, spec, weight_fn, true);
    return ObjectiveEval{e.value, std::move(e.gradient)};
  };
}

double xor_closed_form(double beta1, double beta2, double c,
                       const KernelSpec& spec) {
  if (beta1 < 0 || beta2 < 0 || c < 0)
    throw std::domain_error("xor_closed_form: arguments must be >= 0");
  if (spec.family != KernelFamily::NegExp)
    throw std::invalid_argument("xor_closed_form is derived for NegExp only");
  const double s = spec.scale;
  return 0.5 * std::exp(-c / s) * (1.0 - std::exp(-beta1 / s)) *
         (1.0 - std::exp(-beta2 / s));
}

DiscreteDist xor_discrete(int order, Index p) {
  if (order < 1 || p < order || p > 20)
    throw std::invalid_argument("xor_discrete: need 1 <= order <= p <= 20");
  DiscreteDist dist;
  const std::size_t count = std::size_t{1} << p;
  const double prob = 1.0 / static_cast<double>(count);
  dist.support.reserve(count);
  for (std::size_t bits = 0; bits < count; ++bits) {
    DiscreteDist::Atom a;
    a.x.resize(p);
    double prod = 1.0;
    for (Index j = 0; j < p; ++j) {
      a.x[j] = (bits >> j) & 1 ? 0.5 : -0.5;
      if (j < order) prod *= a.x[j];
    }
    a.y = prod > 0 ? 1 : 0;
    a.prob = prob;
    dist.support.push_back(std::move(a));
  }
  return dist;
}

DiscreteDist binary_main_effects_discrete(const std::vector<double>& deltas,
                                          Index p) {
  if (p < static_cast<Index>(deltas.size()) || p > 20)
    throw std::invalid_argument("binary_main_effects_discrete: bad dimensions");
  DiscreteDist dist;
  const std::size_t count = std::size_t{1} << p;
  for (int y = 0; y <= 1; ++y) {
    for (std::size_t bits = 0; bits < count; ++bits) {
      DiscreteDist::Atom a;
      a.x.resize(p);
      a.y = y;
      a.prob = 0.5;  // P(Y = y)
      for (Index j = 0; j < p; ++j) {
        const bool plus = (bits >> j) & 1;
        a.x[j] = plus ? 0.5 : -0.5;
        const double d = j < static_cast<Index>(deltas.size()) ? deltas[j] : 0.0;
        const double p_plus = y == 1 ? 0.5 * (1 + d) : 0.5 * (1 - d);
        a.prob *= plus ? p_plus : 1.0 - p_plus;
      }
      if (a.prob > 0) dist.support.push_back(std::move(a));
    }
  }
  return dist;
}

RawData sample_discrete(const DiscreteDist& dist, Index n, Rng& rng) {
  dist.validate();
  std::vector<double> cdf(dist.support.size());
  double acc = 0;
  for (std::size_t k = 0; k < dist.support.size(); ++k) {
    acc += dist.support[k].prob;
    cdf[k] = acc;
  }
  RawData d;
  d.features.resize(n, dist.p());
  d.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const std::size_t k =
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    const auto& a = dist.support[std::min(k, dist.support.size() - 1)];
    d.features.row(i) = a.x.transpose();
    d.labels[i] = a.y;
  }
  return d;
}

DiscreteDist empirical_distribution(const RawData& data) {
  DiscreteDist dist;
  const Index n = data.features.rows();
  const double prob = 1.0 / static_cast<double>(n);
  dist.support.reserve(n);
  for (Index i = 0; i < n; ++i) {
    DiscreteDist::Atom a;
    a.x = data.features.row(i).transpose();
    a.y = data.labels[i];
    a.prob = prob;
    dist.support.push_back(std::move(a));
  }
  return dist;
}

}  // namespace mscreen
