#include "mscreen/json_io.hpp"

#include <fstream>
#include <sstream>

namespace mscreen {

namespace {

const Json& require_field(const Json& j, const std::string& key,
                          const std::string& where) {
  if (!j.contains(key))
    throw DataError(where + ": missing field '" + key + "'");
  return j.at(key);
}

template <typename T>
T field_or(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw DataError("invalid value for field '" + key + "'");
  }
}

template <typename T>
T get_field(const Json& j, const std::string& key, const std::string& where) {
  try {
    return require_field(j, key, where).get<T>();
  } catch (const Json::exception&) {
    throw DataError(where + ": invalid value for field '" + key + "'");
  }
}

Method method_from_string(const std::string& s) {
  if (s == "metric_laplace") return Method::MetricLaplace;
  if (s == "metric_gaussian") return Method::MetricGaussian;
  if (s == "marginal_dcor") return Method::MarginalDCor;
  throw DataError("unknown method '" + s + "'");
}

}  // namespace

Json kernel_to_json(const KernelSpec& spec) {
  Json j;
  j["family"] = spec.family == KernelFamily::NegExp ? "neg_exp" : "sqrt_shift";
  j["scale"] = spec.scale;
  j["epsilon"] = spec.epsilon;
  j["q"] = static_cast<int>(spec.q);
  return j;
}

KernelSpec kernel_from_json(const Json& j) {
  KernelSpec spec;
  const std::string family = field_or<std::string>(j, "family", "neg_exp");
  if (family == "neg_exp")
    spec.family = KernelFamily::NegExp;
  else if (family == "sqrt_shift")
    spec.family = KernelFamily::SqrtShift;
  else
    throw DataError("unknown kernel family '" + family + "'");
  spec.scale = field_or<double>(j, "scale", 1.0);
  spec.epsilon = field_or<double>(j, "epsilon", 1e-8);
  const int q = field_or<int>(j, "q", 1);
  if (q != 1 && q != 2) throw DataError("kernel q must be 1 or 2");
  spec.q = q == 1 ? DeltaOrder::L1 : DeltaOrder::L2;
  spec.validate();
  return spec;
}

Json model_to_json(const ModelSpec& model) {
  Json j;
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UnequalVarianceModel>) {
          j["type"] = "unequal_variance";
          j["sigma2"] = m.sigma2;
          j["deltas"] = m.deltas;
          j["p"] = m.p;
        } else if constexpr (std::is_same_v<T, QdaModel>) {
          j["type"] = "qda";
          j["delta1"] = m.delta1;
          j["delta2"] = m.delta2;
          j["xi"] = m.xi;
          j["rho"] = m.rho;
          j["p"] = m.p;
        } else if constexpr (std::is_same_v<T, RatioLogisticModel>) {
          j["type"] = "ratio_logistic";
          j["coef"] = m.coef;
          j["p"] = m.p;
        } else if constexpr (std::is_same_v<T, XorModel>) {
          j["type"] = "xor";
          j["p"] = m.p;
        } else if constexpr (std::is_same_v<T, BinaryMainEffectsModel>) {
          j["type"] = "binary_main_effects";
          j["deltas"] = m.deltas;
          j["p"] = m.p;
        } else {
          j["type"] = "discrete";
          Json atoms = Json::array();
          for (const auto& a : m.dist.support) {
            Json atom;
            atom["x"] = std::vector<double>(a.x.data(), a.x.data() + a.x.size());
            atom["y"] = a.y;
            atom["prob"] = a.prob;
            atoms.push_back(std::move(atom));
          }
          j["support"] = std::move(atoms);
        }
      },
      model);
  return j;
}

ModelSpec model_from_json(const Json& j) {
  const std::string type = get_field<std::string>(j, "type", "model");
  if (type == "unequal_variance") {
    UnequalVarianceModel m;
    m.sigma2 = field_or<double>(j, "sigma2", m.sigma2);
    m.deltas = field_or<std::vector<double>>(j, "deltas", m.deltas);
    m.p = field_or<Index>(j, "p", m.p);
    return m;
  }
  if (type == "qda") {
    QdaModel m;
    m.delta1 = field_or<double>(j, "delta1", m.delta1);
    m.delta2 = field_or<double>(j, "delta2", m.delta2);
    m.xi = field_or<double>(j, "xi", m.xi);
    m.rho = field_or<double>(j, "rho", m.rho);
    m.p = field_or<Index>(j, "p", m.p);
    return m;
  }
  if (type == "ratio_logistic") {
    RatioLogisticModel m;
    m.coef = field_or<double>(j, "coef", m.coef);
    m.p = field_or<Index>(j, "p", m.p);
    return m;
  }
  if (type == "xor") {
    XorModel m;
    m.p = field_or<Index>(j, "p", m.p);
    return m;
  }
  if (type == "binary_main_effects") {
    BinaryMainEffectsModel m;
    m.deltas = get_field<std::vector<double>>(j, "deltas", "model");
    m.p = field_or<Index>(j, "p", static_cast<Index>(m.deltas.size()));
    return m;
  }
  if (type == "discrete") {
    DiscreteModel m;
    for (const auto& atom : require_field(j, "support", "model")) {
      DiscreteDist::Atom a;
      const auto x = get_field<std::vector<double>>(atom, "x", "model.support");
      a.x = Eigen::Map<const Vector>(x.data(), static_cast<Index>(x.size()));
      a.y = get_field<int>(atom, "y", "model.support");
      a.prob = get_field<double>(atom, "prob", "model.support");
      m.dist.support.push_back(std::move(a));
    }
    return m;
  }
  throw DataError("unknown model type '" + type + "'");
}

Json screen_config_to_json(const ScreenConfig& cfg) {
  Json j;
  switch (cfg.mode) {
    case ScreenMode::LowDim: j["mode"] = "low"; break;
    case ScreenMode::HighDim: j["mode"] = "high"; break;
    case ScreenMode::Hier: j["mode"] = "hier"; break;
  }
  if (const auto* theory = std::get_if<GammaTheory>(&cfg.gamma_mode)) {
    j["gamma"] = {{"mode", "theory"}, {"c_gamma", theory->c_gamma}, {"t", theory->t}};
  } else {
    const auto& perm = std::get<GammaPermutation>(cfg.gamma_mode);
    j["gamma"] = {{"mode", "permutation"},
                  {"n_perm", perm.n_perm},
                  {"quantile", perm.quantile}};
  }
  j["lambda_coeff"] = cfg.lambda_coeff;
  j["lambda_t"] = cfg.lambda_t;
  j["budget"] = cfg.budget;
  j["tau"] = cfg.mode == ScreenMode::Hier ? cfg.hier_tau() : cfg.tau.value_or(0.0);
  j["max_rounds"] = cfg.max_rounds;
  j["max_selected"] = cfg.max_selected;
  j["kernel"] = kernel_to_json(cfg.kernel);
  j["seed"] = cfg.seed;
  j["ascent"] = {{"step_coeff", cfg.ascent.step_coeff},
                 {"max_iters", cfg.ascent.max_iters},
                 {"backtracking", cfg.ascent.backtracking}};
  j["boost"] = {{"rounds", cfg.boost.rounds},
                {"learning_rate", cfg.boost.learning_rate},
                {"max_leaves", cfg.boost.max_leaves},
                {"min_leaf", cfg.boost.min_leaf}};
  return j;
}

Json screen_result_to_json(const ScreenResult& result) {
  Json j;
  j["selected"] = result.final_selected;
  j["trajectory"] = result.selected;
  j["termination"] = to_string(result.termination);
  Json rounds = Json::array();
  for (const auto& r : result.rounds) {
    Json round;
    round["objective_at_init"] = r.objective_at_init;
    round["threshold_used"] = r.threshold_used;
    round["termination_reason"] = to_string(r.termination_reason);
    round["new_support"] = r.new_support;
    round["weights"] = {{"effective_size_class0", r.weight_summary.effective_size_class0},
                        {"effective_size_class1", r.weight_summary.effective_size_class1},
                        {"between_mass", r.weight_summary.between_mass},
                        {"within_mass", r.weight_summary.within_mass},
                        {"min_weight", r.weight_summary.min_weight},
                        {"max_weight", r.weight_summary.max_weight}};
    if (r.ascent_ran) {
      round["ascent"] = {{"converged", r.ascent.converged},
                         {"iterations", r.ascent.iterations},
                         {"objective_final", r.ascent.objective_trace.back()},
                         {"support", r.ascent.support}};
    }
    rounds.push_back(std::move(round));
  }
  j["rounds"] = std::move(rounds);
  return j;
}

Json plan_to_json(const ExperimentPlan& plan) {
  Json j;
  j["schema"] = 1;
  j["model"] = model_to_json(plan.model);
  j["noise_dims"] = plan.noise_dims;
  j["n"] = plan.n;
  j["reps"] = plan.reps;
  Json methods = Json::array();
  for (Method m : plan.methods) methods.push_back(to_string(m));
  j["methods"] = std::move(methods);
  j["select_k"] = plan.resolved_select_k();
  j["seed"] = plan.seed;
  j["budget"] = plan.budget;
  j["gamma_gate"] = plan.gamma_gate;
  j["n_perm"] = plan.n_perm;
  j["quantile"] = plan.quantile;
  j["max_iters"] = plan.ascent.max_iters;
  j["step_coeff"] = plan.ascent.step_coeff;
  j["max_rounds"] = plan.max_rounds;
  return j;
}

ExperimentPlan plan_from_json(const Json& j) {
  ExperimentPlan plan;
  const int schema = field_or<int>(j, "schema", 1);
  if (schema != 1) throw DataError("plan: unsupported schema version");
  plan.model = model_from_json(require_field(j, "model", "plan"));
  plan.noise_dims = get_field<std::vector<Index>>(j, "noise_dims", "plan");
  plan.n = get_field<Index>(j, "n", "plan");
  plan.reps = get_field<int>(j, "reps", "plan");
  if (j.contains("methods")) {
    plan.methods.clear();
    for (const auto& m : j.at("methods"))
      plan.methods.push_back(method_from_string(m.get<std::string>()));
  }
  plan.select_k = field_or<Index>(j, "select_k", 0);
  plan.seed = field_or<std::uint64_t>(j, "seed", 0);
  plan.budget = field_or<double>(j, "budget", plan.budget);
  plan.gamma_gate = field_or<bool>(j, "gamma_gate", plan.gamma_gate);
  plan.n_perm = field_or<int>(j, "n_perm", plan.n_perm);
  plan.quantile = field_or<double>(j, "quantile", plan.quantile);
  plan.ascent.max_iters = field_or<int>(j, "max_iters", plan.ascent.max_iters);
  plan.ascent.step_coeff =
      field_or<double>(j, "step_coeff", plan.ascent.step_coeff);
  plan.max_rounds = field_or<int>(j, "max_rounds", plan.max_rounds);
  plan.validate();
  return plan;
}

Json report_to_json(const RecoveryReport& report) {
  Json j;
  j["schema"] = 1;
  j["signal_variables"] = report.signal_variables;
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json cell;
    cell["method"] = to_string(c.method);
    cell["noise_dim"] = c.noise_dim;
    cell["recovery"] = c.recovery;
    cell["all_recovered"] = c.all_recovered;
    cell["reps"] = c.reps;
    cell["failed"] = c.failed;
    cell["mean_runtime_ms"] = c.mean_runtime_ms;
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  return j;
}

std::string report_to_csv(const RecoveryReport& report) {
  std::ostringstream out;
  out << "method,noise_dim,variable,recovery,reps,failed,mean_runtime_ms\n";
  for (const auto& c : report.cells) {
    for (std::size_t v = 0; v < c.recovery.size(); ++v) {
      out << to_string(c.method) << ',' << c.noise_dim << ",x"
          << (report.signal_variables[v] + 1) << ',' << c.recovery[v] << ','
          << c.reps << ',' << c.failed << ',' << c.mean_runtime_ms << '\n';
    }
    out << to_string(c.method) << ',' << c.noise_dim << ",all,"
        << c.all_recovered << ',' << c.reps << ',' << c.failed << ','
        << c.mean_runtime_ms << '\n';
  }
  return out.str();
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace mscreen
