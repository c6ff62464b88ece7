// Command-line front end: screen CSV data, generate simulations, run
// replication plans, and run the oracle self-checks.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mscreen/csv.hpp"
#include "mscreen/experiments.hpp"
#include "mscreen/json_io.hpp"
#include "mscreen/oracle.hpp"
#include "mscreen/parallel.hpp"
#include "mscreen/screening.hpp"
#include "mscreen/simgen.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitCheckFailed = 4;

using mscreen::Index;
using mscreen::Json;

mscreen::GammaMode parse_gamma(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw CLI::ValidationError("--gamma", "empty specification");
  try {
    if (parts[0] == "permutation") {
      mscreen::GammaPermutation perm;
      if (parts.size() > 1) perm.n_perm = std::stoi(parts[1]);
      if (parts.size() > 2) perm.quantile = std::stod(parts[2]);
      return perm;
    }
    if (parts[0] == "theory") {
      mscreen::GammaTheory theory;
      if (parts.size() > 1) theory.c_gamma = std::stod(parts[1]);
      if (parts.size() > 2) theory.t = std::stod(parts[2]);
      return theory;
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError("--gamma", "malformed value '" + text + "'");
  }
  throw CLI::ValidationError(
      "--gamma", "expected permutation:<n>:<q> or theory:<c>:<t>, got '" + text + "'");
}

mscreen::KernelSpec make_kernel(const std::string& family, double scale,
                                double epsilon, int q) {
  mscreen::KernelSpec spec;
  if (family == "negexp")
    spec.family = mscreen::KernelFamily::NegExp;
  else if (family == "sqrtshift")
    spec.family = mscreen::KernelFamily::SqrtShift;
  else
    throw CLI::ValidationError("--kernel", "unknown family '" + family + "'");
  spec.scale = scale;
  spec.epsilon = epsilon;
  if (q != 1 && q != 2) throw CLI::ValidationError("--q", "q must be 1 or 2");
  spec.q = q == 1 ? mscreen::DeltaOrder::L1 : mscreen::DeltaOrder::L2;
  spec.validate();
  return spec;
}

struct ScreenArgs {
  std::string input;
  std::string label = "y";
  std::string output = "screen_result.json";
  std::string mode = "low";
  std::string gamma = "permutation:200:0.95";
  std::string kernel_family = "negexp";
  double scale = 1.0;
  double epsilon = 1e-8;
  int q = 1;
  double lambda_coeff = 1.0;
  double lambda_t = 0.0;
  double budget = 10.0;
  double tau = -1.0;  // negative = use the mode default
  int max_rounds = 10;
  Index max_selected = 0;
  double step_coeff = 1.0;
  int max_iters = 200;
  std::uint64_t seed = 0;
  bool no_rescale = false;
};

int cmd_screen(const ScreenArgs& args) {
  mscreen::CsvTable table = mscreen::read_csv(args.input);
  mscreen::LabeledData data = mscreen::split_label(table, args.label);

  // Rescale each column by its max absolute value so the bounded-feature
  // constant is 1 on user data; constant columns carry no pair information.
  std::vector<double> scale_factors(data.features.cols(), 1.0);
  for (Index j = 0; j < data.features.cols(); ++j) {
    const double lo = data.features.col(j).minCoeff();
    const double hi = data.features.col(j).maxCoeff();
    if (lo == hi)
      throw mscreen::DataError("degenerate feature column '" +
                               data.feature_names[j] + "'");
    if (!args.no_rescale) {
      const double m = data.features.col(j).cwiseAbs().maxCoeff();
      scale_factors[j] = m;
      data.features.col(j) /= m;
    }
  }

  mscreen::ScreenConfig cfg;
  if (args.mode == "low")
    cfg.mode = mscreen::ScreenMode::LowDim;
  else if (args.mode == "high")
    cfg.mode = mscreen::ScreenMode::HighDim;
  else if (args.mode == "hier")
    cfg.mode = mscreen::ScreenMode::Hier;
  else
    throw CLI::ValidationError("--mode", "expected low, high or hier");
  cfg.gamma_mode = parse_gamma(args.gamma);
  cfg.kernel = make_kernel(args.kernel_family, args.scale, args.epsilon, args.q);
  cfg.lambda_coeff = args.lambda_coeff;
  cfg.lambda_t = args.lambda_t;
  cfg.budget = args.budget;
  if (args.tau >= 0) cfg.tau = args.tau;
  cfg.max_rounds = args.max_rounds;
  cfg.max_selected = args.max_selected;
  cfg.ascent.step_coeff = args.step_coeff;
  cfg.ascent.max_iters = args.max_iters;
  cfg.seed = args.seed;

  const mscreen::ScreenResult result =
      mscreen::screen(mscreen::make_dataset(data.features, data.labels), cfg);

  Json out = mscreen::screen_result_to_json(result);
  out["schema"] = 1;
  out["config"] = mscreen::screen_config_to_json(cfg);
  out["seed"] = args.seed;
  out["input"] = args.input;
  out["label_column"] = args.label;
  out["rescaled"] = !args.no_rescale;
  out["scale_factors"] = scale_factors;
  Json names = Json::array();
  for (Index j : result.final_selected) names.push_back(data.feature_names[j]);
  out["selected_names"] = std::move(names);
  mscreen::write_json_file(args.output, out);
  std::cout << "selected " << result.final_selected.size() << " variable(s), "
            << "termination: " << mscreen::to_string(result.termination) << "\n"
            << "wrote " << args.output << "\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string model = "xor";
  Index p = 0;
  Index n = 1000;
  std::uint64_t seed = 0;
  std::string output = "sim.csv";
  double sigma2 = 1.0;
  std::vector<double> deltas;
  double delta1 = 0.25, delta2 = 0.2, xi = 0.1, rho = 0.5;
  double coef = 0.8;
};

int cmd_simulate(const SimulateArgs& args) {
  mscreen::ModelSpec model;
  if (args.model == "xor") {
    mscreen::XorModel m;
    if (args.p > 0) m.p = args.p;
    model = m;
  } else if (args.model == "uneq-var" || args.model == "unequal-variance") {
    mscreen::UnequalVarianceModel m;
    m.sigma2 = args.sigma2;
    if (!args.deltas.empty()) m.deltas = args.deltas;
    if (args.p > 0) m.p = args.p;
    model = m;
  } else if (args.model == "qda") {
    mscreen::QdaModel m;
    m.delta1 = args.delta1;
    m.delta2 = args.delta2;
    m.xi = args.xi;
    m.rho = args.rho;
    if (args.p > 0) m.p = args.p;
    model = m;
  } else if (args.model == "ratio") {
    mscreen::RatioLogisticModel m;
    m.coef = args.coef;
    if (args.p > 0) m.p = args.p;
    model = m;
  } else if (args.model == "binary-main") {
    mscreen::BinaryMainEffectsModel m;
    m.deltas = args.deltas.empty() ? std::vector<double>{0.45, 0.15} : args.deltas;
    m.p = args.p > 0 ? args.p : static_cast<Index>(m.deltas.size());
    model = m;
  } else {
    throw CLI::ValidationError("--model", "unknown model '" + args.model + "'");
  }

  const mscreen::RawData data = mscreen::generate(model, args.n, args.seed);
  mscreen::write_dataset_csv(args.output, data.features, data.labels);

  Json meta;
  meta["schema"] = 1;
  meta["model"] = mscreen::model_to_json(model);
  meta["n"] = args.n;
  meta["seed"] = args.seed;
  meta["output"] = args.output;
  mscreen::write_json_file(args.output + ".meta.json", meta);
  std::cout << "wrote " << args.output << " (" << data.features.rows() << " x "
            << data.features.cols() + 1 << ")\n";
  return kExitOk;
}

int cmd_replicate(const std::string& plan_path, const std::string& out_dir,
                  int threads) {
  mscreen::ExperimentPlan plan =
      mscreen::plan_from_json(mscreen::read_json_file(plan_path));
  if (threads > 0) plan.threads = threads;

  std::cerr << "running " << plan.noise_dims.size() * plan.reps
            << " tasks over " << plan.methods.size() << " method(s)\n";
  const mscreen::RecoveryReport report = mscreen::run_plan(plan);

  std::filesystem::create_directories(out_dir);
  const std::string csv_path =
      (std::filesystem::path(out_dir) / "recovery.csv").string();
  const std::string json_path =
      (std::filesystem::path(out_dir) / "summary.json").string();
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw mscreen::DataError("cannot write '" + csv_path + "'");
    out << mscreen::report_to_csv(report);
  }
  Json summary = mscreen::report_to_json(report);
  summary["plan"] = mscreen::plan_to_json(plan);
  mscreen::write_json_file(json_path, summary);
  std::cout << "wrote " << csv_path << " and " << json_path << "\n";
  return kExitOk;
}

int cmd_oracle_check(const std::string& family, double scale, double epsilon,
                     int q) {
  mscreen::OracleOptions opts;
  opts.kernel = make_kernel(family, scale, epsilon, q);
  const auto checks = mscreen::run_oracle_checks(opts);
  bool all_ok = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  ("
              << c.detail << ")\n";
    all_ok = all_ok && c.passed;
  }
  return all_ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric variable selection via metric screening"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (METRIC_SCREEN_THREADS overrides)");

  ScreenArgs screen_args;
  auto* screen = app.add_subcommand("screen", "screen a CSV dataset");
  screen->add_option("--input", screen_args.input, "input CSV path")->required();
  screen->add_option("--label", screen_args.label, "label column name");
  screen->add_option("--output", screen_args.output, "output JSON path");
  screen->add_option("--mode", screen_args.mode, "low | high | hier");
  screen->add_option("--gamma", screen_args.gamma,
                     "permutation:<n_perm>:<quantile> or theory:<c>:<t>");
  screen->add_option("--kernel", screen_args.kernel_family, "negexp | sqrtshift");
  screen->add_option("--scale", screen_args.scale, "NegExp bandwidth");
  screen->add_option("--epsilon", screen_args.epsilon, "SqrtShift shift");
  screen->add_option("--q", screen_args.q, "distance exponent, 1 or 2");
  screen->add_option("--lambda-coeff", screen_args.lambda_coeff, "c_lambda");
  screen->add_option("--lambda-t", screen_args.lambda_t, "lambda deviation factor t");
  screen->add_option("--budget", screen_args.budget, "l1 budget b");
  screen->add_option("--tau", screen_args.tau, "hier pin value (default b/(2*max_rounds))");
  screen->add_option("--max-rounds", screen_args.max_rounds, "round cap");
  screen->add_option("--max-selected", screen_args.max_selected,
                     "cap on |selected| (0 = none)");
  screen->add_option("--step-coeff", screen_args.step_coeff, "stepsize = c/p");
  screen->add_option("--max-iters", screen_args.max_iters, "ascent iterations");
  screen->add_option("--seed", screen_args.seed, "random seed");
  screen->add_flag("--no-rescale", screen_args.no_rescale,
                   "skip per-column max-abs rescaling");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "generate a simulation CSV");
  simulate->add_option("--model", sim_args.model,
                       "xor | uneq-var | qda | ratio | binary-main");
  simulate->add_option("--p", sim_args.p, "total feature count");
  simulate->add_option("--n", sim_args.n, "sample count");
  simulate->add_option("--seed", sim_args.seed, "random seed");
  simulate->add_option("--output", sim_args.output, "output CSV path");
  simulate->add_option("--sigma2", sim_args.sigma2, "noise variance");
  simulate->add_option("--deltas", sim_args.deltas, "signal sizes")
      ->delimiter(',');
  simulate->add_option("--delta1", sim_args.delta1, "QDA main effect 1");
  simulate->add_option("--delta2", sim_args.delta2, "QDA main effect 2");
  simulate->add_option("--xi", sim_args.xi, "QDA weak main effect");
  simulate->add_option("--rho", sim_args.rho, "QDA interaction strength");
  simulate->add_option("--coef", sim_args.coef, "ratio model coefficient");

  std::string plan_path, out_dir = ".";
  auto* replicate = app.add_subcommand("replicate", "run a replication plan");
  replicate->add_option("--plan", plan_path, "plan JSON path")->required();
  replicate->add_option("--output-dir", out_dir, "output directory");

  std::string oc_family = "negexp";
  double oc_scale = 1.0, oc_epsilon = 1e-8;
  int oc_q = 1;
  auto* oracle = app.add_subcommand("oracle-check", "run the oracle self-checks");
  oracle->add_option("--kernel", oc_family, "negexp | sqrtshift");
  oracle->add_option("--scale", oc_scale, "NegExp bandwidth");
  oracle->add_option("--epsilon", oc_epsilon, "SqrtShift shift");
  oracle->add_option("--q", oc_q, "distance exponent, 1 or 2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  // The environment variable takes precedence over the flag.
  if (std::getenv("METRIC_SCREEN_THREADS") == nullptr && threads > 0)
    mscreen::set_default_threads(threads);

  try {
    if (screen->parsed()) return cmd_screen(screen_args);
    if (simulate->parsed()) return cmd_simulate(sim_args);
    if (replicate->parsed()) return cmd_replicate(plan_path, out_dir, threads);
    if (oracle->parsed())
      return cmd_oracle_check(oc_family, oc_scale, oc_epsilon, oc_q);
  } catch (const mscreen::DegeneratePairs& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const mscreen::DegenerateWeights& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const mscreen::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
