#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace sgmmq::cli {
namespace {

using nlohmann::json;

// Everything the CLI can set, in flag-name form. Config files use the same
// keys (minus the leading dashes), so one struct covers both layers.
struct Flat {
  std::string env;
  std::size_t K = 50;
  std::size_t J = 3;
  double rho = 0.0;
  double alpha = 0.99;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::size_t buffer = 10000;
  std::size_t batch = 64;
  std::size_t steps = 100000;
  std::size_t eval_every = 10000;
  std::size_t eval_episodes = 20;
  double epsilon = 0.0;
  std::size_t updates_per_step = 1;
  std::size_t record_every = 100;
  double tau = 1e-4;
  std::string transport = "standard";
  std::string adam = "paper-literal";
  std::string reg_grad = "analytic";
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> sweep_rho;
  std::vector<std::size_t> sweep_k;
  std::string out = "out";
  std::size_t jobs = 1;
};

std::optional<TransportMode> transport_of(const std::string& s) {
  if (s == "standard") return TransportMode::Standard;
  if (s == "paper-literal") return TransportMode::PaperLiteral;
  return std::nullopt;
}

std::optional<AdamVariant> adam_of(const std::string& s) {
  if (s == "standard") return AdamVariant::Standard;
  if (s == "paper-literal") return AdamVariant::PaperLiteral;
  return std::nullopt;
}

std::optional<RegGradMode> reg_of(const std::string& s) {
  if (s == "analytic") return RegGradMode::Analytic;
  if (s == "paper-literal") return RegGradMode::PaperLiteral;
  return std::nullopt;
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "env",        "K",        "J",           "rho",
      "alpha",      "lr",       "beta1",       "beta2",
      "buffer",     "batch",    "steps",       "eval-every",
      "eval-episodes", "epsilon", "updates-per-step", "record-every",
      "tau",        "transport", "adam",       "reg-grad",
      "seed",       "seeds",    "sweep-rho",   "sweep-k",
      "out",        "jobs"};
  return keys;
}

// Overlays a config file onto the defaults. Returns an error string on any
// unknown key or type mismatch; sets the seed-provenance flags so the
// precedence ladder can tell a config seed from the built-in default.
std::optional<std::string> apply_config(const json& j, Flat& flat, bool& has_seed,
                                        bool& has_seeds) {
  if (!j.is_object()) return "config file must hold a JSON object";
  for (const auto& item : j.items()) {
    if (known_config_keys().count(item.key()) == 0)
      return "unknown config key \"" + item.key() + "\"";
  }
  try {
    if (j.contains("env")) flat.env = j.at("env").get<std::string>();
    if (j.contains("K")) flat.K = j.at("K").get<std::size_t>();
    if (j.contains("J")) flat.J = j.at("J").get<std::size_t>();
    if (j.contains("rho")) flat.rho = j.at("rho").get<double>();
    if (j.contains("alpha")) flat.alpha = j.at("alpha").get<double>();
    if (j.contains("lr")) flat.lr = j.at("lr").get<double>();
    if (j.contains("beta1")) flat.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2")) flat.beta2 = j.at("beta2").get<double>();
    if (j.contains("buffer")) flat.buffer = j.at("buffer").get<std::size_t>();
    if (j.contains("batch")) flat.batch = j.at("batch").get<std::size_t>();
    if (j.contains("steps")) flat.steps = j.at("steps").get<std::size_t>();
    if (j.contains("eval-every")) flat.eval_every = j.at("eval-every").get<std::size_t>();
    if (j.contains("eval-episodes"))
      flat.eval_episodes = j.at("eval-episodes").get<std::size_t>();
    if (j.contains("epsilon")) flat.epsilon = j.at("epsilon").get<double>();
    if (j.contains("updates-per-step"))
      flat.updates_per_step = j.at("updates-per-step").get<std::size_t>();
    if (j.contains("record-every"))
      flat.record_every = j.at("record-every").get<std::size_t>();
    if (j.contains("tau")) flat.tau = j.at("tau").get<double>();
    if (j.contains("transport")) flat.transport = j.at("transport").get<std::string>();
    if (j.contains("adam")) flat.adam = j.at("adam").get<std::string>();
    if (j.contains("reg-grad")) flat.reg_grad = j.at("reg-grad").get<std::string>();
    if (j.contains("seed")) {
      flat.seed = j.at("seed").get<std::uint64_t>();
      has_seed = true;
    }
    if (j.contains("seeds")) {
      flat.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
      has_seeds = true;
    }
    if (j.contains("sweep-rho"))
      flat.sweep_rho = j.at("sweep-rho").get<std::vector<double>>();
    if (j.contains("sweep-k"))
      flat.sweep_k = j.at("sweep-k").get<std::vector<std::size_t>>();
    if (j.contains("out")) flat.out = j.at("out").get<std::string>();
    if (j.contains("jobs")) flat.jobs = j.at("jobs").get<std::size_t>();
  } catch (const json::exception& e) {
    return std::string("bad config value: ") + e.what();
  }
  return std::nullopt;
}

// The config file has to be loaded before CLI11 runs so that flags override
// it, so the --config argument is fished out of argv by hand.
std::optional<std::string> find_config_path(int argc, const char* const* argv) {
  std::optional<std::string> path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      path = arg.substr(9);
  }
  return path;
}

ParseOutcome usage_error(std::string why) {
  ParseOutcome out;
  out.status = 2;
  out.message = std::move(why) + "\nrun with --help for usage";
  return out;
}

}  // namespace

ParseOutcome parse_cli(int argc, const char* const* argv) {
  Flat flat;
  bool cfg_has_seed = false;
  bool cfg_has_seeds = false;

  if (auto cfg_path = find_config_path(argc, argv)) {
    std::ifstream f(*cfg_path);
    if (!f) return usage_error("cannot read config file " + *cfg_path);
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      return usage_error("config file " + *cfg_path + ": " + e.what());
    }
    if (auto err = apply_config(j, flat, cfg_has_seed, cfg_has_seeds))
      return usage_error(*cfg_path + ": " + *err);
  }

  CLI::App app{"Sparse GMM Q-function training harness"};
  std::string config_path;  // consumed above; declared so CLI11 accepts it
  bool aggregate_only = false;
  const std::vector<std::string> two_way = {"standard", "paper-literal"};
  const std::vector<std::string> reg_modes = {"analytic", "paper-literal"};

  app.add_option("--env", flat.env, "environment name (cartpole | acrobot)");
  app.add_option("--K", flat.K, "mixture components");
  app.add_option("--J", flat.J, "Hadamard factors per weight matrix");
  app.add_option("--rho", flat.rho, "factor regularization coefficient");
  app.add_option("--alpha", flat.alpha, "discount factor");
  app.add_option("--lr", flat.lr, "learning rate");
  app.add_option("--beta1", flat.beta1, "first-moment decay");
  app.add_option("--beta2", flat.beta2, "second-moment decay");
  app.add_option("--buffer", flat.buffer, "replay buffer capacity");
  app.add_option("--batch", flat.batch, "minibatch size");
  app.add_option("--steps", flat.steps, "environment steps per run");
  app.add_option("--eval-every", flat.eval_every, "steps between greedy evaluations");
  app.add_option("--eval-episodes", flat.eval_episodes, "episodes per evaluation");
  app.add_option("--epsilon", flat.epsilon, "exploration rate");
  app.add_option("--updates-per-step", flat.updates_per_step,
                 "optimizer updates per environment step");
  app.add_option("--record-every", flat.record_every, "steps between CSV rows");
  app.add_option("--tau", flat.tau, "weight magnitude threshold for the nonzero fraction");
  app.add_option("--transport", flat.transport, "momentum transport (standard | paper-literal)")
      ->check(CLI::IsMember(two_way));
  app.add_option("--adam", flat.adam, "second-moment update rule (standard | paper-literal)")
      ->check(CLI::IsMember(two_way));
  app.add_option("--reg-grad", flat.reg_grad,
                 "regularizer gradient (analytic | paper-literal)")
      ->check(CLI::IsMember(reg_modes));
  auto* seed_opt = app.add_option("--seed", flat.seed, "single run seed");
  auto* seeds_opt =
      app.add_option("--seeds", flat.seeds, "comma-separated seeds, one run each")
          ->delimiter(',');
  app.add_option("--sweep-rho", flat.sweep_rho, "comma-separated rho values to sweep")
      ->delimiter(',');
  app.add_option("--sweep-k", flat.sweep_k, "comma-separated K values to sweep")
      ->delimiter(',');
  app.add_option("--out", flat.out, "output directory");
  app.add_option("--jobs", flat.jobs, "concurrent runs");
  app.add_option("--config", config_path, "JSON config file; flags override it");
  app.add_flag("--aggregate-only", aggregate_only,
               "recompute aggregates and summary from existing run CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    ParseOutcome out;
    out.help = true;
    out.message = app.help();
    return out;
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }

  ParseOutcome out;
  out.aggregate_only = aggregate_only;

  const auto transport = transport_of(flat.transport);
  if (!transport) return usage_error("bad transport \"" + flat.transport + "\"");
  const auto adam = adam_of(flat.adam);
  if (!adam) return usage_error("bad adam \"" + flat.adam + "\"");
  const auto reg = reg_of(flat.reg_grad);
  if (!reg) return usage_error("bad reg-grad \"" + flat.reg_grad + "\"");
  if (!flat.sweep_rho.empty() && !flat.sweep_k.empty())
    return usage_error("--sweep-rho and --sweep-k are mutually exclusive");
  if (flat.env.empty() && !aggregate_only) return usage_error("--env is required");

  ExperimentPlan& plan = out.plan;
  plan.env = flat.env;
  plan.out_dir = flat.out;
  plan.jobs = flat.jobs;
  plan.base.model.K = flat.K;
  plan.base.model.J = flat.J;
  plan.base.loss.rho = flat.rho;
  plan.base.loss.alpha = flat.alpha;
  plan.base.optim.learning_rate = flat.lr;
  plan.base.optim.beta1 = flat.beta1;
  plan.base.optim.beta2 = flat.beta2;
  plan.base.optim.variant = *adam;
  plan.base.optim.transport_mode = *transport;
  plan.base.reg_grad = *reg;
  plan.base.buffer_capacity = flat.buffer;
  plan.base.batch_size = flat.batch;
  plan.base.total_steps = flat.steps;
  plan.base.eval_every = flat.eval_every;
  plan.base.eval_episodes = flat.eval_episodes;
  plan.base.updates_per_step = flat.updates_per_step;
  plan.base.record_every = flat.record_every;
  plan.base.epsilon_explore = flat.epsilon;
  plan.base.sparsity_tau = flat.tau;

  if (seeds_opt->count() > 0)
    plan.seeds = flat.seeds;
  else if (seed_opt->count() > 0)
    plan.seeds = {flat.seed};
  else if (cfg_has_seeds)
    plan.seeds = flat.seeds;
  else if (cfg_has_seed)
    plan.seeds = {flat.seed};
  else
    plan.seeds = {0};

  if (!flat.sweep_rho.empty()) {
    plan.axis = SweepAxis::Rho;
    plan.sweep_values = flat.sweep_rho;
  } else if (!flat.sweep_k.empty()) {
    plan.axis = SweepAxis::K;
    plan.sweep_values.assign(flat.sweep_k.begin(), flat.sweep_k.end());
  }
  return out;
}

}  // namespace sgmmq::cli
