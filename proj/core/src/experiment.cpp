#include "sgmmq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <utility>

#include <json.hpp>

#include "sgmmq/build_info.hpp"
#include "sgmmq/env.hpp"
#include "sgmmq/errors.hpp"
#include "sgmmq/model.hpp"

namespace sgmmq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Shortest round-trip decimal form; parsing it back recovers the exact bits.
std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& path) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ContractViolation(path + ": malformed number '" + std::string(s) + "'");
  return v;
}

std::size_t parse_size(std::string_view s, const std::string& path) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ContractViolation(path + ": malformed count '" + std::string(s) + "'");
  return v;
}

const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Rho:
      return "rho";
    case SweepAxis::K:
      return "K";
    case SweepAxis::None:
      break;
  }
  return "none";
}

const char* transport_name(TransportMode m) {
  return m == TransportMode::Standard ? "standard" : "paper-literal";
}

const char* adam_name(AdamVariant v) {
  return v == AdamVariant::Standard ? "standard" : "paper-literal";
}

const char* reg_name(RegGradMode m) {
  return m == RegGradMode::Analytic ? "analytic" : "paper-literal";
}

TransportMode transport_from(const std::string& s, const std::string& where) {
  if (s == "standard") return TransportMode::Standard;
  if (s == "paper-literal") return TransportMode::PaperLiteral;
  throw ContractViolation(where + ": unknown transport '" + s + "'");
}

AdamVariant adam_from(const std::string& s, const std::string& where) {
  if (s == "standard") return AdamVariant::Standard;
  if (s == "paper-literal") return AdamVariant::PaperLiteral;
  throw ContractViolation(where + ": unknown adam variant '" + s + "'");
}

RegGradMode reg_from(const std::string& s, const std::string& where) {
  if (s == "analytic") return RegGradMode::Analytic;
  if (s == "paper-literal") return RegGradMode::PaperLiteral;
  throw ContractViolation(where + ": unknown reg-grad mode '" + s + "'");
}

std::size_t value_count(const ExperimentPlan& plan) {
  return plan.axis == SweepAxis::None ? 1 : plan.sweep_values.size();
}

// Flat config echo for one concrete run; keys mirror the CLI flag names.
json effective_config(const ExperimentPlan& plan, std::size_t vi, std::uint64_t seed) {
  const AgentConfig cfg = config_for(plan, vi, seed);
  json j;
  j["env"] = plan.env;
  j["K"] = cfg.model.K;
  j["J"] = cfg.model.J;
  j["rho"] = cfg.loss.rho;
  j["alpha"] = cfg.loss.alpha;
  j["lr"] = cfg.optim.learning_rate;
  j["beta1"] = cfg.optim.beta1;
  j["beta2"] = cfg.optim.beta2;
  j["buffer"] = cfg.buffer_capacity;
  j["batch"] = cfg.batch_size;
  j["steps"] = cfg.total_steps;
  j["eval-every"] = cfg.eval_every;
  j["eval-episodes"] = cfg.eval_episodes;
  j["epsilon"] = cfg.epsilon_explore;
  j["updates-per-step"] = cfg.updates_per_step;
  j["record-every"] = cfg.record_every;
  j["tau"] = cfg.sparsity_tau;
  j["transport"] = transport_name(cfg.optim.transport_mode);
  j["adam"] = adam_name(cfg.optim.variant);
  j["reg-grad"] = reg_name(cfg.reg_grad);
  j["seed"] = seed;
  j["build"] = kBuildHash;
  return j;
}

void write_meta_lines(std::ofstream& f, const json& meta) {
  for (auto it = meta.begin(); it != meta.end(); ++it) {
    f << "# " << it.key() << "=";
    if (it.value().is_string())
      f << it.value().get<std::string>();
    else
      f << it.value().dump();
    f << "\n";
  }
}

std::string run_stem(const ExperimentPlan& plan, std::size_t vi, std::uint64_t seed) {
  return (fs::path(plan.out_dir) /
          (sweep_tag(plan, vi) + "_seed" + std::to_string(seed)))
      .string();
}

void validate_plan(const ExperimentPlan& plan) {
  if (plan.env.empty()) throw ContractViolation("plan: env is required");
  make_environment(plan.env);  // rejects unknown names
  if (plan.seeds.empty()) throw ContractViolation("plan: at least one seed is required");
  if (std::set<std::uint64_t>(plan.seeds.begin(), plan.seeds.end()).size() != plan.seeds.size())
    throw ContractViolation("plan: duplicate seeds");
  if (plan.jobs == 0) throw ContractViolation("plan: jobs must be positive");
  if (plan.axis == SweepAxis::None && !plan.sweep_values.empty())
    throw ContractViolation("plan: sweep values given without a sweep axis");
  if (plan.axis != SweepAxis::None) {
    if (plan.sweep_values.empty()) throw ContractViolation("plan: sweep axis without values");
    if (std::set<double>(plan.sweep_values.begin(), plan.sweep_values.end()).size() !=
        plan.sweep_values.size())
      throw ContractViolation("plan: duplicate sweep values");
    for (double v : plan.sweep_values) {
      if (plan.axis == SweepAxis::Rho && !(v >= 0.0))
        throw ContractViolation("plan: rho values must be >= 0");
      if (plan.axis == SweepAxis::K && (!(v >= 1.0) || v != std::floor(v)))
        throw ContractViolation("plan: K values must be positive integers");
    }
  }
  if (plan.base.model.K == 0 || plan.base.model.J == 0)
    throw ContractViolation("plan: K and J must be positive");
  if (!(plan.base.loss.rho >= 0.0)) throw ContractViolation("plan: rho must be >= 0");
  if (!(plan.base.loss.alpha >= 0.0 && plan.base.loss.alpha <= 1.0))
    throw ContractViolation("plan: alpha must be in [0, 1]");
  const RAdamConfig& o = plan.base.optim;
  if (!(o.learning_rate > 0.0) || !std::isfinite(o.learning_rate))
    throw ContractViolation("plan: learning rate must be positive and finite");
  if (!(o.beta1 >= 0.0 && o.beta1 < 1.0) || !(o.beta2 >= 0.0 && o.beta2 < 1.0))
    throw ContractViolation("plan: betas must be in [0, 1)");
  if (plan.base.buffer_capacity == 0 || plan.base.batch_size == 0 || plan.base.eval_every == 0 ||
      plan.base.eval_episodes == 0 || plan.base.updates_per_step == 0 ||
      plan.base.record_every == 0)
    throw ContractViolation("plan: counts must be positive");
  if (!(plan.base.epsilon_explore >= 0.0 && plan.base.epsilon_explore <= 1.0))
    throw ContractViolation("plan: epsilon must be in [0, 1]");
  if (!(plan.base.sparsity_tau >= 0.0)) throw ContractViolation("plan: tau must be >= 0");
}

json plan_to_json(const ExperimentPlan& plan) {
  json j;
  j["env"] = plan.env;
  j["K"] = plan.base.model.K;
  j["J"] = plan.base.model.J;
  j["rho"] = plan.base.loss.rho;
  j["alpha"] = plan.base.loss.alpha;
  j["lr"] = plan.base.optim.learning_rate;
  j["beta1"] = plan.base.optim.beta1;
  j["beta2"] = plan.base.optim.beta2;
  j["buffer"] = plan.base.buffer_capacity;
  j["batch"] = plan.base.batch_size;
  j["steps"] = plan.base.total_steps;
  j["eval-every"] = plan.base.eval_every;
  j["eval-episodes"] = plan.base.eval_episodes;
  j["epsilon"] = plan.base.epsilon_explore;
  j["updates-per-step"] = plan.base.updates_per_step;
  j["record-every"] = plan.base.record_every;
  j["tau"] = plan.base.sparsity_tau;
  j["transport"] = transport_name(plan.base.optim.transport_mode);
  j["adam"] = adam_name(plan.base.optim.variant);
  j["reg-grad"] = reg_name(plan.base.reg_grad);
  j["seeds"] = plan.seeds;
  j["jobs"] = plan.jobs;
  if (plan.axis == SweepAxis::Rho) j["sweep-rho"] = plan.sweep_values;
  if (plan.axis == SweepAxis::K) {
    std::vector<std::size_t> ks;
    for (double v : plan.sweep_values) ks.push_back(static_cast<std::size_t>(v));
    j["sweep-k"] = ks;
  }
  j["build"] = kBuildHash;
  return j;
}

double mean_of(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double v = 0.0;
  for (double x : xs) v += (x - mean) * (x - mean);
  return std::sqrt(v / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::string sweep_tag(const ExperimentPlan& plan, std::size_t value_index) {
  switch (plan.axis) {
    case SweepAxis::None:
      return "run";
    case SweepAxis::Rho:
      return "rho" + fmt(plan.sweep_values.at(value_index));
    case SweepAxis::K:
      return "K" + std::to_string(static_cast<std::size_t>(plan.sweep_values.at(value_index)));
  }
  return "run";
}

AgentConfig config_for(const ExperimentPlan& plan, std::size_t value_index, std::uint64_t seed) {
  AgentConfig cfg = plan.base;
  cfg.seed = seed;
  if (plan.axis == SweepAxis::Rho) cfg.loss.rho = plan.sweep_values.at(value_index);
  if (plan.axis == SweepAxis::K)
    cfg.model.K = static_cast<std::size_t>(plan.sweep_values.at(value_index));
  return cfg;
}

void write_run_csv(const std::string& path, const ExperimentPlan& plan, std::size_t value_index,
                   std::uint64_t seed, bool diverged, const std::vector<TrainRecord>& records) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  json meta = effective_config(plan, value_index, seed);
  meta["diverged"] = diverged ? 1 : 0;
  write_meta_lines(f, meta);
  f << "step,loss,eval_mean,eval_std,nonzero_frac,wall_ms\n";
  for (const TrainRecord& r : records) {
    f << r.step << ',' << fmt(r.loss) << ',';
    if (r.evaluated) f << fmt(r.eval_mean);
    f << ',';
    if (r.evaluated) f << fmt(r.eval_std);
    f << ',' << fmt(r.nonzero_frac) << ',' << fmt(r.wall_ms) << '\n';
  }
  if (!f.good()) throw IoError("write failed for " + path);
}

CsvRun read_run_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  CsvRun out;
  std::string line;
  bool saw_header = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string_view v(line);
      if (v.substr(2, 9) == "diverged=") out.diverged = v.substr(11) == "1";
      continue;
    }
    if (!saw_header) {
      if (line != "step,loss,eval_mean,eval_std,nonzero_frac,wall_ms")
        throw ContractViolation(path + ": unexpected csv header '" + line + "'");
      saw_header = true;
      continue;
    }
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const std::size_t pos = rest.find(',');
      if (pos == std::string_view::npos) {
        cells.push_back(rest);
        break;
      }
      cells.push_back(rest.substr(0, pos));
      rest = rest.substr(pos + 1);
    }
    if (cells.size() != 6) throw ContractViolation(path + ": malformed row '" + line + "'");
    TrainRecord r;
    r.step = parse_size(cells[0], path);
    r.loss = parse_double(cells[1], path);
    r.evaluated = !cells[2].empty();
    if (r.evaluated != !cells[3].empty())
      throw ContractViolation(path + ": half-filled eval columns in '" + line + "'");
    if (r.evaluated) {
      r.eval_mean = parse_double(cells[2], path);
      r.eval_std = parse_double(cells[3], path);
    }
    r.nonzero_frac = parse_double(cells[4], path);
    r.wall_ms = parse_double(cells[5], path);
    out.records.push_back(r);
  }
  if (!saw_header) throw ContractViolation(path + ": missing csv header");
  return out;
}

PlanOutcome run_plan(const ExperimentPlan& plan) {
  validate_plan(plan);
  fs::create_directories(plan.out_dir);
  {
    const std::string path = (fs::path(plan.out_dir) / "plan.json").string();
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << plan_to_json(plan).dump(2) << "\n";
    if (!f.good()) throw IoError("write failed for " + path);
  }

  std::vector<std::pair<std::size_t, std::uint64_t>> tasks;
  for (std::size_t vi = 0; vi < value_count(plan); ++vi)
    for (std::uint64_t seed : plan.seeds) tasks.emplace_back(vi, seed);

  PlanOutcome out;
  out.runs.resize(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        const auto [vi, seed] = tasks[i];
        const TrainResult r = train(config_for(plan, vi, seed), plan.env);
        const std::string stem = run_stem(plan, vi, seed);
        write_run_csv(stem + ".csv", plan, vi, seed, r.diverged, r.records);
        save_checkpoint(r.best_point, stem + "_best.json");
        save_checkpoint(r.final_point, stem + "_final.json");
        RunOutcome& ro = out.runs[i];
        ro.value_index = vi;
        ro.seed = seed;
        ro.diverged = r.diverged;
        ro.ever_evaluated = r.ever_evaluated;
        ro.best_eval = r.best_eval;
        ro.final_nonzero_frac = r.records.empty() ? 1.0 : r.records.back().nonzero_frac;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::min(plan.jobs, tasks.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  for (const RunOutcome& ro : out.runs) out.any_diverged = out.any_diverged || ro.diverged;

  aggregate_outputs(plan);
  return out;
}

void aggregate_outputs(const ExperimentPlan& plan) {
  json summary;
  summary["build"] = kBuildHash;
  summary["env"] = plan.env;
  summary["axis"] = axis_name(plan.axis);
  summary["config"] = plan_to_json(plan);
  json sweeps = json::array();

  for (std::size_t vi = 0; vi < value_count(plan); ++vi) {
    const std::string tag = sweep_tag(plan, vi);
    std::vector<CsvRun> runs;
    for (std::uint64_t seed : plan.seeds) runs.push_back(read_run_csv(run_stem(plan, vi, seed) + ".csv"));

    // Rows are matched by step index; a step contributes only when every
    // seed recorded it (a diverged run stops early).
    const std::string agg_path = (fs::path(plan.out_dir) / (tag + "_aggregate.csv")).string();
    std::ofstream f(agg_path);
    if (!f) throw IoError("cannot write " + agg_path);
    json meta = effective_config(plan, vi, plan.seeds.front());
    meta.erase("seed");
    meta["seeds"] = plan.seeds;
    write_meta_lines(f, meta);
    f << "step,loss_mean,loss_std,eval_mean,eval_std,nonzero_frac_mean,nonzero_frac_std,"
         "wall_ms_mean,wall_ms_std\n";

    std::vector<std::size_t> cursor(runs.size(), 0);
    const std::vector<TrainRecord>& lead = runs.front().records;
    for (const TrainRecord& row : lead) {
      std::vector<const TrainRecord*> at;
      at.push_back(&row);
      bool everywhere = true;
      for (std::size_t s = 1; s < runs.size(); ++s) {
        std::size_t& c = cursor[s];
        const std::vector<TrainRecord>& rec = runs[s].records;
        while (c < rec.size() && rec[c].step < row.step) ++c;
        if (c == rec.size() || rec[c].step != row.step) {
          everywhere = false;
          break;
        }
        at.push_back(&rec[c]);
      }
      if (!everywhere) continue;
      std::vector<double> loss, nonzero, wall, eval;
      bool all_eval = true;
      for (const TrainRecord* r : at) {
        loss.push_back(r->loss);
        nonzero.push_back(r->nonzero_frac);
        wall.push_back(r->wall_ms);
        all_eval = all_eval && r->evaluated;
        if (r->evaluated) eval.push_back(r->eval_mean);
      }
      const double lm = mean_of(loss), nm = mean_of(nonzero), wm = mean_of(wall);
      f << row.step << ',' << fmt(lm) << ',' << fmt(sample_std(loss, lm)) << ',';
      if (all_eval) {
        const double em = mean_of(eval);
        f << fmt(em) << ',' << fmt(sample_std(eval, em));
      } else {
        f << ',';
      }
      f << ',' << fmt(nm) << ',' << fmt(sample_std(nonzero, nm)) << ',' << fmt(wm) << ','
        << fmt(sample_std(wall, wm)) << '\n';
    }
    if (!f.good()) throw IoError("write failed for " + agg_path);
    f.close();

    json sweep;
    sweep["tag"] = tag;
    if (plan.axis == SweepAxis::Rho) sweep["value"] = plan.sweep_values[vi];
    if (plan.axis == SweepAxis::K)
      sweep["value"] = static_cast<std::size_t>(plan.sweep_values[vi]);
    sweep["aggregate_csv"] = tag + "_aggregate.csv";
    json runsj = json::array();
    std::vector<double> bests, finals;
    for (std::size_t s = 0; s < plan.seeds.size(); ++s) {
      const CsvRun& run = runs[s];
      json rj;
      rj["seed"] = plan.seeds[s];
      const std::string base = tag + "_seed" + std::to_string(plan.seeds[s]);
      rj["csv"] = base + ".csv";
      rj["best_checkpoint"] = base + "_best.json";
      rj["final_checkpoint"] = base + "_final.json";
      rj["diverged"] = run.diverged;
      bool any_eval = false;
      double best = 0.0;
      for (const TrainRecord& r : run.records)
        if (r.evaluated && (!any_eval || r.eval_mean > best)) {
          best = r.eval_mean;
          any_eval = true;
        }
      if (any_eval) {
        rj["best_eval"] = best;
        bests.push_back(best);
      } else {
        rj["best_eval"] = nullptr;
      }
      if (!run.records.empty()) {
        rj["final_nonzero_frac"] = run.records.back().nonzero_frac;
        finals.push_back(run.records.back().nonzero_frac);
      } else {
        rj["final_nonzero_frac"] = nullptr;
      }
      runsj.push_back(rj);
    }
    sweep["runs"] = runsj;
    sweep["best_eval_mean"] = bests.empty() ? json(nullptr) : json(mean_of(bests));
    sweep["final_nonzero_frac_mean"] = finals.empty() ? json(nullptr) : json(mean_of(finals));
    sweeps.push_back(sweep);
  }

  summary["sweeps"] = sweeps;
  const std::string path = (fs::path(plan.out_dir) / "summary.json").string();
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << summary.dump(2) << "\n";
  if (!f.good()) throw IoError("write failed for " + path);
}

ExperimentPlan load_plan(const std::string& out_dir) {
  const std::string path = (fs::path(out_dir) / "plan.json").string();
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ContractViolation(path + ": " + e.what());
  }
  ExperimentPlan plan;
  plan.out_dir = out_dir;
  try {
    plan.env = j.at("env").get<std::string>();
    plan.base.model.K = j.at("K").get<std::size_t>();
    plan.base.model.J = j.at("J").get<std::size_t>();
    plan.base.loss.rho = j.at("rho").get<double>();
    plan.base.loss.alpha = j.at("alpha").get<double>();
    plan.base.optim.learning_rate = j.at("lr").get<double>();
    plan.base.optim.beta1 = j.at("beta1").get<double>();
    plan.base.optim.beta2 = j.at("beta2").get<double>();
    plan.base.buffer_capacity = j.at("buffer").get<std::size_t>();
    plan.base.batch_size = j.at("batch").get<std::size_t>();
    plan.base.total_steps = j.at("steps").get<std::size_t>();
    plan.base.eval_every = j.at("eval-every").get<std::size_t>();
    plan.base.eval_episodes = j.at("eval-episodes").get<std::size_t>();
    plan.base.epsilon_explore = j.at("epsilon").get<double>();
    plan.base.updates_per_step = j.at("updates-per-step").get<std::size_t>();
    plan.base.record_every = j.at("record-every").get<std::size_t>();
    plan.base.sparsity_tau = j.at("tau").get<double>();
    plan.base.optim.transport_mode =
        transport_from(j.at("transport").get<std::string>(), path);
    plan.base.optim.variant = adam_from(j.at("adam").get<std::string>(), path);
    plan.base.reg_grad = reg_from(j.at("reg-grad").get<std::string>(), path);
    plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    plan.jobs = j.at("jobs").get<std::size_t>();
    if (j.contains("sweep-rho")) {
      plan.axis = SweepAxis::Rho;
      plan.sweep_values = j.at("sweep-rho").get<std::vector<double>>();
    } else if (j.contains("sweep-k")) {
      plan.axis = SweepAxis::K;
      for (std::size_t k : j.at("sweep-k").get<std::vector<std::size_t>>())
        plan.sweep_values.push_back(static_cast<double>(k));
    }
  } catch (const json::exception& e) {
    throw ContractViolation(path + ": " + e.what());
  }
  return plan;
}

}  // namespace sgmmq
