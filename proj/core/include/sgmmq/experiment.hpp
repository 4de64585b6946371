#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgmmq/agent.hpp"

namespace sgmmq {

enum class SweepAxis { None, Rho, K };

struct ExperimentPlan {
  AgentConfig base;
  std::string env;
  SweepAxis axis = SweepAxis::None;
  std::vector<double> sweep_values;  // rho values, or integral K values
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "out";
  std::size_t jobs = 1;
};

// "run" when there is no sweep, otherwise "rho<value>" or "K<value>".
std::string sweep_tag(const ExperimentPlan& plan, std::size_t value_index);

// Effective config for one run: sweep value applied, per-run seed set.
AgentConfig config_for(const ExperimentPlan& plan, std::size_t value_index, std::uint64_t seed);

struct RunOutcome {
  std::size_t value_index = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  bool ever_evaluated = false;
  double best_eval = 0.0;
  double final_nonzero_frac = 1.0;
};

struct PlanOutcome {
  std::vector<RunOutcome> runs;  // one per (sweep value, seed), value-major
  bool any_diverged = false;
};

// Validates the plan, writes plan.json, executes every (sweep value, seed)
// run with up to plan.jobs running at once, writes one CSV plus best/final
// checkpoints per run, then aggregates. Aggregate CSVs and summary.json are
// recomputed purely from the run CSVs on disk, so aggregate_outputs alone
// reproduces them byte for byte.
PlanOutcome run_plan(const ExperimentPlan& plan);

// The aggregation post-pass: one aggregate CSV per sweep value (per-step
// mean and sample std across seeds) plus summary.json pairing each run's
// best evaluation return with its final nonzero fraction.
void aggregate_outputs(const ExperimentPlan& plan);

// Reload the plan stored by run_plan, for aggregate-only reruns.
ExperimentPlan load_plan(const std::string& out_dir);

struct CsvRun {
  std::vector<TrainRecord> records;
  bool diverged = false;
};

// Run CSV format: "# key=value" metadata lines carrying the effective
// config and build hash, a header row, then one row per record with the
// eval columns left empty on non-evaluation rows.
void write_run_csv(const std::string& path, const ExperimentPlan& plan, std::size_t value_index,
                   std::uint64_t seed, bool diverged, const std::vector<TrainRecord>& records);
CsvRun read_run_csv(const std::string& path);

}  // namespace sgmmq
