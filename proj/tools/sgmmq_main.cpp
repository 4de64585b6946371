#include <cstdio>
#include <exception>
#include <iostream>

#include "cli.hpp"
#include "sgmmq/errors.hpp"
#include "sgmmq/experiment.hpp"

namespace {

void print_outcomes(const sgmmq::ExperimentPlan& plan, const sgmmq::PlanOutcome& res) {
  for (const auto& run : res.runs) {
    std::printf("%s seed %llu: ", sgmmq::sweep_tag(plan, run.value_index).c_str(),
                static_cast<unsigned long long>(run.seed));
    if (run.ever_evaluated)
      std::printf("best_eval %.6g, final nonzero %.4f", run.best_eval,
                  run.final_nonzero_frac);
    else
      std::printf("no evaluation recorded");
    std::printf("%s\n", run.diverged ? " [DIVERGED]" : "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const auto parsed = sgmmq::cli::parse_cli(argc, argv);
  if (parsed.help) {
    std::cout << parsed.message;
    return 0;
  }
  if (parsed.status != 0) {
    std::cerr << parsed.message << "\n";
    return parsed.status;
  }

  try {
    if (parsed.aggregate_only) {
      const sgmmq::ExperimentPlan plan = sgmmq::load_plan(parsed.plan.out_dir);
      sgmmq::aggregate_outputs(plan);
      std::printf("rebuilt aggregates in %s\n", plan.out_dir.c_str());
      return 0;
    }
    const sgmmq::PlanOutcome res = sgmmq::run_plan(parsed.plan);
    print_outcomes(parsed.plan, res);
    std::printf("wrote %s/summary.json\n", parsed.plan.out_dir.c_str());
    if (res.any_diverged) {
      std::fprintf(stderr, "at least one run diverged\n");
      return 3;
    }
    return 0;
  } catch (const sgmmq::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sgmmq::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
