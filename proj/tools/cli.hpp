#pragma once

#include <string>

#include "sgmmq/experiment.hpp"

namespace sgmmq::cli {

// Result of argv parsing. status 0 means the plan is ready to execute (or
// help was requested); status 2 is a usage error with the reason in message.
struct ParseOutcome {
  int status = 0;
  bool help = false;
  bool aggregate_only = false;
  ExperimentPlan plan;
  std::string message;  // help text when help, error text when status != 0
};

// Precedence: built-in defaults < --config JSON < explicit flags. Seed
// selection: --seeds beats --seed beats config "seeds" beats config "seed".
ParseOutcome parse_cli(int argc, const char* const* argv);

}  // namespace sgmmq::cli
