#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace transagent::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kModel = 4,
  kRemote = 5,
};

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Runs one command. `args` excludes the program name, e.g.
/// {"route", "--input", "to:fr hello", "--mock", "script.json"}.
/// Live chat settings come from TRANSAGENT_LLM_ENDPOINT, TRANSAGENT_LLM_MODEL,
/// TRANSAGENT_LLM_TIMEOUT (seconds) and the token in TRANSAGENT_LLM_TOKEN.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace transagent::cli
