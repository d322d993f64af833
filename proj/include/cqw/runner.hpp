#pragma once

// Batch front-end behind the cqw executable.

#include <iosfwd>
#include <string>

#include "cqw/config.hpp"

namespace cqw {

enum ExitCode : int { kExitOk = 0, kExitOther = 1, kExitConfig = 2, kExitCoin = 3, kExitOracle = 4 };

struct RunnerOptions {
  /// Overrides output.directory when non-empty.
  std::string out_dir;
  bool quiet = false;
};

/// Verbs: compile, run, study, oracle, dispersion. Each writes its files into
/// the output directory and returns normally; errors propagate as exceptions.
void run_compile(const RunConfig& config, const std::string& dir, std::ostream& log);
void run_walk(const RunConfig& config, const std::string& dir, std::ostream& log);
void run_study(const RunConfig& config, const std::string& dir, std::ostream& log);
void run_oracle(const RunConfig& config, const std::string& dir, std::ostream& log);
void run_dispersion(const RunConfig& config, const std::string& dir, std::ostream& log);

/// Loads the config, dispatches the verb and maps exceptions to exit codes,
/// printing the error message to `err`.
int execute(const std::string& verb, const std::string& config_path, const RunnerOptions& options, std::ostream& out,
            std::ostream& err);

/// Same, from already-loaded JSON text.
int execute_text(const std::string& verb, const std::string& config_text, const RunnerOptions& options,
                 std::ostream& out, std::ostream& err);

}  // namespace cqw
