#include <cstdlib>
#include <iostream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "cqw/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dirac quantum walks on curved 2+1 spacetimes"};
  app.require_subcommand(1, 1);

  std::string config;
  cqw::RunnerOptions options;
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (default: all)")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", options.quiet, "Suppress progress output");

  for (const char* verb : {"compile", "run", "study", "oracle", "dispersion"}) {
    auto* sub = app.add_subcommand(verb);
    sub->add_option("--config", config, "Run configuration (JSON)")->required();
    sub->add_option("--out", options.out_dir, "Output directory (overrides output.directory)");
    sub->add_option("--threads", threads, "OpenMP threads (default: all)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", options.quiet, "Suppress progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cqw::kExitConfig;
  }

  if (const char* env = std::getenv("CQW_THREADS")) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "config error: CQW_THREADS must be an integer\n";
      return cqw::kExitConfig;
    }
  }
  if (threads > 0) omp_set_num_threads(threads);

  const std::string verb = app.get_subcommands().front()->get_name();
  return cqw::execute(verb, config, options, std::cout, std::cerr);
}
