// Runs one experiment spec and writes its CSV plus sidecar JSON.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ehaoi/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Energy-harvesting random access AoI experiments"};
  std::string spec_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
  app.add_option("--spec", spec_path, "experiment spec (JSON)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "simulation seed, overrides the spec");
  app.add_option("--threads", threads, "worker threads, overrides the spec");
  app.add_flag("--quiet", quiet, "suppress progress output");
  app.set_version_flag("--version", EHAOI_VERSION);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "bad-config: " << e.what() << "\n";
    return 2;
  }

  ehaoi::RunOptions opts;
  opts.out_dir = out_dir;
  opts.seed = seed;
  opts.threads = threads;
  opts.quiet = quiet;
  try {
    ehaoi::run_experiment_file(spec_path, opts);
  } catch (const ehaoi::Error& e) {
    std::cerr << ehaoi::error_category(e.kind()) << ": " << e.what() << "\n";
    return ehaoi::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "bad-config: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
