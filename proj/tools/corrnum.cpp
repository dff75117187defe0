#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "corrnum/config.hpp"
#include "corrnum/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace corrnum;
  CLI::App app{"Correlation numbers of surface-group representations"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> threads, n_max, rank;
  std::optional<std::uint64_t> seed;
  bool force = false, print_schema = false;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
  app.add_option("--seed", seed, "seed for sampled validations");
  app.add_flag("--force", force, "compute even when pilot validation fails");
  app.add_option("--n-max", n_max, "maximal word length")->check(CLI::Range(1, 40));
  app.add_option("--rank", rank, "free group rank")->check(CLI::Range(2, 8));
  app.add_flag("--schema", print_schema, "print the config schema and exit");

  using Command = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"enumerate", "class counts per length against the trace/necklace oracle", cmd_enumerate},
      {"spectrum", "joint length spectrum (cached by parameter hash)", cmd_spectrum},
      {"entropy", "growth rate of every column", cmd_entropy},
      {"manhattan", "Manhattan curve of the configured pair", cmd_manhattan},
      {"correlate", "correlation number by tangent, mins and count fit", cmd_correlate},
      {"demo", "pinching sequence", cmd_demo},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (print_schema) {
    std::cout << config_schema().dump(2) << "\n";
    return 0;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (out) config.out = *out;
    if (threads) config.threads = *threads;
    if (seed) config.seed = *seed;
    if (force) config.force = true;
    if (n_max) config.n_max = *n_max;
    if (rank) config.rank = *rank;
    for (const auto& [name, help, fn] : commands) {
      if (app.got_subcommand(name)) return fn(config, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
