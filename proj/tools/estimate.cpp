#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "reflest/config.hpp"
#include "reflest/experiments.hpp"
#include "reflest/tableio.hpp"

// Exit codes: 0 ok, 1 numeric-check or invariant failure, 2 config error,
// 3 io error.
int main(int argc, char** argv) {
  CLI::App app{"deterministic sequential estimation for reflected dynamics"};
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  bool verbose = false;
  app.add_option("config", config_path, "experiment config file")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--threads", threads, "worker threads for independent ladder members")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "echo the run log to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    reflest::config::Node root = reflest::config::parse_file(config_path);
    if (*seed_opt) {
      root.values["seed"] = std::to_string(seed);
      root.value_lines["seed"] = 0;
    }
    if (*out_opt) {
      root.values["out"] = out_dir;
      root.value_lines["out"] = 0;
    }
    const auto cfg = reflest::config::load(root);
    return reflest::experiments::run(cfg, threads, verbose);
  } catch (const reflest::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const reflest::tableio::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
