#include "pareig/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Periodic parabolic eigenvalue toolkit"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  for (const char* name : {"solve", "optimize", "sweep", "gaussian-check"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);

  pareig::json overrides = pareig::json::object();
  if (seed) overrides["seed"] = *seed;
  if (threads) overrides["threads"] = *threads;
  const std::string command = app.get_subcommands().front()->get_name();
  return pareig::cli::run_command(command, config, out, overrides, std::cerr);
}
