#include "sweep/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"sweepctl: simulation, optimal control and certificate checks for controlled sweeping processes"};
  app.require_subcommand(1, 1);
  app.footer(sweep::cli::config_help());

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "catch-up and penalty simulation of a fixed control"},
      {"solve", "transcribe and solve the optimal control problem"},
      {"certify", "extract and verify multipliers from a solve output directory"},
      {"converge", "penalty-versus-catch-up convergence study"},
      {"check", "assumption, derivative and regularity checks"}};
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sweep::cli::kConfigError;
  }

  const auto* sub = app.get_subcommands().front();
  std::optional<std::string> out_dir;
  if (sub->count("--out")) out_dir = out;
  std::optional<std::uint64_t> seed_override;
  if (sub->count("--seed")) seed_override = seed;
  return sweep::cli::run(sub->get_name(), config, out_dir, seed_override, std::cout, std::cerr);
}
