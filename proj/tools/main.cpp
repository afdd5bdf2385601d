#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "kmlocal/error.hpp"

namespace app = kmlocal::app;

int main(int argc, char** argv) {
  CLI::App cli{"Kramers-Moyal coefficient estimation with local statistical moments"};
  cli.set_version_flag("--version", std::string(app::version()));
  cli.require_subcommand(1);
  cli.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> method;
  cli.add_option("--config", config_path, "JSON run configuration");
  cli.add_option("--preset", preset, "built-in experiment")
      ->check(CLI::IsMember(app::preset_names()));
  cli.add_option("--seed", seed, "random seed (overrides the config)");
  cli.add_option("--out", out, "output directory (overrides the config)");
  cli.add_option("--method", method, "estimator (overrides the config)")
      ->check(CLI::IsMember({"np", "global", "local"}));

  auto* simulate = cli.add_subcommand("simulate", "simulate or ingest the source and write series.csv");
  auto* estimate = cli.add_subcommand("estimate", "estimate coefficients, write coefficients.csv");
  auto* powercurve = cli.add_subcommand("powercurve", "fixed-point heat map, write heatmap.csv");
  auto* metrics = cli.add_subcommand("metrics", "drift error against a built-in truth");

  CLI11_PARSE(cli, argc, argv);

  try {
    auto config = app::resolve_config(preset, config_path);
    if (seed) config.seed = *seed;
    if (out) config.out = *out;
    if (method) config.method = app::parse_method(*method);
    app::validate(config);

    if (simulate->parsed()) app::cmd_simulate(config, std::cerr);
    if (estimate->parsed()) app::cmd_estimate(config, std::cerr);
    if (powercurve->parsed()) app::cmd_powercurve(config, std::cerr);
    if (metrics->parsed()) app::cmd_metrics(config, std::cerr);
  } catch (const app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
