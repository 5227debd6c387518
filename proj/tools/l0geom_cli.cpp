// Command-line front end: solve, spans, constants, estimate, validate.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "l0geom/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Geometry of exact sparse approximation: solver, constants and Monte Carlo checks"};
  app.require_subcommand(1);

  std::string config_path;
  l0geom::RunFlags flags;
  double tau = 0.0;
  int k = 0;
  unsigned threads = 1;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--tau", tau, "fidelity threshold; replaces tau and tau_grid");
    sub->add_option("--output", flags.output, "write the report here instead of stdout");
    sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--k", k, "restrict to one K");
    sub->add_option("--mode", flags.mode, "leq or eq")->check(CLI::IsMember({"leq", "eq"}));
    sub->add_option("--threads", threads, "worker threads (results do not depend on it)");
    sub->add_option("--seed", seed, "random seed");
  };

  auto* solve = app.add_subcommand("solve", "solve one instance exactly");
  add_common(solve);
  solve->add_option("--data", flags.data, "datum as comma-separated coordinates")->required();

  auto* spans = app.add_subcommand("spans", "list the span family and its intersecting pairs");
  add_common(spans);
  spans->add_option("--k", k, "span dimension");

  auto* constants = app.add_subcommand("constants", "volume and validity constants per K");
  add_common(constants);
  constants->add_option("--k", k, "restrict to one K");
  constants->add_option("--threads", threads, "worker threads");
  constants->add_option("--seed", seed, "random seed");

  auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimates of val-level probabilities");
  add_common(estimate);
  add_sampling(estimate);

  auto* validate = app.add_subcommand("validate", "check estimates against the analytic bounds");
  add_common(validate);
  add_sampling(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : l0geom::kExitError;
  }

  CLI::App* active = app.get_subcommands().front();
  if (active->count("--tau")) flags.tau = tau;
  if (active->get_option_no_throw("--k") && active->count("--k")) flags.k = k;
  if (active->get_option_no_throw("--threads") && active->count("--threads")) flags.threads = threads;
  if (active->get_option_no_throw("--seed") && active->count("--seed")) flags.seed = seed;

  l0geom::ExperimentConfig config;
  try {
    config = l0geom::load_config(config_path);
    l0geom::apply_env_overrides(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return l0geom::kExitError;
  }
  return l0geom::run(active->get_name(), std::move(config), flags);
}
