#include <iostream>

#include <CLI11.hpp>

#include "stochavg/cli.hpp"

namespace cli = stochavg::cli;

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-approximation averaging over random digraph flows"};
  app.set_version_flag("--version", cli::kVersion);
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  std::string sweep;
  cli::Overrides o;

  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config, "JSON config")->required(); };
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--trials", o.trials, "ensemble size M");
    sub->add_option("--horizon", o.horizon, "steps K");
    sub->add_option("--stride", o.stride, "record every S steps");
    sub->add_flag("--full-state", o.full_state, "write every agent's state");
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* check = app.add_subcommand("check", "certify the hypotheses of each theorem");
  add_config(check);
  auto* bound = app.add_subcommand("bound", "evaluate the variance bounds");
  add_config(bound);
  bound->add_option("--out", out_dir, "output directory");
  auto* simulate = app.add_subcommand("simulate", "run a Monte-Carlo ensemble");
  add_config(simulate);
  add_run_flags(simulate);
  auto* sweep_cmd = app.add_subcommand("sweep", "repeat the ensemble over a parameter grid");
  add_config(sweep_cmd);
  add_run_flags(sweep_cmd);
  sweep_cmd->add_option("--sweep", sweep, "param=v1,v2,... with param in n, sigma, b, gamma, a")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kConfigError;
  }

  if (*check) return cli::cmd_check(config, std::cout, std::cerr);
  if (*bound) return cli::cmd_bound(config, out_dir, std::cout, std::cerr);
  if (*simulate) return cli::cmd_simulate(config, o, out_dir, std::cout, std::cerr);
  return cli::cmd_sweep(config, o, sweep, out_dir, std::cout, std::cerr);
}
