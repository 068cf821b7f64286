#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "seob/commands.hpp"

namespace {

void add_common(CLI::App* cmd, seob::CommandOptions& opt, bool needs_config) {
  auto* c = cmd->add_option("--config", opt.config, "experiment config (JSON)");
  if (needs_config) c->required();
  cmd->add_option("--out", opt.out, "output directory (overrides the config)");
  cmd->add_option("--seed", opt.seed, "random seed (overrides the config)");
  cmd->add_flag("--dry-run", opt.dry_run, "print the resolved plan and exit");
  cmd->add_flag("--quiet", opt.quiet, "suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical equilibria of optimistic beliefs: simulate, solve, check, verify"};
  app.require_subcommand(1);
  seob::CommandOptions opt;

  auto* simulate = app.add_subcommand("simulate", "run the repeated game and write trace.csv and summary.json");
  add_common(simulate, opt, true);
  simulate->add_option("--downsample", opt.downsample, "record every k-th round")->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "solve the smooth game and write equilibrium.json");
  add_common(solve, opt, true);

  auto* check = app.add_subcommand("check", "run the stability checks and write stability.json");
  add_common(check, opt, true);

  auto* verify = app.add_subcommand("verify", "run the oracle suite and print a manifest");
  add_common(verify, opt, false);
  verify->add_option("--scope", opt.scope, "all or one of the oracle scopes");
  verify->add_option("--fixtures", opt.fixtures, "fixture file with frozen values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : seob::kExitError;
  }

  if (simulate->parsed()) return seob::cmd_simulate(opt);
  if (solve->parsed()) return seob::cmd_solve(opt);
  if (check->parsed()) return seob::cmd_check(opt);
  return seob::cmd_verify(opt);
}
