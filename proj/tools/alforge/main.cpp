#include <exception>
#include <iostream>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "alforge/error.hpp"
#include "alforge/version.hpp"
#include "commands.hpp"

namespace {

const CLI::Validator kPositiveInt(
    [](std::string& v) -> std::string {
      if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos || v.find_first_not_of('0') == std::string::npos) {
        return "must be a positive integer, got '" + v + "'";
      }
      return {};
    },
    "POSITIVE");

void add_sources(CLI::App* cmd, alforge::cli::ConfigSources& src) {
  cmd->add_option("--config", src.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--manifest", src.manifest, "manifest.json from an earlier command")->check(CLI::ExistingFile);
  cmd->add_option("--set", src.sets, "override one key (key=value); repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace alforge::cli;
  CLI::App app{"alforge: consistency-based semi-supervised active learning simulator"};
  app.set_version_flag("--version", alforge::kVersion);
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "write a synthetic dataset CSV and its metadata JSON");
  g->add_option("--kind", gen.kind, "two_moons | blobs | grid_patterns")
      ->check(CLI::IsMember({"two_moons", "blobs", "grid_patterns"}));
  g->add_option("--n", gen.n, "training rows")->check(kPositiveInt);
  g->add_option("--n-test", gen.n_test, "also write a disjoint test split of this size");
  g->add_option("--noise", gen.noise, "noise standard deviation")->check(CLI::NonNegativeNumber);
  g->add_option("--classes", gen.classes, "class count J (blobs, grid_patterns)")->check(CLI::Range(2, 1 << 20));
  g->add_option("--spread", gen.spread, "blob standard deviation")->check(CLI::NonNegativeNumber);
  g->add_option("--centers-seed", gen.centers_seed, "blob centre seed");
  g->add_option("--grid-dim", gen.grid_dim, "grid side length")->check(CLI::Range(4, 1024));
  g->add_option("--seed", gen.seed, "sample seed");
  g->add_option("--out", gen.out, "output CSV path (default <kind>.csv)");

  RunOptions run;
  auto* r = app.add_subcommand("run", "run active learning trials");
  add_sources(r, run.sources);
  r->add_option("--strategy", run.strategy, "uniform | entropy | kcenter | consistency | all, comma separated");
  r->add_option("--trials", run.trials, "number of trials")->check(kPositiveInt);
  r->add_option("--seed", run.seed, "base seed");
  r->add_option("--out", run.out, "output directory");

  SweepOptions sweep;
  auto* s = app.add_subcommand("sweep", "start-size sweep and stopping-rule recommendation");
  add_sources(s, sweep.sources);
  s->add_option("--sizes", sweep.sizes, "increasing start sizes")->delimiter(',');
  s->add_option("--seeds", sweep.seeds, "seeds per size")->check(kPositiveInt);
  s->add_option("--epsilon", sweep.epsilon, "threshold on |delta H|")->required()->check(CLI::NonNegativeNumber);
  s->add_flag("--supervised", sweep.supervised, "train without the consistency term");
  s->add_option("--out", sweep.out, "output directory");

  DiagnoseOptions diag;
  auto* d = app.add_subcommand("diagnose", "selection diagnostics for a saved model and pool");
  add_sources(d, diag.sources);
  d->add_option("--model", diag.model, "model snapshot (.alfg)")->required();
  d->add_option("--pool", diag.pool, "pool snapshot (.json)")->required();
  d->add_option("--strategy", diag.strategy, "ranking strategy")
      ->check(CLI::IsMember({"uniform", "entropy", "kcenter", "consistency"}));
  d->add_option("--top-frac", diag.top_frac, "fraction of the ranking treated as the top set");
  d->add_option("--thresholds", diag.thresholds, "confidence thresholds")->delimiter(',');
  d->add_option("--groups", diag.groups, "rank groups for the entropy curve")->check(kPositiveInt);
  d->add_option("--out", diag.out, "output directory");

  VerifyOptions ver;
  auto* v = app.add_subcommand("verify", "run the built-in oracle checks");
  v->add_option("--seed", ver.seed, "instance seed");
  v->add_flag("--corrupt-gradient", ver.corrupt_gradient, "perturb one gradient coordinate (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const unsigned threads = threads_from_env();
  run.threads = threads;
  sweep.threads = threads;
  try {
    if (*g) return cmd_generate(gen, std::cout, std::cerr);
    if (*r) return cmd_run(run, std::cout, std::cerr);
    if (*s) return cmd_sweep(sweep, std::cout, std::cerr);
    if (*d) return cmd_diagnose(diag, std::cout, std::cerr);
    if (*v) return cmd_verify(ver, std::cout, std::cerr);
  } catch (const alforge::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
