#include <iostream>

#include "CLI11.hpp"

#include "collapse_box/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"collapse-box: finite-time collapse models for correlated black boxes"};
  app.require_subcommand(1);

  cbox::RunManifest manifest;
  std::string scenario, out_dir = ".";
  std::uint64_t seed = 0, replicas = 0;
  double alpha = 0.0;
  std::string grid;
  unsigned workers = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario, "Scenario JSON file")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Master seed (u64)");
    sub->add_option("--n", replicas, "Monte Carlo replicas");
    sub->add_option("--alpha", alpha, "Significance level");
    sub->add_option("--grid", grid, "Grid: start:stop:count or v1,v2,...");
    sub->add_option("--workers", workers, "Worker threads (0 = all, capped by COLLAPSE_BOX_THREADS)");
  };
  for (const char* name : {"validate", "witness", "simulate", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub);
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* chosen = app.get_subcommands().front();
  manifest.command = chosen->get_name();
  manifest.scenario = scenario;
  manifest.out_dir = out_dir;
  manifest.workers = workers;
  if (chosen->count("--seed")) manifest.seed = seed;
  if (chosen->count("--n")) manifest.replicas = replicas;
  if (chosen->count("--alpha")) manifest.alpha = alpha;
  if (chosen->count("--grid")) manifest.grid = grid;

  return cbox::run_command(manifest, std::cout, std::cerr);
}
