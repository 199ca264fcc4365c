// Batch front end. Usage: qmtool <verb> [names...] --scene file.json [options]
// Worker threads default to QM_THREADS, else the hardware count.

#include <iostream>

#include "CLI11.hpp"
#include "qm/commands.hpp"

int main(int argc, char** argv) {
  qm::CommandOptions opts;
  CLI::App app{"Topological measure toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  double tol = 0;
  std::size_t budget = 0;
  app.add_option("--scene", opts.scene, "scene JSON file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the scene seed)");
  app.add_option("--out", opts.out, "output file (CSV, or the raster for render)");
  auto* tol_opt = app.add_option("--tol", tol, "tolerance override");
  auto* budget_opt = app.add_option("--budget", budget, "sample budget for checkers");

  struct Verb {
    const char* name;
    const char* help;
  };
  const Verb verbs[] = {
      {"axioms", "check a measure seed, measure or transform: axioms <name>"},
      {"eval", "evaluate a measure on regions: eval <measure> [region...]"},
      {"integrate", "quasi-integral: integrate <measure> <function>"},
      {"kr", "KR / Wasserstein-1 distance: kr <a> <b>"},
      {"markov", "fixed-point distance trace: markov <system>"},
      {"render", "chaos-game density raster: render <system> --out file.ppm"},
      {"median", "sample median distribution: median <family>"},
  };
  for (const auto& v : verbs) {
    auto* sub = app.add_subcommand(v.name, v.help);
    sub->add_option("names", opts.args, "positional names");
    if (std::string(v.name) == "markov") {
      sub->add_option("--iterations", opts.iterations, "number of trace rows");
      sub->add_option("--initial", opts.initial, "starting measure (discrete or grid)");
    }
    if (std::string(v.name) == "render") {
      sub->add_option("--samples", opts.samples, "chaos-game points");
      sub->add_option("--resolution", opts.resolution, "raster side in pixels");
      sub->add_option("--burn-in", opts.burn_in, "discarded initial points");
    }
    sub->callback([&opts, name = std::string(v.name)] { opts.verb = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qm::exit_reference;
  }
  if (seed_opt->count()) opts.seed = seed;
  if (tol_opt->count()) opts.tol = tol;
  if (budget_opt->count()) opts.budget = budget;
  return qm::run_command(opts, std::cout, std::cerr);
}
