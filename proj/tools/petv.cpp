#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "petv/commands.hpp"

namespace {

struct Options {
  std::string preset;
  std::string config;
  std::string out;
  int k = 0;
  std::string engine;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--preset", o.preset, "built-in experiment name");
  sub->add_option("--config", o.config, "JSON experiment file");
  sub->add_option("--out", o.out, "output directory (default out/<name>)");
  sub->add_option("--k", o.k, "number of eigenvalues to report")->check(CLI::PositiveNumber);
  sub->add_option("--engine", o.engine, "iteration engine")
      ->check(CLI::IsMember({"classic", "petviashvili", "extended"}));
}

petv::ExperimentConfig resolve(const Options& o) {
  if (o.preset.empty() == o.config.empty()) throw petv::ConfigError("give exactly one of --preset or --config");
  petv::ExperimentConfig cfg = o.preset.empty() ? petv::load_config(o.config) : petv::preset(o.preset);
  if (o.k > 0) cfg.spectrum.k = o.k;
  if (!o.engine.empty()) {
    const auto v = petv::detail::parse_engine(o.engine);
    if (v != cfg.iteration.factor.variant) {
      cfg.iteration.factor.variant = v;
      cfg.iteration.factor.gammas.clear();
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Petviashvili-type solvers for localized waves"};
  Options opts;
  bool list = false;
  app.add_flag("--list-presets", list, "print the built-in experiment names");

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const petv::ExperimentConfig&, const petv::CommandContext&);
  };
  const Sub subs[] = {
      {"solve", "run the fixed-point iteration", petv::cmd_solve},
      {"spectrum", "eigenvalues of the iteration matrices", petv::cmd_spectrum},
      {"evolve", "time-evolve the computed profile", petv::cmd_evolve},
      {"sweep", "continue a solution family in mu", petv::cmd_sweep},
      {"reproduce", "run every task of an experiment", petv::cmd_reproduce},
  };
  std::vector<CLI::App*> handles;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, opts);
    handles.push_back(sub);
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (list) {
    for (const auto& n : petv::preset_names()) std::cout << n << "\n";
    return 0;
  }

  for (std::size_t i = 0; i < handles.size(); ++i) {
    if (!handles[i]->parsed()) continue;
    try {
      const petv::ExperimentConfig cfg = resolve(opts);
      petv::CommandContext ctx;
      ctx.out_dir = opts.out.empty() ? (cfg.output_dir.empty() ? "out/" + cfg.name : cfg.output_dir) : opts.out;
      return subs[i].run(cfg, ctx);
    } catch (const petv::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return petv::exit_config;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return petv::exit_failed;
    }
  }
  std::cerr << app.help();
  return petv::exit_config;
}
