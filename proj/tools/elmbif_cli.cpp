// Command-line experiment runner: solve, error-sweep, bifurcation, basin, u0-table.
//
// Settings come from an optional JSON file (--config) overlaid by flags of the
// same names. ELMBIF_OUT sets the default output directory.
//
// Exit codes: 0 success, 2 finished with recorded failures, 1 configuration error.

#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elmbif/experiments.hpp"

namespace {

using elmbif::ExperimentConfig;
using nlohmann::json;

struct Flags {
  std::string config;
  std::map<std::string, std::string> strings;
  std::map<std::string, double> reals;
  std::map<std::string, int> ints;
  std::vector<std::string> solvers;
  std::vector<int> sizes;
  std::vector<std::uint64_t> seeds;
  bool gnuplot = false;
};

// Options shared by every subcommand; `keys` records which config key each
// option feeds so only flags actually given override the file.
void add_common(CLI::App* cmd, Flags& f, std::vector<std::pair<CLI::Option*, std::string>>& keys) {
  cmd->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  auto str = [&](const char* flag, const char* key, const char* help) {
    keys.emplace_back(cmd->add_option(flag, f.strings[key], help), key);
  };
  auto real = [&](const char* flag, const char* key, const char* help) {
    keys.emplace_back(cmd->add_option(flag, f.reals[key], help), key);
  };
  auto integer = [&](const char* flag, const char* key, const char* help) {
    keys.emplace_back(cmd->add_option(flag, f.ints[key], help), key);
  };
  str("--problem", "problem", "burgers-dirichlet | burgers-mixed | bratu1d | bratu2d | bratu-radial");
  keys.emplace_back(cmd->add_option("--solver", f.solvers, "fd | elm-sf | elm-rbf (repeatable, comma separated)")
                        ->delimiter(','),
                    "solvers");
  real("--nu", "nu", "viscosity");
  real("--lambda", "lambda", "Bratu parameter");
  real("--theta", "theta", "Neumann datum of the mixed Burgers problem");
  keys.emplace_back(cmd->add_option("--sizes", f.sizes, "problem sizes N")->delimiter(','), "sizes");
  keys.emplace_back(cmd->add_option("--seeds", f.seeds, "basis seeds")->delimiter(','), "seeds");
  real("--tol", "tol", "Newton tolerance");
  real("--ds0", "ds0", "initial arclength step");
  real("--ratio", "ratio", "collocation points per neuron, in (0, 1]");
  str("--out", "out", "output directory");
  keys.emplace_back(cmd->add_flag("--gnuplot", f.gnuplot, "also write .dat files"), "gnuplot");
  str("--branch", "branch", "lower | upper");
  str("--linear-method", "linear_method", "svd | qr");
  real("--l0", "l0", "height of the parabola initial guess");
  real("--param-min", "param_min", "continuation lower bound");
  real("--param-max", "param_max", "continuation upper bound");
  real("--measure-max", "measure_max", "continuation measure bound");
  real("--residual-tol", "residual_tol", "RMS residual accepted on branch points");
  real("--u0-theta", "u0_theta", "theta of the u(0) table");
  integer("--max-iter", "max_iter", "Newton iteration cap");
  integer("--max-points", "max_points", "branch point budget");
  integer("--points-after-fold", "points_after_fold", "stop this many points past the fold");
  integer("--fold-refinements", "fold_refinements", "fold re-tracing levels");
  integer("--resolution", "resolution", "output grid points per axis");
  integer("--basin-l0-points", "basin_l0_points", "basin grid size along l0");
  integer("--basin-lambda-points", "basin_lambda_points", "basin grid size along lambda");
}

json load_config(const Flags& f, const std::vector<std::pair<CLI::Option*, std::string>>& keys) {
  json doc = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw std::invalid_argument("cannot parse " + f.config + ": " + e.what());
    }
  }
  if (!doc.contains("out")) {
    if (const char* env = std::getenv("ELMBIF_OUT")) doc["out"] = env;
  }
  for (const auto& [opt, key] : keys) {
    if (opt->count() == 0) continue;
    if (key == "solvers") {
      doc.erase("solver");
      doc["solvers"] = f.solvers;
    } else if (key == "sizes") {
      doc["sizes"] = f.sizes;
    } else if (key == "seeds") {
      doc["seeds"] = f.seeds;
    } else if (key == "gnuplot") {
      doc["gnuplot"] = f.gnuplot;
    } else if (f.strings.count(key)) {
      doc[key] = f.strings.at(key);
    } else if (f.reals.count(key)) {
      doc[key] = f.reals.at(key);
    } else {
      doc[key] = f.ints.at(key);
    }
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ELM collocation and finite-difference solvers with branch continuation"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    std::function<int(const ExperimentConfig&)> run;
  };
  const std::vector<Command> commands = {
      {"solve", "Newton solve per solver, size and seed; writes solution CSV and report JSON",
       elmbif::run_solve},
      {"error-sweep", "errors against the exact solution over sizes and seeds", elmbif::run_error_sweep},
      {"bifurcation", "trace branches and estimate the turning point", elmbif::run_bifurcation},
      {"basin", "classify Newton outcomes over a grid of parabola heights and lambda",
       elmbif::run_basin},
      {"u0-table", "upper-branch u(0) of the mixed Burgers problem at small theta",
       elmbif::run_u0_table},
  };

  std::vector<Flags> flags(commands.size());
  std::vector<std::vector<std::pair<CLI::Option*, std::string>>> keys(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].name, commands[i].help);
    add_common(sub, flags[i], keys[i]);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    ExperimentConfig cfg;
    try {
      cfg = elmbif::config_from_json(load_config(flags[i], keys[i]));
    } catch (const std::exception& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return 1;
    }
    try {
      const int failures = commands[i].run(cfg);
      std::cout << commands[i].name << ": results in " << cfg.out_dir.string();
      if (failures > 0) {
        std::cout << " (" << failures << " recorded failures)\n";
        return 2;
      }
      std::cout << '\n';
      return 0;
    } catch (const std::invalid_argument& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
