#include "experiments/experiments.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalFailure = 3;

struct Subcommand {
  std::string config_path;
  std::string out_dir;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace funnystrom::experiments;

  CLI::App app{"funNystrom experiment harness: low-rank approximation of matrix "
               "functions from a Nystrom sketch, with error-bound verification"};
  app.require_subcommand(1);

  std::map<std::string, std::function<void(const ExperimentConfig&)>> runners = {
      {"budget-curve", run_budget_curve},
      {"accuracy-curve", run_accuracy_curve},
      {"speedup", run_speedup},
      {"trace-duel", run_trace_duel},
      {"fnpp-sweep", run_fnpp_sweep},
  };
  std::map<std::string, std::string> descriptions = {
      {"budget-curve", "mvp budget vs. accuracy: funNystrom against Lanczos-based Nystrom of f(A)"},
      {"accuracy-curve", "error vs. rank with minimized expectation-bound overlays"},
      {"speedup", "wall-clock comparison of low-rank and Lanczos mvps with f(A)"},
      {"trace-duel", "matched-budget trace duel against the projected log-det estimator"},
      {"fnpp-sweep", "funNystrom++ sweep against Nystrom++ at matched budgets"},
      {"verify-bounds", "empirical verification of the structural and expectation bounds"},
  };

  std::map<std::string, Subcommand> options;
  for (const auto& [name, description] : descriptions) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", options[name].config_path, "experiment config file")
        ->required();
    sub->add_option("--out", options[name].out_dir, "output directory")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    if (error.get_exit_code() == 0) return app.exit(error);
    std::cerr << "config error: " << error.what() << "\n";
    return kExitConfigError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig cfg = parse_config_file(options[name].config_path);
    cfg.out_dir = options[name].out_dir;
    if (name == "verify-bounds") {
      if (!run_verify_bounds(cfg)) {
        std::cerr << "numerical failure: an empirical check exceeded its bound\n";
        return kExitNumericalFailure;
      }
    } else {
      runners.at(name)(cfg);
    }
  } catch (const ConfigError& error) {
    std::cerr << "config error: " << error.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& error) {
    std::cerr << "config error: " << error.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& error) {
    std::cerr << "numerical failure: " << error.what() << "\n";
    return kExitNumericalFailure;
  }
  return 0;
}
