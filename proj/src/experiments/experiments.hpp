#pragma once

#include "funnystrom/funnystrom.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace funnystrom::experiments {

/// Raised for malformed or inconsistent configuration files; the CLI maps it
/// to exit code 2 (numerical failures map to 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value configuration with [section] headers; see configs/ for the
/// grammar in use. Unknown keys are rejected with line diagnostics.
struct ExperimentConfig {
  std::string matrix_spec;
  std::string function_spec = "identity";
  std::vector<Index> ranks;
  std::vector<int> q_values = {1};
  int repetitions = 1;
  std::uint64_t seed = 0;
  NormKind norm = NormKind::Frobenius;

  std::vector<Index> budgets;      // trace-duel mvp budgets
  std::vector<Index> sweep_ranks;  // fnpp-sweep r = ell grid
  int lanczos_depth = 10;          // fnpp-sweep / baselines

  std::vector<Index> block_grid;   // speedup N grid
  Index speedup_rank = 14;
  int speedup_lanczos_depth = 21;

  int trials = 200;                // verify-bounds trial count

  std::string out_dir;             // from the CLI --out flag
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);

/// Experiment runners. Each writes CSV files, a meta.txt echo and a plot
/// script into cfg.out_dir. Re-running a config reproduces every non-timing
/// byte. verify_bounds returns false when an empirical check violates its
/// bound.
void run_budget_curve(const ExperimentConfig& cfg);
void run_accuracy_curve(const ExperimentConfig& cfg);
void run_speedup(const ExperimentConfig& cfg);
void run_trace_duel(const ExperimentConfig& cfg);
void run_fnpp_sweep(const ExperimentConfig& cfg);
bool run_verify_bounds(const ExperimentConfig& cfg);

}  // namespace funnystrom::experiments
