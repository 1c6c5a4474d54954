#include "experiments/experiments.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace funnystrom::experiments {

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& message) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + message);
}

template <typename T>
T parse_number(const std::string& origin, int line, const std::string& value) {
  std::istringstream in(value);
  T parsed{};
  if (!(in >> parsed) || !in.eof()) {
    fail(origin, line, "cannot parse number '" + value + "'");
  }
  return parsed;
}

template <typename T>
std::vector<T> parse_list(const std::string& origin, int line, const std::string& value) {
  std::vector<T> values;
  std::istringstream fields(value);
  std::string field;
  while (std::getline(fields, field, ',')) {
    values.push_back(parse_number<T>(origin, line, trim(field)));
  }
  if (values.empty()) fail(origin, line, "empty list");
  return values;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream lines(text);
  std::string raw;
  std::string section;
  int line_number = 0;
  while (std::getline(lines, raw)) {
    ++line_number;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_number, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_number, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qualified = section.empty() ? key : section + "." + key;

    if (qualified == "experiment.seed") {
      cfg.seed = parse_number<std::uint64_t>(origin, line_number, value);
    } else if (qualified == "experiment.repetitions") {
      cfg.repetitions = parse_number<int>(origin, line_number, value);
    } else if (qualified == "experiment.norm") {
      try {
        cfg.norm = parse_norm(value);
      } catch (const std::invalid_argument& error) {
        fail(origin, line_number, error.what());
      }
    } else if (qualified == "experiment.trials") {
      cfg.trials = parse_number<int>(origin, line_number, value);
    } else if (qualified == "matrix.spec") {
      cfg.matrix_spec = value;
    } else if (qualified == "function.spec") {
      cfg.function_spec = value;
    } else if (qualified == "grid.ranks") {
      cfg.ranks = parse_list<Index>(origin, line_number, value);
    } else if (qualified == "grid.q") {
      cfg.q_values = parse_list<int>(origin, line_number, value);
    } else if (qualified == "grid.budgets") {
      cfg.budgets = parse_list<Index>(origin, line_number, value);
    } else if (qualified == "grid.sweep") {
      cfg.sweep_ranks = parse_list<Index>(origin, line_number, value);
    } else if (qualified == "grid.depth") {
      cfg.lanczos_depth = parse_number<int>(origin, line_number, value);
    } else if (qualified == "grid.blocks") {
      cfg.block_grid = parse_list<Index>(origin, line_number, value);
    } else if (qualified == "grid.speedup_rank") {
      cfg.speedup_rank = parse_number<Index>(origin, line_number, value);
    } else if (qualified == "grid.speedup_depth") {
      cfg.speedup_lanczos_depth = parse_number<int>(origin, line_number, value);
    } else {
      fail(origin, line_number, "unknown key '" + qualified + "'");
    }
  }

  if (cfg.repetitions < 1) {
    throw ConfigError(origin + ": repetitions must be >= 1");
  }
  if (cfg.matrix_spec.empty()) {
    throw ConfigError(origin + ": missing matrix.spec");
  }
  try {
    (void)parse_matrix_spec(cfg.matrix_spec);
    (void)parse_function<double>(cfg.function_spec);
  } catch (const std::invalid_argument& error) {
    throw ConfigError(origin + ": " + error.what());
  }
  for (int q : cfg.q_values) {
    if (q < 1) throw ConfigError(origin + ": q values must be >= 1");
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

}  // namespace funnystrom::experiments
