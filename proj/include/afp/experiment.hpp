#pragma once

// Batch experiments: config parsing, the preset catalog, suite execution
// and CSV / JSON output.
//
// Config shape:
//   {"kind": ..., "parameters": {...}, "output": {"name": ...},
//    "caps": {"max_dim": N, "ball_cap": N}, "seed": N}

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "afp/fock.hpp"
#include "afp/free_group.hpp"

namespace afp {

inline constexpr int kSummarySchema = 1;

struct ExperimentConfig {
  std::string kind;
  nlohmann::json parameters;
  std::string name;
  long max_dim = kDefaultMaxDim;
  long ball_cap = kDefaultBallCap;
  std::uint64_t seed = kDefaultSeed;
};

std::vector<std::string> experiment_kinds();

/// ParseError with the pointer of the offending value. Checks the envelope
/// and the parameters of the kind without running anything.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CheckRecord {
  std::string name;
  bool passed = false;
  double lower = 0.0;
  double upper = 0.0;
  double residual = 0.0;
  double seconds = 0.0;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct RunReport {
  std::string kind;
  std::string name;
  std::uint64_t seed = 0;
  Table table;
  std::vector<CheckRecord> checks;
  nlohmann::json details;
  double seconds = 0.0;
  bool passed() const;
};

/// Runs the suite; independent checks run concurrently on the current
/// OpenMP thread budget and are assembled in declared order.
RunReport run_experiment(const ExperimentConfig& config);

std::string format_double(double x);
std::string to_csv(const Table& t);
nlohmann::json summary_json(const RunReport& r);

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path summary;
};
OutputPaths write_outputs(const RunReport& r, const std::filesystem::path& dir);

struct Preset {
  std::string name;
  std::string kind;
  std::string description;
  std::string statement;  // the statement the preset exercises
  nlohmann::json config;
};

const std::vector<Preset>& experiment_presets();
/// nullptr if unknown.
const Preset* find_preset(const std::string& name);

}  // namespace afp
