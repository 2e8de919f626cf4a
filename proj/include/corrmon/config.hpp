#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "corrmon/model.hpp"
#include "corrmon/policies.hpp"

namespace corrmon {

enum class Scenario : std::uint8_t { Symmetric, Block, RhoSweep, DiagA, LowRank, CustomMatrixFile };
enum class RunMode : std::uint8_t { CovarianceOnly, MonteCarlo };

std::string_view scenario_name(Scenario s) noexcept;
std::string_view mode_name(RunMode m) noexcept;

/// One experiment. Each (m, rho) pair is a cell; every listed policy runs in
/// every cell.
struct ExperimentConfig {
  Scenario scenario = Scenario::Symmetric;
  std::vector<Index> m{20};
  std::vector<double> rho{0.8};
  double a_scale = 1.0;
  std::vector<PolicySpec> policies{{PolicyKind::Mee}, {PolicyKind::Mwa}, {PolicyKind::Sr}};
  std::size_t horizon = 20000;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::CovarianceOnly;
  std::size_t replications = 1;
  std::size_t burn_in = 0;
  std::string matrix_file;
  bool per_sensor = false;
  bool aoi = false;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError when field values are inconsistent.
void validate_config(const ExperimentConfig& config);

/// Parses the INI-style text described in the README. Errors carry the
/// 1-based line and the `section.key` field name.
ExperimentConfig parse_config(std::string_view text);

/// Reads and parses `path`. A relative matrix_file is resolved against the
/// directory holding the config file.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Reads a whitespace- or comma-separated square matrix, one row per line;
/// '#' starts a comment.
CovarianceMatrix read_matrix_file(const std::filesystem::path& path);

/// Noise model of one cell.
SystemModel build_model(const ExperimentConfig& config, Index m, double rho);

}  // namespace corrmon
