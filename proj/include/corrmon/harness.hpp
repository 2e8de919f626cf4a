#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "corrmon/config.hpp"
#include "corrmon/errors.hpp"
#include "corrmon/model.hpp"
#include "corrmon/policies.hpp"

namespace corrmon {

/// One slot of a trajectory. `scheduled` is 0-based here and 1-based in CSV.
/// `trace_p` is trace(P_{t+1}); `total_err` the summed expected error of the
/// slot; `lb`/`ub` the summed per-step sandwich for the post-decision ages.
struct TrajectoryRecord {
  std::size_t t = 0;
  PolicyKind policy = PolicyKind::Mwa;
  Index scheduled = 0;
  double trace_p = 0.0;
  double total_err = 0.0;
  double lb = 0.0;
  double ub = 0.0;
  std::vector<double> per_sensor_err;  // filled when config.per_sensor
  std::vector<std::uint64_t> aoi;      // filled when config.aoi

  bool operator==(const TrajectoryRecord&) const = default;
};

/// Time averages over slots [burn_in, horizon).
struct TrajectorySummary {
  PolicyKind policy = PolicyKind::Mwa;
  Index m = 0;
  double rho = 0.0;
  double avg_error = 0.0;
  double normalized_error = 0.0;  // avg_error / M
  double avg_lb = 0.0;
  double avg_ub = 0.0;
  /// Realised squared error averaged over replications (monte_carlo only).
  std::optional<double> realized_error;
};

struct TrajectoryResult {
  std::vector<TrajectoryRecord> records;  // replication 0
  TrajectorySummary summary;
};

/// Raised by run_trajectory with the failing slot; the original error is
/// nested (std::rethrow_if_nested).
class TrajectoryError : public Error {
 public:
  TrajectoryError(std::size_t step, const std::string& what)
      : Error("slot " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Simulates one policy on cell (m, rho). Deterministic given the config.
/// Policy decisions use P_t and the ages before the slot; the covariance
/// path is exact, so covariance_only needs no sampling except SR draws.
/// The lb column is 0 when Q is singular.
TrajectoryResult run_trajectory(const ExperimentConfig& config, PolicySpec policy, Index m,
                                double rho, bool keep_records = true);

/// run_trajectory on the first m and rho of the config.
TrajectoryResult run_trajectory(const ExperimentConfig& config, PolicySpec policy);

/// Scenario bracket on the long-run average error of one cell. Values that
/// do not apply are NaN.
struct ScenarioBounds {
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double guarantee = std::numeric_limits<double>::quiet_NaN();
  std::string kind;  // full_rank, low_rank, general_a, none
};

ScenarioBounds scenario_bounds(const SystemModel& model);

struct SweepRow {
  Index m = 0;
  double rho = 0.0;
  PolicyKind policy = PolicyKind::Mwa;
  double avg_error = std::numeric_limits<double>::quiet_NaN();
  double normalized_error = std::numeric_limits<double>::quiet_NaN();
  double lb = std::numeric_limits<double>::quiet_NaN();
  double ub = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";  // error message for failed cells
};

/// One row per (m, rho, policy), sorted in config order. Cells run
/// concurrently, up to worker_count() at a time; a failing cell is
/// recorded in `status` and the sweep continues.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);

/// Threads to use: CORRMON_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
unsigned worker_count();

/// Header: t,policy,scheduled,trace_p,total_err,lb,ub then err_1..err_M
/// and aoi_1..aoi_M when present. Floats use 17 significant digits.
void write_csv(const std::vector<TrajectoryRecord>& records, const std::filesystem::path& path);
std::vector<TrajectoryRecord> read_csv(const std::filesystem::path& path);

void write_summary_csv(const std::vector<TrajectorySummary>& rows,
                       const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// %.17g, with nan for NaN.
std::string format_real(double v);

}  // namespace corrmon
