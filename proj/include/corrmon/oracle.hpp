#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "corrmon/model.hpp"
#include "corrmon/policies.hpp"
#include "corrmon/random.hpp"

namespace corrmon {

struct OracleResult {
  std::vector<Index> best_schedule;
  double best_avg_trace = 0.0;
  std::uint64_t evaluated_count = 0;
};

/// Exhaustive minimiser of (1/T) sum_{t=1..T} trace(P_t) over all M^T
/// deterministic schedules started from P_0 = p0.
///
/// The covariance dynamics do not depend on the realised state, so the best
/// deterministic schedule is also optimal among randomised oblivious
/// policies; enumeration is exact. Work is split over first-slot branches;
/// ties resolve to the lexicographically smallest schedule regardless of
/// `threads`. Throws BudgetExceeded when M^T > budget.
OracleResult dp_optimal_schedule(const SystemModel& model, const CovarianceMatrix& p0,
                                 std::size_t horizon, std::uint64_t budget = 10'000'000,
                                 unsigned threads = 1);

/// (1/T) sum_{t=1..T} trace(P_t) for a fixed schedule.
double schedule_average_trace(const SystemModel& model, const CovarianceMatrix& p0,
                              const std::vector<Index>& schedule);

/// Runs `policy` for `horizon` slots from P_0 = p0 with zero ages and
/// returns the schedule it produced.
std::vector<Index> rollout_schedule(const SystemModel& model, const CovarianceMatrix& p0,
                                    PolicySpec policy, std::size_t horizon, RandomSource rng);

struct MaxRatioReport {
  double closed_form = 0.0;   // p^T A^{-1} p
  double max_sampled = 0.0;   // largest (b^T p)^2 / b^T A b over the trials
  double attained = 0.0;      // ratio at b* = A^{-1} p
  bool passed = false;
};

/// max_b (b^T p)^2 / (b^T A b) = p^T A^{-1} p. Throws SingularMatrix unless
/// A is positive definite with condition number <= 1e12.
MaxRatioReport max_ratio_check(const Eigen::VectorXd& p, const CovarianceMatrix& a,
                               std::size_t trials, RandomSource& rng);

struct PsdOrderReport {
  bool applicable = false;         // A - B is PSD to tolerance
  double min_eig_difference = 0.0; // lambda_min(B^{-1} - A^{-1})
  bool passed = true;
};

/// A >= B > 0 implies B^{-1} >= A^{-1}. Pairs with A - B not PSD are
/// reported as not applicable and pass vacuously.
PsdOrderReport psd_inverse_order_check(const CovarianceMatrix& a, const CovarianceMatrix& b);

struct TrajectoryReport {
  double min_slack = 0.0;          // min over sensors, t of p_ii(t+1) - q_ii - h q~_ii
  double max_pin_deviation = 0.0;  // max || p_i(t+1) - q_i || off the diagonal
  std::size_t steps = 0;
  bool passed = false;
};

/// Replays, for every sensor i, the adversarial schedule that observes i at
/// t = 0 and afterwards only the combination b = R^{-1} p_i of the other
/// sensors (R the other-sensor block of P, p_i the cross column). That
/// choice keeps p_i pinned at q_i and grows p_ii by exactly the smallest
/// amount any observation can, which must still be at least q~_ii per slot.
TrajectoryReport lower_bound_trajectory_check(const CovarianceMatrix& q, std::size_t horizon);

/// Random positive-definite matrix B B^T / m + floor I, B standard normal.
CovarianceMatrix random_covariance(Index m, RandomSource& rng, double floor = 0.05);

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  std::string detail;
};

/// Randomised lemma checks: max ratio, PSD inverse order, lower-bound
/// trajectory, low-rank reconstruction, and WI-EE / MWA agreement at A = I
/// with equal variances. `cases` instances each.
std::vector<SuiteResult> run_lemma_suite(std::uint64_t seed, std::size_t cases = 200);

/// Every policy's finite-horizon average trace against the exhaustive
/// optimum on `instances` random problems (M <= 3, T <= 10), plus the
/// M = 2, Q = I round-robin long-run value.
std::vector<SuiteResult> run_oracle_suite(std::uint64_t seed, std::size_t instances = 50);

}  // namespace corrmon
