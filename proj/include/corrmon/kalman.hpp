#pragma once

#include <optional>

#include <Eigen/Dense>

#include "corrmon/model.hpp"

namespace corrmon {

/// Filter state at slot t.
///
/// `p` is the a-priori covariance P_t = P_{t|t-1}. When the estimate is
/// tracked, `xhat` is the a-posteriori estimate from the previous slot,
/// x^_{t-1|t-1}; the prediction for slot t is A * xhat.
struct KalmanState {
  std::size_t t = 0;
  CovarianceMatrix p;
  std::optional<Eigen::VectorXd> xhat;

  bool track_estimate() const noexcept { return xhat.has_value(); }
};

/// P_0 = Q with no estimate tracking: every sensor was observed exactly just
/// before slot 0, so Q is the spread accumulated over one transition.
KalmanState initial_kalman_state(const SystemModel& model, bool track_estimate = false);

/// Pivot floor for c^T P c, relative to trace(P).
inline constexpr double kPivotRelTol = 1e-12;

/// P_{t+1} = A (P - P c c^T P / c^T P c) A^T + Q, symmetrized.
/// Throws SingularPivot when c^T P c <= 1e-12 * trace(P).
CovarianceMatrix covariance_step(const CovarianceMatrix& p, const Eigen::VectorXd& c,
                                 const SystemModel& model);

/// Fast path for c = e_sensor. The observed row and column of the posterior
/// are set to exactly zero, so p_jj(t+1) == q_jj bit for bit.
CovarianceMatrix covariance_step(const CovarianceMatrix& p, Index sensor,
                                 const SystemModel& model);

/// trace of covariance_step(p, e_sensor, model), in O(M).
double successor_trace(const CovarianceMatrix& p, Index sensor, const SystemModel& model);

/// Measurement update plus covariance propagation for a scalar noiseless
/// observation y = x[sensor].
KalmanState kalman_update(const KalmanState& state, Index sensor, double y,
                          const SystemModel& model);

/// Per-sensor expected squared error of the slot that produced `p_next`:
/// (p_next_ii - q_ii) / a_ii^2. Roundoff negatives down to -1e-9 are
/// clamped to zero.
Eigen::VectorXd expected_error(const CovarianceMatrix& p_next, const SystemModel& model);

}  // namespace corrmon
