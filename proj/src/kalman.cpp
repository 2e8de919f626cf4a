#include "corrmon/kalman.hpp"

#include <string>

#include "corrmon/errors.hpp"

namespace corrmon {

namespace {

void check_pivot(double pivot, const CovarianceMatrix& p) {
  if (!(pivot > kPivotRelTol * p.trace())) {
    throw SingularPivot("c^T P c = " + std::to_string(pivot) +
                        " is below the pivot threshold (trace " + std::to_string(p.trace()) +
                        ")");
  }
}

void check_dims(const CovarianceMatrix& p, const SystemModel& model) {
  if (p.dim() != model.dim()) throw DomainError("covariance and model dimensions differ");
}

// A post A^T + Q for diagonal A, then (X + X^T) / 2.
CovarianceMatrix propagate(Eigen::MatrixXd post, const SystemModel& model) {
  if (!model.identity_dynamics()) {
    const Eigen::VectorXd& a = model.a();
    post = a.asDiagonal() * post * a.asDiagonal();
  }
  post += model.q().matrix();
  Eigen::MatrixXd sym = 0.5 * (post + post.transpose());
  return CovarianceMatrix::unchecked(std::move(sym));
}

}  // namespace

KalmanState initial_kalman_state(const SystemModel& model, bool track_estimate) {
  KalmanState s{0, model.q(), std::nullopt};
  if (track_estimate) s.xhat = Eigen::VectorXd::Zero(model.dim());
  return s;
}

CovarianceMatrix covariance_step(const CovarianceMatrix& p, const Eigen::VectorXd& c,
                                 const SystemModel& model) {
  check_dims(p, model);
  if (c.size() != p.dim()) throw DomainError("observation vector has the wrong length");
  if (c.isZero(0.0)) throw DomainError("observation vector is zero");
  const Eigen::VectorXd pc = p.matrix() * c;
  const double pivot = c.dot(pc);
  check_pivot(pivot, p);
  Eigen::MatrixXd post = p.matrix() - pc * pc.transpose() / pivot;
  return propagate(std::move(post), model);
}

CovarianceMatrix covariance_step(const CovarianceMatrix& p, Index sensor,
                                 const SystemModel& model) {
  check_dims(p, model);
  if (sensor < 0 || sensor >= p.dim()) {
    throw IndexError("sensor " + std::to_string(sensor) + " out of range");
  }
  const double pivot = p(sensor, sensor);
  check_pivot(pivot, p);
  const Eigen::VectorXd col = p.matrix().col(sensor);
  Eigen::MatrixXd post = p.matrix() - col * col.transpose() / pivot;
  post.row(sensor).setZero();
  post.col(sensor).setZero();
  return propagate(std::move(post), model);
}

double successor_trace(const CovarianceMatrix& p, Index sensor, const SystemModel& model) {
  check_dims(p, model);
  if (sensor < 0 || sensor >= p.dim()) {
    throw IndexError("sensor " + std::to_string(sensor) + " out of range");
  }
  const double pivot = p(sensor, sensor);
  check_pivot(pivot, p);
  const Eigen::ArrayXd col = p.matrix().col(sensor).array();
  const Eigen::ArrayXd a2 = model.a().array().square();
  Eigen::ArrayXd post_diag = p.matrix().diagonal().array() - col.square() / pivot;
  post_diag(sensor) = 0.0;
  return (a2 * post_diag).sum() + model.q().trace();
}

KalmanState kalman_update(const KalmanState& state, Index sensor, double y,
                          const SystemModel& model) {
  if (!state.track_estimate()) {
    throw DomainError("kalman_update requires a tracked estimate");
  }
  CovarianceMatrix next_p = covariance_step(state.p, sensor, model);
  const Eigen::VectorXd prediction = model.a().cwiseProduct(*state.xhat);
  const Eigen::VectorXd gain = state.p.matrix().col(sensor) / state.p(sensor, sensor);
  Eigen::VectorXd xhat = prediction + gain * (y - prediction(sensor));
  xhat(sensor) = y;
  return KalmanState{state.t + 1, std::move(next_p), std::move(xhat)};
}

Eigen::VectorXd expected_error(const CovarianceMatrix& p_next, const SystemModel& model) {
  check_dims(p_next, model);
  const Eigen::VectorXd& a = model.a();
  Eigen::VectorXd err(p_next.dim());
  for (Index i = 0; i < err.size(); ++i) {
    double e = (p_next(i, i) - model.q()(i, i)) / (a(i) * a(i));
    if (e < 0.0 && e >= -1e-9 * std::max(1.0, p_next(i, i))) e = 0.0;
    err(i) = e;
  }
  return err;
}

}  // namespace corrmon
