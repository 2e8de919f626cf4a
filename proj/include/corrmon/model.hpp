#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "corrmon/random.hpp"

namespace corrmon {

using Index = Eigen::Index;

/// Symmetric positive-semidefinite M x M matrix. Houses the noise covariance
/// Q, its submatrices, and the filter covariances P_t.
///
/// The checked constructor enforces symmetry (1e-12 relative), PSD
/// (min eigenvalue >= -1e-9 * largest magnitude) and non-negative diagonal.
/// `unchecked` skips the O(M^3) eigenvalue test for matrices the Kalman
/// recursion produces itself.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd m);

  static CovarianceMatrix unchecked(Eigen::MatrixXd m);
  static CovarianceMatrix identity(Index m);
  static CovarianceMatrix diagonal(const Eigen::VectorXd& d);

  Index dim() const noexcept { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  Eigen::VectorXd diag() const { return m_.diagonal(); }
  double trace() const { return m_.trace(); }

 private:
  struct NoCheck {};
  CovarianceMatrix(Eigen::MatrixXd m, NoCheck) : m_(std::move(m)) {}

  Eigen::MatrixXd m_;
};

/// Throws DomainError when `m` violates the CovarianceMatrix invariants.
void validate_covariance(const Eigen::MatrixXd& m);

/// x_{t+1} = A x_t + w_t with A = diag(a), a_ii >= 1, and w_t ~ N(0, Q).
class SystemModel {
 public:
  /// Random-walk model (A = I).
  explicit SystemModel(CovarianceMatrix q);
  SystemModel(Eigen::VectorXd a_diag, CovarianceMatrix q);

  Index dim() const noexcept { return q_.dim(); }
  const Eigen::VectorXd& a() const noexcept { return a_; }
  const CovarianceMatrix& q() const noexcept { return q_; }
  bool identity_dynamics() const noexcept { return identity_; }

 private:
  Eigen::VectorXd a_;
  CovarianceMatrix q_;
  bool identity_ = true;
};

struct ProcessState {
  std::size_t t = 0;
  Eigen::VectorXd x;
};

/// Zero state of the model's dimension.
ProcessState initial_state(const SystemModel& model);

/// q_ii = 1, q_ij = rho. Requires -1/(m-1) < rho <= 1 for m >= 2.
CovarianceMatrix make_symmetric_q(Index m, double rho);

/// Two-block heteroscedastic scenario: [[R, 10 rho 11^T], [10 rho 11^T, 100 R]]
/// with R the (m/2)-dimensional symmetric-rho matrix. `m` must be even.
CovarianceMatrix make_block_q(Index m, double rho);

/// Rank-(m/2) scenario: sensors 2k and 2k+1 observe perfectly correlated
/// increments; the (m/2)-dimensional base process has symmetric-rho
/// covariance. Q = R (x) 11^T.
CovarianceMatrix make_paired_q(Index m, double rho);

/// Factor F (M x L, L = numerical rank) with F F^T = q. Eigenvalues in
/// [-1e-9 * lambda_max, 0] are clipped to zero; anything more negative is a
/// DomainError.
Eigen::MatrixXd noise_factor(const CovarianceMatrix& q);

/// One transition of the process, drawing w = F z with z standard normal.
ProcessState step_process(const ProcessState& state, const SystemModel& model,
                          const Eigen::MatrixXd& factor, RandomSource& rng);

/// Convenience overload that factors Q on every call.
ProcessState step_process(const ProcessState& state, const SystemModel& model,
                          RandomSource& rng);

}  // namespace corrmon
