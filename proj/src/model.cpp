#include "corrmon/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "corrmon/errors.hpp"
#include "corrmon/linalg.hpp"

namespace corrmon {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-9;

}  // namespace

void validate_covariance(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DomainError("covariance must be a non-empty square matrix");
  }
  if (!m.allFinite()) throw DomainError("covariance has non-finite entries");
  const Index n = m.rows();
  for (Index i = 0; i < n; ++i) {
    if (m(i, i) < 0.0) {
      throw DomainError("covariance diagonal entry " + std::to_string(i) + " is negative");
    }
    for (Index j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTol * std::max(1.0, std::abs(m(i, j)))) {
        throw DomainError("covariance is not symmetric");
      }
    }
  }
  const Eigen::VectorXd ev = linalg::eigenvalues_descending(m);
  const double scale = ev.cwiseAbs().maxCoeff();
  if (ev(n - 1) < -kPsdTol * scale) {
    throw DomainError("covariance is not positive semidefinite (min eigenvalue " +
                      std::to_string(ev(n - 1)) + ")");
  }
}

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  validate_covariance(m_);
}

CovarianceMatrix CovarianceMatrix::unchecked(Eigen::MatrixXd m) {
  return CovarianceMatrix(std::move(m), NoCheck{});
}

CovarianceMatrix CovarianceMatrix::identity(Index m) {
  return CovarianceMatrix(Eigen::MatrixXd::Identity(m, m), NoCheck{});
}

CovarianceMatrix CovarianceMatrix::diagonal(const Eigen::VectorXd& d) {
  return CovarianceMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

SystemModel::SystemModel(CovarianceMatrix q)
    : a_(Eigen::VectorXd::Ones(q.dim())), q_(std::move(q)), identity_(true) {}

SystemModel::SystemModel(Eigen::VectorXd a_diag, CovarianceMatrix q)
    : a_(std::move(a_diag)), q_(std::move(q)) {
  if (a_.size() != q_.dim()) throw DomainError("system matrix and Q dimensions differ");
  for (Index i = 0; i < a_.size(); ++i) {
    if (!(a_(i) >= 1.0)) throw DomainError("system matrix diagonal must be >= 1");
  }
  identity_ = (a_.array() == 1.0).all();
}

ProcessState initial_state(const SystemModel& model) {
  return ProcessState{0, Eigen::VectorXd::Zero(model.dim())};
}

CovarianceMatrix make_symmetric_q(Index m, double rho) {
  if (m < 1) throw DomainError("dimension must be positive");
  if (m >= 2 && !(rho <= 1.0 && 1.0 + rho * static_cast<double>(m - 1) > 0.0)) {
    throw DomainError("rho=" + std::to_string(rho) + " makes the symmetric matrix indefinite");
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(m, m, rho);
  q.diagonal().setOnes();
  return CovarianceMatrix::unchecked(std::move(q));
}

CovarianceMatrix make_block_q(Index m, double rho) {
  if (m < 2 || m % 2 != 0) throw DomainError("block scenario needs an even dimension");
  const Index h = m / 2;
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(h, h, rho);
  r.diagonal().setOnes();
  Eigen::MatrixXd q(m, m);
  q.topLeftCorner(h, h) = r;
  q.bottomRightCorner(h, h) = 100.0 * r;
  q.topRightCorner(h, h).setConstant(10.0 * rho);
  q.bottomLeftCorner(h, h).setConstant(10.0 * rho);
  return CovarianceMatrix(std::move(q));
}

CovarianceMatrix make_paired_q(Index m, double rho) {
  if (m < 2 || m % 2 != 0) throw DomainError("paired scenario needs an even dimension");
  const Eigen::MatrixXd base = make_symmetric_q(m / 2, rho).matrix();
  Eigen::MatrixXd q(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) q(i, j) = base(i / 2, j / 2);
  }
  return CovarianceMatrix(std::move(q));
}

Eigen::MatrixXd noise_factor(const CovarianceMatrix& q) {
  const Index n = q.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(q.matrix());
  Eigen::VectorXd lambda = solver.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();
  if (lambda(0) < -kPsdTol * scale) {
    throw DomainError("noise covariance is not positive semidefinite");
  }
  const double rank_tol =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  Index rank = 0;
  for (Index i = 0; i < n; ++i) {
    if (lambda(i) > rank_tol) ++rank;
  }
  // Eigen sorts ascending: the kept eigenpairs are the last `rank` columns.
  Eigen::MatrixXd factor = solver.eigenvectors().rightCols(rank);
  for (Index k = 0; k < rank; ++k) factor.col(k) *= std::sqrt(lambda(n - rank + k));
  return factor;
}

ProcessState step_process(const ProcessState& state, const SystemModel& model,
                          const Eigen::MatrixXd& factor, RandomSource& rng) {
  if (state.x.size() != model.dim() || factor.rows() != model.dim()) {
    throw DomainError("process state dimension does not match the model");
  }
  Eigen::VectorXd z(factor.cols());
  for (Index k = 0; k < z.size(); ++k) z(k) = rng.normal();
  ProcessState next;
  next.t = state.t + 1;
  next.x = model.a().cwiseProduct(state.x) + factor * z;
  return next;
}

ProcessState step_process(const ProcessState& state, const SystemModel& model,
                          RandomSource& rng) {
  return step_process(state, model, noise_factor(model.q()), rng);
}

}  // namespace corrmon
