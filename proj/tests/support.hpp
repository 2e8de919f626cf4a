#pragma once

// Test-side reference implementations and generators. Everything here is
// written from the defining formulas with no shortcuts shared with the
// library, so agreement is evidence rather than tautology.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace testing_support {

/// Small hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

  /// G G^T / m + floor I: positive definite, moderately conditioned.
  Eigen::MatrixXd spd(int m, double floor = 0.05) {
    Eigen::MatrixXd g(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) g(i, j) = normal();
    Eigen::MatrixXd q = g * g.transpose() / m;
    q.diagonal().array() += floor;
    return 0.5 * (q + q.transpose());
  }

  /// Rank-r PSD matrix F F^T.
  Eigen::MatrixXd psd_rank(int m, int r) {
    Eigen::MatrixXd f(m, r);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < r; ++j) f(i, j) = normal();
    Eigen::MatrixXd q = f * f.transpose();
    return 0.5 * (q + q.transpose());
  }

  std::vector<long> schedule(int m, int t) {
    std::vector<long> s(t);
    for (auto& v : s) v = integer(0, m - 1);
    return s;
  }

 private:
  std::mt19937_64 eng_;
};

/// A (P - P c c^T P / c^T P c) A^T + Q with dense matrices, no symmetrizing.
inline Eigen::MatrixXd ref_step(const Eigen::MatrixXd& p, const Eigen::VectorXd& c,
                                const Eigen::VectorXd& a, const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd am = a.asDiagonal();
  const Eigen::MatrixXd post = p - (p * c) * (c.transpose() * p) / (c.transpose() * p * c)(0, 0);
  return am * post * am.transpose() + q;
}

inline Eigen::VectorXd unit(int m, int j) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
  e(j) = 1.0;
  return e;
}

/// q~_ii = 1 / (Q^{-1})_ii, the conditional-variance identity.
inline Eigen::VectorXd ref_schur(const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd inv = q.fullPivLu().inverse();
  return inv.diagonal().cwiseInverse();
}

/// f(x) = q (a^{2x} - 1) / (a^2 - 1), or q x at a = 1.
inline double ref_f(double x, double a, double q) {
  if (a == 1.0) return q * x;
  return q * (std::pow(a, 2.0 * x) - 1.0) / (a * a - 1.0);
}

/// (h+1) f(h+1) - sum_{k=0}^{h} f(k), summed literally.
inline double ref_whittle(std::uint64_t h, double a, double q) {
  double s = 0.0;
  for (std::uint64_t k = 0; k <= h; ++k) s += ref_f(static_cast<double>(k), a, q);
  return static_cast<double>(h + 1) * ref_f(static_cast<double>(h + 1), a, q) - s;
}

/// sum_{k=0}^{h-1} a^{2k}, summed literally.
inline double ref_geometric(std::uint64_t h, double a) {
  double s = 0.0;
  for (std::uint64_t k = 0; k < h; ++k) s += std::pow(a, 2.0 * static_cast<double>(k));
  return s;
}

inline double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

/// Eigenvalues, largest first.
inline Eigen::VectorXd eig_desc(const Eigen::MatrixXd& m) {
  Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
  return ev.reverse();
}

}  // namespace testing_support
