#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "corrmon/model.hpp"
#include "corrmon/policies.hpp"

namespace corrmon {

struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
};

/// Schur-complement weights q~_ii = q_ii - q_i^T Q_{-i}^{-1} q_i: the
/// residual variance of sensor i's increment given every other increment.
/// Each Q_{-i} is factored with an eigenvalue condition check; condition
/// numbers above 1e12 raise SingularMatrix.
Eigen::VectorXd schur_weights(const CovarianceMatrix& q);

/// Which geometric age weight to use for a_ii > 1.
enum class AgeWeight {
  /// (a^{2h} - 1) / (a^2 - 1) = sum_{k=0}^{h-1} a^{2k}; reduces to h at a = 1
  /// and is exact for uncorrelated sensors.
  ClosedForm,
  /// sum_{k=0}^{h} a^{2k}, one extra term.
  InclusiveSum,
};

/// Age weight G(h) for growth rate a.
double age_weight(std::uint64_t h, double a, AgeWeight form = AgeWeight::ClosedForm);

/// Per-sensor sandwich (q~_ii G(h_i), q_ii G(h_i)) on the expected error of
/// the slot whose post-decision ages are `h`.
std::vector<BoundPair> per_step_bounds(const AoiVector& h, const SystemModel& model,
                                       AgeWeight form = AgeWeight::ClosedForm);

/// Same, reusing precomputed Schur weights.
std::vector<BoundPair> per_step_bounds(const AoiVector& h, const SystemModel& model,
                                       const Eigen::VectorXd& qtilde,
                                       AgeWeight form = AgeWeight::ClosedForm);

/// Bracket on the optimal long-run average error for invertible Q:
///   LB = (sum sqrt q~)^2 / 2 - sum q~ / 2,   UB = (sum sqrt q)^2 - sum q.
BoundPair full_rank_scaling_bounds(const CovarianceMatrix& q);

/// Rank-L reduction of a singular Q. Indices are 0-based and ascending.
///
/// `h_matrix` is the M x L lifting matrix: row kept[k] is e_k^T, row
/// dependent[r] is alpha.row(r). Up to a row permutation it is [I; alpha],
/// and Q = H Q' H^T.
struct LowRankReduction {
  std::vector<Index> kept;
  std::vector<Index> dependent;
  Eigen::MatrixXd alpha;  // (M-L) x L
  CovarianceMatrix q_reduced;
  Eigen::MatrixXd h_matrix;

  Index rank() const noexcept { return static_cast<Index>(kept.size()); }
};

/// Greedy pivoted selection of the first L linearly independent rows of Q.
/// A row joins when its residual variance given the kept rows exceeds
/// rank_tol * lambda_max(Q); L is the number of eigenvalues above that
/// threshold. Throws FullRank when L == M.
LowRankReduction low_rank_reduce(const CovarianceMatrix& q, double rank_tol = 1e-10);

struct LowRankBounds {
  BoundPair bounds;       // lower clamped at 0
  double lower_raw = 0.0; // L(L+1)/2 lambda_L(Q') - tr Q, unclamped
  bool lower_vacuous = false;
  double c = 1.0;         // lambda_1(I + alpha^T alpha)
  Index rank = 0;
};

/// LB = L(L+1)/2 lambda_L(Q') - tr Q,  UB = c ((sum sqrt q'_ii)^2 - sum q'_ii).
LowRankBounds low_rank_scaling_bounds(const CovarianceMatrix& q, double rank_tol = 1e-10);

struct GeneralALowerBound {
  double value = 0.0;  // clamped at 0
  double raw = 0.0;
  bool vacuous = false;
};

/// Universal lower bound on the long-run average error for A > I:
///   [l^{M+1} - (M+1) l - M] / [L (l - 1)^2] lambda_M(Q) - tr Q / L
/// with l = lambda_M(A A^T), L = lambda_1(A A^T).
/// Throws DomainError unless l > 1 + 1e-12.
GeneralALowerBound general_a_lower_bound(const SystemModel& model);

/// 2 ((sum sqrt q)^2 - sum q) / ((sum sqrt q~)^2 - sum q~): the MEE/MWA
/// optimality factor. Throws DegenerateBound when the denominator <= 1e-12.
double guarantee_ratio(const CovarianceMatrix& q);

}  // namespace corrmon
