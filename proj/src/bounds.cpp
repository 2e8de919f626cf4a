#include "corrmon/bounds.hpp"

#include <cmath>
#include <string>

#include "corrmon/errors.hpp"
#include "corrmon/linalg.hpp"

namespace corrmon {

namespace {

constexpr double kMaxCondition = 1e12;

double sum_sqrt(const Eigen::VectorXd& v) { return v.cwiseSqrt().sum(); }

}  // namespace

Eigen::VectorXd schur_weights(const CovarianceMatrix& q) {
  const Index m = q.dim();
  if (m == 1) return q.diag();
  // Eigenvalues of every Q_{-i} interlace those of Q, so one condition
  // check on Q covers all the principal submatrices.
  const Eigen::VectorXd ev = linalg::eigenvalues_descending(q.matrix());
  const double lmin = ev(m - 1);
  if (!(lmin > 0.0) || ev(0) / lmin > kMaxCondition) {
    throw SingularMatrix("schur weights need an invertible Q (condition " +
                         std::to_string(lmin > 0.0 ? ev(0) / lmin : INFINITY) + ")");
  }
  Eigen::VectorXd out(m);
  for (Index i = 0; i < m; ++i) {
    const Eigen::MatrixXd rest = linalg::remove_index(q.matrix(), i);
    const Eigen::VectorXd qi = linalg::column_without(q.matrix(), i);
    Eigen::LLT<Eigen::MatrixXd> llt(rest);
    if (llt.info() != Eigen::Success) throw SingularMatrix("Q_{-i} is not positive definite");
    out(i) = q(i, i) - qi.dot(llt.solve(qi));
  }
  return out;
}

double age_weight(std::uint64_t h, double a, AgeWeight form) {
  const double terms = static_cast<double>(h) + (form == AgeWeight::InclusiveSum ? 1.0 : 0.0);
  if (a == 1.0) return terms;
  const double log_x = 2.0 * std::log(a);
  return std::expm1(terms * log_x) / std::expm1(log_x);
}

std::vector<BoundPair> per_step_bounds(const AoiVector& h, const SystemModel& model,
                                       AgeWeight form) {
  return per_step_bounds(h, model, schur_weights(model.q()), form);
}

std::vector<BoundPair> per_step_bounds(const AoiVector& h, const SystemModel& model,
                                       const Eigen::VectorXd& qtilde, AgeWeight form) {
  if (h.size() != model.dim() || qtilde.size() != model.dim()) {
    throw DomainError("per_step_bounds: dimension mismatch");
  }
  std::vector<BoundPair> out(static_cast<std::size_t>(model.dim()));
  for (Index i = 0; i < model.dim(); ++i) {
    const double g = age_weight(h[i], model.a()(i), form);
    out[static_cast<std::size_t>(i)] = BoundPair{qtilde(i) * g, model.q()(i, i) * g};
  }
  return out;
}

BoundPair full_rank_scaling_bounds(const CovarianceMatrix& q) {
  const Eigen::VectorXd qt = schur_weights(q);
  const Eigen::VectorXd qd = q.diag();
  const double s_lo = sum_sqrt(qt);
  const double s_hi = sum_sqrt(qd);
  return BoundPair{0.5 * s_lo * s_lo - 0.5 * qt.sum(), s_hi * s_hi - qd.sum()};
}

LowRankReduction low_rank_reduce(const CovarianceMatrix& q, double rank_tol) {
  const Index m = q.dim();
  const Eigen::MatrixXd& Q = q.matrix();
  const Eigen::VectorXd ev = linalg::eigenvalues_descending(Q);
  const double threshold = rank_tol * ev(0);
  const Index numerical_rank = (ev.array() > threshold).count();
  if (numerical_rank == m) throw FullRank("Q has full rank " + std::to_string(m));
  if (numerical_rank == 0) throw DomainError("Q is numerically zero");

  // Residuals of nearly dependent rows carry roundoff of order
  // eps * cond(Q_KK) * lambda_max, so the eigenvalue count caps the pass.
  std::vector<Index> kept;
  std::vector<Index> dependent;
  for (Index i = 0; i < m; ++i) {
    if (static_cast<Index>(kept.size()) == numerical_rank) {
      dependent.push_back(i);
      continue;
    }
    double residual = Q(i, i);
    if (!kept.empty()) {
      const Index k = static_cast<Index>(kept.size());
      Eigen::MatrixXd qkk(k, k);
      Eigen::VectorXd qki(k);
      for (Index r = 0; r < k; ++r) {
        qki(r) = Q(kept[r], i);
        for (Index c = 0; c < k; ++c) qkk(r, c) = Q(kept[r], kept[c]);
      }
      residual -= qki.dot(qkk.llt().solve(qki));
    }
    if (residual > threshold) {
      kept.push_back(i);
    } else {
      dependent.push_back(i);
    }
  }
  const Index rank = static_cast<Index>(kept.size());
  if (rank != numerical_rank) {
    throw DomainError("pivoted selection found " + std::to_string(rank) +
                      " independent rows but Q has numerical rank " +
                      std::to_string(numerical_rank));
  }

  Eigen::MatrixXd qkk(rank, rank);
  for (Index r = 0; r < rank; ++r) {
    for (Index c = 0; c < rank; ++c) qkk(r, c) = Q(kept[r], kept[c]);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(qkk);
  Eigen::MatrixXd alpha(m - rank, rank);
  for (Index r = 0; r < m - rank; ++r) {
    Eigen::VectorXd qki(rank);
    for (Index c = 0; c < rank; ++c) qki(c) = Q(kept[c], dependent[r]);
    alpha.row(r) = llt.solve(qki).transpose();
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, rank);
  for (Index k = 0; k < rank; ++k) h(kept[k], k) = 1.0;
  for (Index r = 0; r < m - rank; ++r) h.row(dependent[r]) = alpha.row(r);

  return LowRankReduction{std::move(kept), std::move(dependent), std::move(alpha),
                          CovarianceMatrix(qkk), std::move(h)};
}

LowRankBounds low_rank_scaling_bounds(const CovarianceMatrix& q, double rank_tol) {
  const LowRankReduction red = low_rank_reduce(q, rank_tol);
  const Index l = red.rank();
  const double lambda_l = linalg::min_eigenvalue(red.q_reduced.matrix());
  const Eigen::VectorXd qd = red.q_reduced.diag();
  const double s = sum_sqrt(qd);

  LowRankBounds out;
  out.rank = l;
  out.c = linalg::max_eigenvalue(Eigen::MatrixXd::Identity(l, l) +
                                 red.alpha.transpose() * red.alpha);
  out.lower_raw = 0.5 * static_cast<double>(l * (l + 1)) * lambda_l - q.trace();
  out.lower_vacuous = out.lower_raw < 0.0;
  out.bounds = BoundPair{std::max(out.lower_raw, 0.0), out.c * (s * s - qd.sum())};
  return out;
}

GeneralALowerBound general_a_lower_bound(const SystemModel& model) {
  const Eigen::VectorXd aat = model.a().array().square();
  const double l = aat.minCoeff();
  const double big = aat.maxCoeff();
  if (!(l > 1.0 + 1e-12)) {
    throw DomainError("general-A lower bound needs A > I strictly");
  }
  const double m = static_cast<double>(model.dim());
  const double lambda_q = linalg::min_eigenvalue(model.q().matrix());
  const double num = std::pow(l, m + 1.0) - (m + 1.0) * l - m;
  GeneralALowerBound out;
  out.raw = num / (big * (l - 1.0) * (l - 1.0)) * lambda_q - model.q().trace() / big;
  out.vacuous = out.raw < 0.0;
  out.value = std::max(out.raw, 0.0);
  return out;
}

double guarantee_ratio(const CovarianceMatrix& q) {
  const Eigen::VectorXd qt = schur_weights(q);
  const Eigen::VectorXd qd = q.diag();
  const double s_hi = sum_sqrt(qd);
  const double s_lo = sum_sqrt(qt);
  const double denom = s_lo * s_lo - qt.sum();
  if (!(denom > 1e-12)) {
    throw DegenerateBound("guarantee ratio denominator " + std::to_string(denom));
  }
  return 2.0 * (s_hi * s_hi - qd.sum()) / denom;
}

}  // namespace corrmon
