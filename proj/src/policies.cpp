#include "corrmon/policies.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "corrmon/errors.hpp"
#include "corrmon/kalman.hpp"

namespace corrmon {

namespace {

void require_positive_variances(const CovarianceMatrix& q, const char* who) {
  for (Index i = 0; i < q.dim(); ++i) {
    if (!(q(i, i) > 0.0)) {
      throw DomainError(std::string(who) + ": q_" + std::to_string(i) + " must be positive");
    }
  }
}

// Lowest index attaining the maximum of score(i).
template <typename Score>
Index argmax(Index n, Score score) {
  Index best = 0;
  double best_value = score(0);
  for (Index i = 1; i < n; ++i) {
    const double v = score(i);
    if (v > best_value) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

}  // namespace

AoiVector aoi_step(const AoiVector& h, Index scheduled) {
  if (scheduled < 0 || scheduled >= h.size()) {
    throw IndexError("scheduled sensor " + std::to_string(scheduled) + " out of range");
  }
  AoiVector next = h;
  for (auto& age : next.h) ++age;
  next.h[static_cast<std::size_t>(scheduled)] = 0;
  return next;
}

std::string_view policy_name(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::Mee: return "mee";
    case PolicyKind::Mwa: return "mwa";
    case PolicyKind::Wiee: return "wiee";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Sr: return "sr";
    case PolicyKind::RoundRobin: return "round-robin";
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) noexcept {
  for (PolicyKind k : kAllPolicies) {
    if (policy_name(k) == name) return k;
  }
  return std::nullopt;
}

Index mee_decide(const CovarianceMatrix& p, const CovarianceMatrix& q) {
  require_positive_variances(q, "mee");
  if (p.dim() != q.dim()) throw DomainError("mee: dimension mismatch");
  return argmax(p.dim(), [&](Index i) { return p(i, i) / std::sqrt(q(i, i)); });
}

Index mwa_decide(const AoiVector& h, const CovarianceMatrix& q) {
  require_positive_variances(q, "mwa");
  if (h.size() != q.dim()) throw DomainError("mwa: dimension mismatch");
  return argmax(q.dim(), [&](Index i) { return std::sqrt(q(i, i)) * static_cast<double>(h[i]); });
}

double whittle_index(std::uint64_t h, double a, double q) {
  const double n = static_cast<double>(h) + 1.0;
  if (a == 1.0) return q * n * (n + 1.0) / 2.0;
  const double log_x = 2.0 * std::log(a);
  const double xm1 = std::expm1(log_x);
  if (xm1 < 1e-3 && h < 100000) {
    // Near a = 1 the closed form cancels; sum f(n) - f(k) term by term.
    double sum = 0.0;
    for (std::uint64_t k = 0; k <= h; ++k) {
      const double kk = static_cast<double>(k);
      sum += std::exp(kk * log_x) * std::expm1((n - kk) * log_x) / xm1;
    }
    return q * sum;
  }
  const double r = std::exp(n * log_x);
  if (std::isinf(r)) return std::numeric_limits<double>::infinity();
  return q * (n * r - std::expm1(n * log_x) / xm1) / xm1;
}

double log_whittle_index(std::uint64_t h, double a, double q) {
  const double n = static_cast<double>(h) + 1.0;
  if (a == 1.0) return std::log(q) + std::log(n) + std::log(n + 1.0) - std::log(2.0);
  const double direct = whittle_index(h, a, q);
  if (std::isfinite(direct) && direct > 0.0) return std::log(direct);
  // index = q x^n / (x - 1) * (n - (1 - x^{-n}) / (x - 1)), x = a^2.
  const double log_x = 2.0 * std::log(a);
  const double xm1 = std::expm1(log_x);
  const double bracket = n + std::expm1(-n * log_x) / xm1;
  return std::log(q) + n * log_x - std::log(xm1) + std::log(bracket);
}

Index wiee_decide(const AoiVector& h, const SystemModel& model) {
  const CovarianceMatrix& q = model.q();
  require_positive_variances(q, "wiee");
  if (h.size() != q.dim()) throw DomainError("wiee: dimension mismatch");
  const Eigen::VectorXd& a = model.a();
  return argmax(q.dim(), [&](Index i) { return log_whittle_index(h[i], a(i), q(i, i)); });
}

Index greedy_decide(const CovarianceMatrix& p, const SystemModel& model) {
  return argmax(p.dim(), [&](Index j) { return -successor_trace(p, j, model); });
}

Eigen::VectorXd sr_probabilities(const CovarianceMatrix& q) {
  require_positive_variances(q, "sr");
  Eigen::VectorXd w = q.diag().cwiseSqrt();
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("sr: degenerate weights");
  return w / total;
}

Index sr_decide(const CovarianceMatrix& q, RandomSource& rng) {
  const Eigen::VectorXd prob = sr_probabilities(q);
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (Index i = 0; i < prob.size(); ++i) {
    cumulative += prob(i);
    if (u < cumulative) return i;
  }
  return prob.size() - 1;
}

Index Scheduler::decide(const DecisionContext& ctx) {
  switch (spec_.kind) {
    case PolicyKind::Mee: return mee_decide(ctx.p, ctx.model.q());
    case PolicyKind::Mwa: return mwa_decide(ctx.h, ctx.model.q());
    case PolicyKind::Wiee: return wiee_decide(ctx.h, ctx.model);
    case PolicyKind::Greedy: return greedy_decide(ctx.p, ctx.model);
    case PolicyKind::Sr: return sr_decide(ctx.model.q(), rng_);
    case PolicyKind::RoundRobin:
      return static_cast<Index>(ctx.t % static_cast<std::size_t>(ctx.model.dim()));
  }
  throw DomainError("unknown policy");
}

}  // namespace corrmon
