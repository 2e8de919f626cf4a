#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corrmon/model.hpp"
#include "corrmon/random.hpp"

namespace corrmon {

/// Per-sensor Age of Information: slots since each sensor was last scheduled.
struct AoiVector {
  std::vector<std::uint64_t> h;

  static AoiVector zeros(Index m) { return AoiVector{std::vector<std::uint64_t>(m, 0)}; }
  Index size() const noexcept { return static_cast<Index>(h.size()); }
  std::uint64_t operator[](Index i) const { return h[static_cast<std::size_t>(i)]; }
  bool operator==(const AoiVector&) const = default;
};

/// h'_i = h_i + 1 for i != scheduled, h'_scheduled = 0.
AoiVector aoi_step(const AoiVector& h, Index scheduled);

enum class PolicyKind : std::uint8_t { Mee, Mwa, Wiee, Greedy, Sr, RoundRobin };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::Mee,    PolicyKind::Mwa,
                                              PolicyKind::Wiee,   PolicyKind::Greedy,
                                              PolicyKind::Sr,     PolicyKind::RoundRobin};

/// CLI names: "mee", "mwa", "wiee", "greedy", "sr", "round-robin".
std::string_view policy_name(PolicyKind kind) noexcept;
std::optional<PolicyKind> parse_policy(std::string_view name) noexcept;

/// Ties resolve to the lowest index in every decision rule.
struct PolicySpec {
  PolicyKind kind = PolicyKind::Mwa;

  bool randomized() const noexcept { return kind == PolicyKind::Sr; }
  bool operator==(const PolicySpec&) const = default;
};

/// argmax_i p_ii / sqrt(q_ii).
Index mee_decide(const CovarianceMatrix& p, const CovarianceMatrix& q);

/// argmax_i sqrt(q_ii) * h_i, with h the ages before the current decision.
Index mwa_decide(const AoiVector& h, const CovarianceMatrix& q);

/// Whittle index of a sensor with age h, growth a and variance q:
///   (h+1) f(h+1) - sum_{k=0..h} f(k),  f(x) = q (a^{2x} - 1) / (a^2 - 1)
/// (f(x) = q x when a = 1). Overflows to +inf for very large h log a.
double whittle_index(std::uint64_t h, double a, double q);

/// log of whittle_index, finite for any h. Decisions compare these.
double log_whittle_index(std::uint64_t h, double a, double q);

Index wiee_decide(const AoiVector& h, const SystemModel& model);

/// Sensor whose one-step successor covariance has the smallest trace.
Index greedy_decide(const CovarianceMatrix& p, const SystemModel& model);

/// Stationary randomized draw: P(i) = sqrt(q_ii) / sum_j sqrt(q_jj).
Index sr_decide(const CovarianceMatrix& q, RandomSource& rng);

/// Probabilities used by sr_decide.
Eigen::VectorXd sr_probabilities(const CovarianceMatrix& q);

/// Observable state a policy may consult at the start of slot t.
struct DecisionContext {
  std::size_t t;
  const CovarianceMatrix& p;  // a-priori P_t
  const AoiVector& h;         // ages h(t-1)
  const SystemModel& model;
};

/// Stateful wrapper that dispatches on the policy kind. Only SR consumes
/// the random source.
class Scheduler {
 public:
  Scheduler(PolicySpec spec, RandomSource rng) : spec_(spec), rng_(std::move(rng)) {}

  Index decide(const DecisionContext& ctx);
  const PolicySpec& spec() const noexcept { return spec_; }

 private:
  PolicySpec spec_;
  RandomSource rng_;
};

}  // namespace corrmon
