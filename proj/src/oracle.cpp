#include "corrmon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "corrmon/bounds.hpp"
#include "corrmon/errors.hpp"
#include "corrmon/kalman.hpp"
#include "corrmon/linalg.hpp"

namespace corrmon {

namespace {

struct Branch {
  std::vector<Index> schedule;
  double total = std::numeric_limits<double>::infinity();
  std::uint64_t evaluated = 0;
};

// Depth-first enumeration below a fixed prefix. Children are visited in
// index order and only a strictly smaller total replaces the incumbent, so
// the first optimum met (the lexicographically smallest) is kept.
class Enumerator {
 public:
  Enumerator(const SystemModel& model, std::size_t horizon)
      : model_(model), horizon_(horizon), schedule_(horizon) {}

  Branch run(const CovarianceMatrix& p, Index first) {
    schedule_[0] = first;
    const CovarianceMatrix next = covariance_step(p, first, model_);
    visit(next, 1, next.trace());
    return best_;
  }

 private:
  void visit(const CovarianceMatrix& p, std::size_t depth, double total) {
    if (depth == horizon_) {
      ++best_.evaluated;
      if (total < best_.total) {
        best_.total = total;
        best_.schedule = schedule_;
      }
      return;
    }
    for (Index j = 0; j < model_.dim(); ++j) {
      schedule_[depth] = j;
      const CovarianceMatrix next = covariance_step(p, j, model_);
      visit(next, depth + 1, total + next.trace());
    }
  }

  const SystemModel& model_;
  std::size_t horizon_;
  std::vector<Index> schedule_;
  Branch best_;
};

void require_positive_definite(const CovarianceMatrix& a, const char* who) {
  const Eigen::VectorXd ev = linalg::eigenvalues_descending(a.matrix());
  const double lmin = ev(ev.size() - 1);
  if (!(lmin > 0.0) || ev(0) / lmin > 1e12) {
    throw SingularMatrix(std::string(who) + ": matrix is not positive definite");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

OracleResult dp_optimal_schedule(const SystemModel& model, const CovarianceMatrix& p0,
                                 std::size_t horizon, std::uint64_t budget, unsigned threads) {
  if (horizon == 0) throw DomainError("dp_optimal_schedule: horizon must be at least 1");
  if (p0.dim() != model.dim()) throw DomainError("dp_optimal_schedule: dimension mismatch");
  const auto m = static_cast<std::uint64_t>(model.dim());
  std::uint64_t count = 1;
  for (std::size_t t = 0; t < horizon; ++t) {
    if (count > budget / m) {
      throw BudgetExceeded("M^T exceeds the schedule budget of " + std::to_string(budget));
    }
    count *= m;
  }

  std::vector<Branch> branches(static_cast<std::size_t>(m));
  auto work = [&](Index first) {
    Enumerator e(model, horizon);
    branches[static_cast<std::size_t>(first)] = e.run(p0, first);
  };
  const unsigned workers = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(m));
  if (workers == 1) {
    for (Index j = 0; j < model.dim(); ++j) work(j);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (Index j = w; j < model.dim(); j += workers) work(j);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  OracleResult out;
  double best = std::numeric_limits<double>::infinity();
  for (const Branch& b : branches) {
    out.evaluated_count += b.evaluated;
    if (b.total < best) {
      best = b.total;
      out.best_schedule = b.schedule;
    }
  }
  out.best_avg_trace = best / static_cast<double>(horizon);
  return out;
}

double schedule_average_trace(const SystemModel& model, const CovarianceMatrix& p0,
                              const std::vector<Index>& schedule) {
  if (schedule.empty()) throw DomainError("schedule_average_trace: empty schedule");
  CovarianceMatrix p = p0;
  double total = 0.0;
  for (Index j : schedule) {
    p = covariance_step(p, j, model);
    total += p.trace();
  }
  return total / static_cast<double>(schedule.size());
}

std::vector<Index> rollout_schedule(const SystemModel& model, const CovarianceMatrix& p0,
                                    PolicySpec policy, std::size_t horizon, RandomSource rng) {
  Scheduler scheduler(policy, std::move(rng));
  CovarianceMatrix p = p0;
  AoiVector h = AoiVector::zeros(model.dim());
  std::vector<Index> schedule;
  schedule.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const Index j = scheduler.decide(DecisionContext{t, p, h, model});
    schedule.push_back(j);
    p = covariance_step(p, j, model);
    h = aoi_step(h, j);
  }
  return schedule;
}

MaxRatioReport max_ratio_check(const Eigen::VectorXd& p, const CovarianceMatrix& a,
                               std::size_t trials, RandomSource& rng) {
  if (p.size() != a.dim()) throw DomainError("max_ratio_check: dimension mismatch");
  require_positive_definite(a, "max_ratio_check");
  const Eigen::MatrixXd& am = a.matrix();
  const Eigen::LLT<Eigen::MatrixXd> llt(am);
  const Eigen::VectorXd bstar = llt.solve(p);

  auto ratio = [&](const Eigen::VectorXd& b) {
    const double num = b.dot(p);
    return num * num / b.dot(am * b);
  };

  MaxRatioReport r;
  r.closed_form = p.dot(bstar);
  const double tol = 1e-9 * std::max(1.0, r.closed_form);
  r.attained = p.isZero(0.0) ? 0.0 : ratio(bstar);
  Eigen::VectorXd b(p.size());
  for (std::size_t k = 0; k < trials; ++k) {
    for (Index i = 0; i < b.size(); ++i) b(i) = rng.normal();
    if (b.isZero(0.0)) continue;
    r.max_sampled = std::max(r.max_sampled, ratio(b));
  }
  r.passed = r.max_sampled <= r.closed_form + tol && std::abs(r.attained - r.closed_form) <= tol;
  return r;
}

PsdOrderReport psd_inverse_order_check(const CovarianceMatrix& a, const CovarianceMatrix& b) {
  PsdOrderReport r;
  if (a.dim() != b.dim()) throw DomainError("psd_inverse_order_check: dimension mismatch");
  const double scale = std::max(linalg::max_abs(a.matrix()), linalg::max_abs(b.matrix()));
  r.applicable = linalg::min_eigenvalue(a.matrix() - b.matrix()) >= -1e-12 * scale;
  if (!r.applicable) return r;
  const Eigen::LLT<Eigen::MatrixXd> la(a.matrix());
  const Eigen::LLT<Eigen::MatrixXd> lb(b.matrix());
  if (la.info() != Eigen::Success || lb.info() != Eigen::Success) {
    r.applicable = false;
    return r;
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.dim(), a.dim());
  const Eigen::MatrixXd binv = lb.solve(id);
  const Eigen::MatrixXd diff = binv - la.solve(id);
  r.min_eig_difference = linalg::min_eigenvalue(0.5 * (diff + diff.transpose()));
  r.passed = r.min_eig_difference >= -1e-9 * std::max(1.0, linalg::max_eigenvalue(binv));
  return r;
}

TrajectoryReport lower_bound_trajectory_check(const CovarianceMatrix& q, std::size_t horizon) {
  const Index m = q.dim();
  const Eigen::VectorXd qt = schur_weights(q);
  const SystemModel model(q);
  const double pin_tol = 1e-9 * std::max(1.0, linalg::max_abs(q.matrix()));

  TrajectoryReport r;
  r.min_slack = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m; ++i) {
    CovarianceMatrix p = q;
    for (std::size_t t = 0; t < horizon; ++t) {
      if (t == 0) {
        p = covariance_step(p, i, model);
      } else if (m == 1) {
        // Nothing else to observe.
        p = CovarianceMatrix::unchecked(p.matrix() + q.matrix());
      } else {
        const Eigen::MatrixXd rest = linalg::remove_index(p.matrix(), i);
        const Eigen::VectorXd cross = linalg::column_without(p.matrix(), i);
        const Eigen::VectorXd b = rest.llt().solve(cross);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
        for (Index k = 0, j = 0; k < m; ++k) {
          if (k != i) c(k) = b(j++);
        }
        const double pivot = cross.dot(b);
        if (pivot > 1e-10 * p.trace()) {
          p = covariance_step(p, c, model);
        } else {
          // No usable correlation left: any other sensor will do.
          p = covariance_step(p, i == 0 ? Index{1} : Index{0}, model);
        }
      }
      const double h = static_cast<double>(t);
      r.min_slack = std::min(r.min_slack, p(i, i) - q(i, i) - h * qt(i));
      const Eigen::VectorXd dev =
          linalg::column_without(p.matrix(), i) - linalg::column_without(q.matrix(), i);
      if (dev.size() > 0) r.max_pin_deviation = std::max(r.max_pin_deviation, dev.norm());
      ++r.steps;
    }
  }
  r.passed = r.min_slack >= -1e-9 && r.max_pin_deviation <= pin_tol;
  return r;
}

CovarianceMatrix random_covariance(Index m, RandomSource& rng, double floor) {
  Eigen::MatrixXd b(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) b(i, j) = rng.normal();
  }
  Eigen::MatrixXd q = b * b.transpose() / static_cast<double>(m);
  q.diagonal().array() += floor;
  return CovarianceMatrix(0.5 * (q + q.transpose()));
}

std::vector<SuiteResult> run_lemma_suite(std::uint64_t seed, std::size_t cases) {
  const RandomSource root(seed);
  std::vector<SuiteResult> out;

  {
    SuiteResult s{"max_ratio", true, 0, ""};
    RandomSource rng = root.split({1});
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cases; ++k) {
      const Index m = 1 + static_cast<Index>(k % 8);
      const CovarianceMatrix a = random_covariance(m, rng);
      Eigen::VectorXd p(m);
      for (Index i = 0; i < m; ++i) p(i) = rng.normal();
      const MaxRatioReport r = max_ratio_check(p, a, 200, rng);
      worst = std::max(worst, (r.max_sampled - r.closed_form) / std::max(1.0, r.closed_form));
      s.passed = s.passed && r.passed;
      ++s.cases;
    }
    s.detail = "worst relative excess " + fmt(worst);
    out.push_back(std::move(s));
  }

  {
    SuiteResult s{"psd_inverse_order", true, 0, ""};
    RandomSource rng = root.split({2});
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cases; ++k) {
      const Index m = 1 + static_cast<Index>(k % 8);
      const CovarianceMatrix b = random_covariance(m, rng);
      const Index rank = 1 + static_cast<Index>(k % static_cast<std::size_t>(m));
      Eigen::MatrixXd g(m, rank);
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < rank; ++j) g(i, j) = rng.normal();
      }
      const CovarianceMatrix a = CovarianceMatrix::unchecked(b.matrix() + g * g.transpose());
      const PsdOrderReport r = psd_inverse_order_check(a, b);
      if (!r.applicable) {
        s.passed = false;
        s.detail = "constructed pair not ordered";
        break;
      }
      worst = std::min(worst, r.min_eig_difference);
      s.passed = s.passed && r.passed;
      ++s.cases;
    }
    if (s.detail.empty()) s.detail = "min eigenvalue of difference " + fmt(worst);
    out.push_back(std::move(s));
  }

  {
    SuiteResult s{"lower_bound_trajectory", true, 0, ""};
    RandomSource rng = root.split({3});
    double worst_slack = std::numeric_limits<double>::infinity();
    double worst_pin = 0.0;
    for (std::size_t k = 0; k < cases; ++k) {
      const Index m = 1 + static_cast<Index>(k % 6);
      const CovarianceMatrix q = random_covariance(m, rng);
      const TrajectoryReport r = lower_bound_trajectory_check(q, 30);
      worst_slack = std::min(worst_slack, r.min_slack);
      worst_pin = std::max(worst_pin, r.max_pin_deviation);
      s.passed = s.passed && r.passed;
      ++s.cases;
    }
    s.detail = "min slack " + fmt(worst_slack) + ", max pin deviation " + fmt(worst_pin);
    out.push_back(std::move(s));
  }

  {
    SuiteResult s{"low_rank_reconstruction", true, 0, ""};
    RandomSource rng = root.split({4});
    double worst = 0.0;
    for (std::size_t k = 0; k < cases; ++k) {
      const Index m = 2 + static_cast<Index>(k % 7);
      const Index rank = 1 + static_cast<Index>((k / 7) % static_cast<std::size_t>(m - 1));
      Eigen::MatrixXd f(m, rank);
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < rank; ++j) f(i, j) = rng.normal();
      }
      const Eigen::MatrixXd qm = f * f.transpose();
      const CovarianceMatrix q = CovarianceMatrix::unchecked(0.5 * (qm + qm.transpose()));
      const LowRankReduction red = low_rank_reduce(q);
      const Eigen::MatrixXd rebuilt =
          red.h_matrix * red.q_reduced.matrix() * red.h_matrix.transpose();
      const double err = linalg::max_abs(rebuilt - q.matrix()) / linalg::max_abs(q.matrix());
      worst = std::max(worst, err);
      s.passed = s.passed && red.rank() == rank && err <= 1e-8;
      ++s.cases;
    }
    s.detail = "max relative reconstruction error " + fmt(worst);
    out.push_back(std::move(s));
  }

  {
    SuiteResult s{"wiee_mwa_identity", true, 0, ""};
    RandomSource rng = root.split({5});
    std::size_t mismatches = 0;
    for (std::size_t k = 0; k < cases; ++k) {
      const Index m = 2 + static_cast<Index>(k % 7);
      // Equal variances: rescale a random covariance to a correlation matrix
      // times a common variance.
      const CovarianceMatrix raw = random_covariance(m, rng);
      const Eigen::VectorXd inv_sd = raw.diag().cwiseSqrt().cwiseInverse();
      const double var = 0.5 + 2.0 * rng.uniform();
      Eigen::MatrixXd qm = var * (inv_sd.asDiagonal() * raw.matrix() * inv_sd.asDiagonal());
      qm.diagonal().setConstant(var);
      const SystemModel model(CovarianceMatrix::unchecked(0.5 * (qm + qm.transpose())));
      const auto w = rollout_schedule(model, model.q(), {PolicyKind::Wiee}, 100, rng.split({k}));
      const auto g = rollout_schedule(model, model.q(), {PolicyKind::Mwa}, 100, rng.split({k}));
      if (w != g) ++mismatches;
      ++s.cases;
    }
    s.passed = mismatches == 0;
    s.detail = std::to_string(mismatches) + " diverging schedules";
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SuiteResult> run_oracle_suite(std::uint64_t seed, std::size_t instances) {
  const RandomSource root(seed);
  std::vector<SuiteResult> out;

  {
    SuiteResult s{"oracle_dominance", true, 0, ""};
    RandomSource rng = root.split({10});
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < instances; ++k) {
      const Index m = 1 + static_cast<Index>(k % 3);
      const std::size_t horizon = 4 + static_cast<std::size_t>(k % 7);
      const CovarianceMatrix q = random_covariance(m, rng);
      Eigen::VectorXd a = Eigen::VectorXd::Ones(m);
      if (k % 2 == 1) {
        for (Index i = 0; i < m; ++i) a(i) = 1.0 + 0.3 * rng.uniform();
      }
      const SystemModel model(a, q);
      const OracleResult best = dp_optimal_schedule(model, q, horizon);
      for (PolicyKind kind : kAllPolicies) {
        const auto sched = rollout_schedule(model, q, {kind}, horizon, rng.split({k}));
        const double avg = schedule_average_trace(model, q, sched);
        const double slack = avg - best.best_avg_trace;
        worst = std::min(worst, slack);
        if (slack < -1e-9 * std::max(1.0, best.best_avg_trace)) s.passed = false;
      }
      ++s.cases;
    }
    s.detail = "min policy-minus-optimum gap " + fmt(worst);
    out.push_back(std::move(s));
  }

  {
    SuiteResult s{"round_robin_identity_value", true, 1, ""};
    const SystemModel model(CovarianceMatrix::identity(2));
    const std::size_t horizon = 20000;
    const auto sched =
        rollout_schedule(model, model.q(), {PolicyKind::RoundRobin}, horizon, root.split({11}));
    CovarianceMatrix p = model.q();
    double total = 0.0;
    for (Index j : sched) {
      p = covariance_step(p, j, model);
      total += expected_error(p, model).sum();
    }
    const double avg = total / static_cast<double>(horizon);
    const double lb = full_rank_scaling_bounds(model.q()).lower;
    s.passed = std::abs(avg - 1.0) <= 1e-6 && std::abs(avg - lb) <= 1e-6;
    s.detail = "average error " + fmt(avg) + ", lower bound " + fmt(lb);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace corrmon
