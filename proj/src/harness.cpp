#include "corrmon/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "corrmon/bounds.hpp"
#include "corrmon/kalman.hpp"

namespace corrmon {

namespace {

enum StreamPurpose : std::uint64_t { kPolicyStream = 0, kNoiseStream = 1 };

std::uint64_t policy_key(PolicyKind k) { return static_cast<std::uint64_t>(k); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ls(line);
  while (std::getline(ls, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

template <typename T>
T parse_int(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

unsigned worker_count() {
  if (const char* env = std::getenv("CORRMON_THREADS")) {
    unsigned n = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc() && ptr == s.data() + s.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrajectoryResult run_trajectory(const ExperimentConfig& config, PolicySpec policy, Index m,
                                double rho, bool keep_records) {
  validate_config(config);
  const SystemModel model = build_model(config, m, rho);
  const Index dim = model.dim();
  const Eigen::VectorXd qd = model.q().diag();
  const Eigen::VectorXd& a = model.a();
  std::optional<Eigen::VectorXd> qtilde;
  try {
    qtilde = schur_weights(model.q());
  } catch (const SingularMatrix&) {
  }

  const bool monte_carlo = config.mode == RunMode::MonteCarlo;
  const std::size_t reps = monte_carlo ? config.replications : 1;
  const RandomSource root(config.seed);
  const std::uint64_t cell_m = static_cast<std::uint64_t>(m);
  const std::uint64_t cell_rho = std::bit_cast<std::uint64_t>(rho);
  const Eigen::MatrixXd factor = monte_carlo ? noise_factor(model.q()) : Eigen::MatrixXd();
  const double span = static_cast<double>(config.horizon - config.burn_in);

  TrajectoryResult result;
  result.summary.policy = policy.kind;
  result.summary.m = dim;
  result.summary.rho = rho;
  if (keep_records) result.records.reserve(config.horizon);
  double err_total = 0.0;
  double lb_total = 0.0;
  double ub_total = 0.0;
  double realized_total = 0.0;

  for (std::size_t r = 0; r < reps; ++r) {
    Scheduler scheduler(policy,
                        root.split({policy_key(policy.kind), r, kPolicyStream, cell_m, cell_rho}));
    RandomSource noise = root.split({r, kNoiseStream, cell_m, cell_rho});
    KalmanState filter = initial_kalman_state(model, monte_carlo);
    ProcessState x = initial_state(model);
    AoiVector h = AoiVector::zeros(dim);

    for (std::size_t t = 0; t < config.horizon; ++t) {
      Index j = 0;
      Eigen::VectorXd err;
      double realized = 0.0;
      try {
        j = scheduler.decide(DecisionContext{t, filter.p, h, model});
        if (monte_carlo) {
          x = step_process(x, model, factor, noise);
          filter = kalman_update(filter, j, x.x(j), model);
          realized = (x.x - *filter.xhat).squaredNorm();
        } else {
          filter.p = covariance_step(filter.p, j, model);
          ++filter.t;
        }
        h = aoi_step(h, j);
        err = expected_error(filter.p, model);
      } catch (const Error& e) {
        std::throw_with_nested(TrajectoryError(t, e.what()));
      }

      double lb = 0.0;
      double ub = 0.0;
      for (Index i = 0; i < dim; ++i) {
        const double g = age_weight(h[i], a(i));
        ub += qd(i) * g;
        if (qtilde) lb += (*qtilde)(i) * g;
      }
      const double total = err.sum();
      if (t >= config.burn_in) {
        err_total += total;
        lb_total += lb;
        ub_total += ub;
        realized_total += realized;
      }
      if (keep_records && r == 0) {
        TrajectoryRecord rec{t, policy.kind, j, filter.p.trace(), total, lb, ub, {}, {}};
        if (config.per_sensor) rec.per_sensor_err.assign(err.data(), err.data() + dim);
        if (config.aoi) rec.aoi = h.h;
        result.records.push_back(std::move(rec));
      }
    }
  }

  const double denom = span * static_cast<double>(reps);
  result.summary.avg_error = err_total / denom;
  result.summary.normalized_error = result.summary.avg_error / static_cast<double>(dim);
  result.summary.avg_lb = lb_total / denom;
  result.summary.avg_ub = ub_total / denom;
  if (monte_carlo) result.summary.realized_error = realized_total / denom;
  return result;
}

TrajectoryResult run_trajectory(const ExperimentConfig& config, PolicySpec policy) {
  validate_config(config);
  return run_trajectory(config, policy, config.m.front(), config.rho.front());
}

ScenarioBounds scenario_bounds(const SystemModel& model) {
  ScenarioBounds b;
  if (!model.identity_dynamics()) {
    try {
      b.lower = general_a_lower_bound(model).value;
      b.kind = "general_a";
    } catch (const DomainError&) {
      b.kind = "none";
    }
    return b;
  }
  try {
    const BoundPair p = full_rank_scaling_bounds(model.q());
    b.lower = p.lower;
    b.upper = p.upper;
    b.kind = "full_rank";
    try {
      b.guarantee = guarantee_ratio(model.q());
    } catch (const DegenerateBound&) {
    }
  } catch (const SingularMatrix&) {
    try {
      const LowRankBounds lr = low_rank_scaling_bounds(model.q());
      b.lower = lr.bounds.lower;
      b.upper = lr.bounds.upper;
      b.kind = "low_rank";
    } catch (const Error&) {
      b.kind = "none";
    }
  }
  return b;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
  validate_config(config);
  std::vector<SweepRow> rows;
  for (Index m : config.m) {
    for (double rho : config.rho) {
      for (const PolicySpec& p : config.policies) {
        SweepRow row;
        row.m = m;
        row.rho = rho;
        row.policy = p.kind;
        rows.push_back(row);
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      try {
        const SystemModel model = build_model(config, row.m, row.rho);
        const ScenarioBounds b = scenario_bounds(model);
        row.lb = b.lower;
        row.ub = b.upper;
        const TrajectoryResult tr =
            run_trajectory(config, PolicySpec{row.policy}, row.m, row.rho, false);
        row.m = tr.summary.m;
        row.avg_error = tr.summary.avg_error;
        row.normalized_error = tr.summary.normalized_error;
      } catch (const std::exception& e) {
        row.status = e.what();
      }
    }
  };
  const unsigned workers =
      std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::size_t>(rows.size(), 1)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return rows;
}

void write_csv(const std::vector<TrajectoryRecord>& records, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  const std::size_t n_err = records.empty() ? 0 : records.front().per_sensor_err.size();
  const std::size_t n_aoi = records.empty() ? 0 : records.front().aoi.size();
  out << "t,policy,scheduled,trace_p,total_err,lb,ub";
  for (std::size_t i = 1; i <= n_err; ++i) out << ",err_" << i;
  for (std::size_t i = 1; i <= n_aoi; ++i) out << ",aoi_" << i;
  out << '\n';
  for (const TrajectoryRecord& r : records) {
    if (r.per_sensor_err.size() != n_err || r.aoi.size() != n_aoi) {
      throw IoError("records disagree on optional columns");
    }
    out << r.t << ',' << policy_name(r.policy) << ',' << (r.scheduled + 1) << ','
        << format_real(r.trace_p) << ',' << format_real(r.total_err) << ',' << format_real(r.lb)
        << ',' << format_real(r.ub);
    for (double e : r.per_sensor_err) out << ',' << format_real(e);
    for (std::uint64_t h : r.aoi) out << ',' << h;
    out << '\n';
  }
  finish(out, path);
}

std::vector<TrajectoryRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  const auto header = split_csv_line(line);
  static const char* kFixed[] = {"t", "policy", "scheduled", "trace_p", "total_err", "lb", "ub"};
  if (header.size() < 7 || !std::equal(std::begin(kFixed), std::end(kFixed), header.begin())) {
    throw IoError(path.string() + ": unexpected header");
  }
  std::size_t n_err = 0;
  std::size_t n_aoi = 0;
  for (std::size_t c = 7; c < header.size(); ++c) {
    if (header[c].rfind("err_", 0) == 0 && n_aoi == 0) {
      ++n_err;
    } else if (header[c].rfind("aoi_", 0) == 0) {
      ++n_aoi;
    } else {
      throw IoError(path.string() + ": unexpected column '" + header[c] + "'");
    }
  }

  std::vector<TrajectoryRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    TrajectoryRecord r;
    r.t = parse_int<std::size_t>(cells[0], path, line_no);
    const auto kind = parse_policy(cells[1]);
    if (!kind) throw IoError(path.string() + ":" + std::to_string(line_no) + ": unknown policy");
    r.policy = *kind;
    r.scheduled = parse_int<Index>(cells[2], path, line_no) - 1;
    r.trace_p = parse_real(cells[3], path, line_no);
    r.total_err = parse_real(cells[4], path, line_no);
    r.lb = parse_real(cells[5], path, line_no);
    r.ub = parse_real(cells[6], path, line_no);
    for (std::size_t i = 0; i < n_err; ++i) {
      r.per_sensor_err.push_back(parse_real(cells[7 + i], path, line_no));
    }
    for (std::size_t i = 0; i < n_aoi; ++i) {
      r.aoi.push_back(parse_int<std::uint64_t>(cells[7 + n_err + i], path, line_no));
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_summary_csv(const std::vector<TrajectorySummary>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "m,rho,policy,avg_err,norm_err,avg_lb,avg_ub,realized_err\n";
  for (const TrajectorySummary& s : rows) {
    out << s.m << ',' << format_real(s.rho) << ',' << policy_name(s.policy) << ','
        << format_real(s.avg_error) << ',' << format_real(s.normalized_error) << ','
        << format_real(s.avg_lb) << ',' << format_real(s.avg_ub) << ','
        << format_real(s.realized_error.value_or(std::numeric_limits<double>::quiet_NaN()))
        << '\n';
  }
  finish(out, path);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "m,rho,policy,avg_err,norm_err,lb,ub,lb_norm,ub_norm,status\n";
  for (const SweepRow& r : rows) {
    const double md = static_cast<double>(r.m);
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.m << ',' << format_real(r.rho) << ',' << policy_name(r.policy) << ','
        << format_real(r.avg_error) << ',' << format_real(r.normalized_error) << ','
        << format_real(r.lb) << ',' << format_real(r.ub) << ',' << format_real(r.lb / md) << ','
        << format_real(r.ub / md) << ',' << status << '\n';
  }
  finish(out, path);
}

}  // namespace corrmon
