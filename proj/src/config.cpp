#include "corrmon/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "corrmon/errors.hpp"

namespace corrmon {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    out.push_back(trim(s.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string value;
  std::size_t line;
};

class FieldReader {
 public:
  FieldReader(std::string field, const Entry& e) : field_(std::move(field)), e_(e) {}

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(field_, e_.line, what); }

  template <typename T>
  T integer(std::string_view token) const {
    T v{};
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end || token.empty()) {
      fail("expected an integer, got '" + std::string(token) + "'");
    }
    return v;
  }

  double real(std::string_view token) const {
    double v = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end || token.empty() || !std::isfinite(v)) {
      fail("expected a finite number, got '" + std::string(token) + "'");
    }
    return v;
  }

  bool boolean() const {
    const std::string_view v = trim(e_.value);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail("expected true or false, got '" + std::string(v) + "'");
  }

  std::vector<std::string_view> list() const {
    auto items = split_list(e_.value);
    for (auto item : items) {
      if (item.empty()) fail("empty list element");
    }
    return items;
  }

  std::string_view text() const { return trim(e_.value); }

 private:
  std::string field_;
  const Entry& e_;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"scenario", {"name", "m", "rho", "a_scale", "matrix_file"}},
      {"policies", {"use"}},
      {"run", {"horizon", "seed", "mode", "replications", "burn_in"}},
      {"output", {"per_sensor", "aoi"}},
  };
  return keys;
}

}  // namespace

std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::Symmetric: return "symmetric";
    case Scenario::Block: return "block";
    case Scenario::RhoSweep: return "rho_sweep";
    case Scenario::DiagA: return "diag_a";
    case Scenario::LowRank: return "low_rank";
    case Scenario::CustomMatrixFile: return "custom_matrix_file";
  }
  return "unknown";
}

std::string_view mode_name(RunMode m) noexcept {
  return m == RunMode::CovarianceOnly ? "covariance_only" : "monte_carlo";
}

void validate_config(const ExperimentConfig& c) {
  if (c.m.empty()) throw ConfigError("scenario.m", 0, "at least one size is required");
  for (Index m : c.m) {
    if (m < 1) throw ConfigError("scenario.m", 0, "sizes must be at least 1");
    if ((c.scenario == Scenario::Block || c.scenario == Scenario::LowRank) && m % 2 != 0) {
      throw ConfigError("scenario.m", 0, "this scenario needs even sizes");
    }
  }
  if (c.rho.empty()) throw ConfigError("scenario.rho", 0, "at least one correlation is required");
  if (!(c.a_scale >= 1.0) || !std::isfinite(c.a_scale)) {
    throw ConfigError("scenario.a_scale", 0, "must be a finite number >= 1");
  }
  if (c.scenario == Scenario::DiagA && !(c.a_scale > 1.0)) {
    throw ConfigError("scenario.a_scale", 0, "diag_a needs a_scale > 1");
  }
  if (c.scenario == Scenario::CustomMatrixFile && c.matrix_file.empty()) {
    throw ConfigError("scenario.matrix_file", 0, "custom_matrix_file needs a matrix file");
  }
  if (c.policies.empty()) throw ConfigError("policies.use", 0, "at least one policy is required");
  for (std::size_t i = 0; i < c.policies.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (c.policies[i] == c.policies[j]) {
        throw ConfigError("policies.use", 0,
                          "duplicate policy '" + std::string(policy_name(c.policies[i].kind)) + "'");
      }
    }
  }
  if (c.horizon < 1) throw ConfigError("run.horizon", 0, "must be at least 1");
  if (c.replications < 1) throw ConfigError("run.replications", 0, "must be at least 1");
  if (c.replications > 1 && c.mode != RunMode::MonteCarlo) {
    throw ConfigError("run.replications", 0, "replications > 1 requires mode = monte_carlo");
  }
  if (c.burn_in >= c.horizon) throw ConfigError("run.burn_in", 0, "must be below the horizon");
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_keys().count(section)) {
        throw ConfigError(section, line_no, "unknown section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (section.empty()) throw ConfigError(key, line_no, "key outside any section");
    const std::string field = section + "." + key;
    if (!known_keys().at(section).count(key)) throw ConfigError(field, line_no, "unknown key");
    if (entries.count(field)) throw ConfigError(field, line_no, "duplicate key");
    entries.emplace(field, Entry{std::string(trim(line.substr(eq + 1))), line_no});
  }

  ExperimentConfig c;
  auto get = [&](const char* field) -> const Entry* {
    const auto it = entries.find(field);
    return it == entries.end() ? nullptr : &it->second;
  };

  if (const Entry* e = get("scenario.name")) {
    FieldReader r("scenario.name", *e);
    bool found = false;
    for (Scenario s : {Scenario::Symmetric, Scenario::Block, Scenario::RhoSweep, Scenario::DiagA,
                       Scenario::LowRank, Scenario::CustomMatrixFile}) {
      if (scenario_name(s) == r.text()) {
        c.scenario = s;
        found = true;
      }
    }
    if (!found) r.fail("unknown scenario '" + std::string(r.text()) + "'");
  }
  if (const Entry* e = get("scenario.m")) {
    FieldReader r("scenario.m", *e);
    c.m.clear();
    for (auto tok : r.list()) c.m.push_back(r.integer<Index>(tok));
  }
  if (const Entry* e = get("scenario.rho")) {
    FieldReader r("scenario.rho", *e);
    c.rho.clear();
    for (auto tok : r.list()) c.rho.push_back(r.real(tok));
  }
  if (const Entry* e = get("scenario.a_scale")) {
    FieldReader r("scenario.a_scale", *e);
    c.a_scale = r.real(r.text());
  }
  if (const Entry* e = get("scenario.matrix_file")) {
    c.matrix_file = std::string(FieldReader("scenario.matrix_file", *e).text());
  }
  if (const Entry* e = get("policies.use")) {
    FieldReader r("policies.use", *e);
    c.policies.clear();
    for (auto tok : r.list()) {
      const auto kind = parse_policy(tok);
      if (!kind) r.fail("unknown policy '" + std::string(tok) + "'");
      c.policies.push_back(PolicySpec{*kind});
    }
  }
  if (const Entry* e = get("run.horizon")) {
    FieldReader r("run.horizon", *e);
    c.horizon = r.integer<std::size_t>(r.text());
  }
  if (const Entry* e = get("run.seed")) {
    FieldReader r("run.seed", *e);
    c.seed = r.integer<std::uint64_t>(r.text());
  }
  if (const Entry* e = get("run.mode")) {
    FieldReader r("run.mode", *e);
    if (r.text() == mode_name(RunMode::CovarianceOnly)) {
      c.mode = RunMode::CovarianceOnly;
    } else if (r.text() == mode_name(RunMode::MonteCarlo)) {
      c.mode = RunMode::MonteCarlo;
    } else {
      r.fail("unknown mode '" + std::string(r.text()) + "'");
    }
  }
  if (const Entry* e = get("run.replications")) {
    FieldReader r("run.replications", *e);
    c.replications = r.integer<std::size_t>(r.text());
  }
  if (const Entry* e = get("run.burn_in")) {
    FieldReader r("run.burn_in", *e);
    c.burn_in = r.integer<std::size_t>(r.text());
  }
  if (const Entry* e = get("output.per_sensor")) c.per_sensor = FieldReader("output.per_sensor", *e).boolean();
  if (const Entry* e = get("output.aoi")) c.aoi = FieldReader("output.aoi", *e).boolean();

  try {
    validate_config(c);
  } catch (const ConfigError& err) {
    const Entry* e = get(err.field().c_str());
    if (e == nullptr) throw;
    throw ConfigError(err.field(), e->line, err.detail());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c = parse_config(ss.str());
  if (!c.matrix_file.empty()) {
    const std::filesystem::path mf(c.matrix_file);
    if (mf.is_relative()) c.matrix_file = (path.parent_path() / mf).lexically_normal().string();
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  auto join = [&](const auto& items, auto fn) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i > 0) s += ", ";
      s += fn(items[i]);
    }
    return s;
  };
  os << "[scenario]\n";
  os << "name = " << scenario_name(c.scenario) << "\n";
  os << "m = " << join(c.m, [](Index v) { return std::to_string(v); }) << "\n";
  os << "rho = " << join(c.rho, format_double) << "\n";
  os << "a_scale = " << format_double(c.a_scale) << "\n";
  if (!c.matrix_file.empty()) os << "matrix_file = " << c.matrix_file << "\n";
  os << "\n[policies]\n";
  os << "use = "
     << join(c.policies, [](const PolicySpec& p) { return std::string(policy_name(p.kind)); })
     << "\n";
  os << "\n[run]\n";
  os << "horizon = " << c.horizon << "\n";
  os << "seed = " << c.seed << "\n";
  os << "mode = " << mode_name(c.mode) << "\n";
  os << "replications = " << c.replications << "\n";
  os << "burn_in = " << c.burn_in << "\n";
  os << "\n[output]\n";
  os << "per_sensor = " << (c.per_sensor ? "true" : "false") << "\n";
  os << "aoi = " << (c.aoi ? "true" : "false") << "\n";
  return os.str();
}

CovarianceMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const auto n = rows.size();
  if (n == 0) throw IoError(path.string() + ": empty matrix");
  Eigen::MatrixXd m(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw IoError(path.string() + ": matrix is not square");
    for (std::size_t j = 0; j < n; ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return CovarianceMatrix(std::move(m));
}

SystemModel build_model(const ExperimentConfig& config, Index m, double rho) {
  CovarianceMatrix q = [&] {
    switch (config.scenario) {
      case Scenario::Symmetric:
      case Scenario::RhoSweep:
      case Scenario::DiagA: return make_symmetric_q(m, rho);
      case Scenario::Block: return make_block_q(m, rho);
      case Scenario::LowRank: return make_paired_q(m, rho);
      case Scenario::CustomMatrixFile: return read_matrix_file(config.matrix_file);
    }
    throw DomainError("unknown scenario");
  }();
  if (config.a_scale == 1.0) return SystemModel(std::move(q));
  const Index dim = q.dim();
  return SystemModel(Eigen::VectorXd::Constant(dim, config.a_scale), std::move(q));
}

}  // namespace corrmon
