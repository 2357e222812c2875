#pragma once

// Monte Carlo power study of the likelihood ratio test of
//
//   H0: theta = theta0, lambda = 1
//
// against the free (lambda, theta) alternative ("full" test) and against an
// alternative that wrongly keeps lambda = 1 ("misspecified" test). Critical
// values are calibrated by simulation under H0. Every replication draws from
// its own generator stream keyed by (seed, cell, replication), so results do
// not depend on the number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "lehmann/base_dist.hpp"
#include "lehmann/descriptor.hpp"
#include "lehmann/errors.hpp"
#include "lehmann/estimate.hpp"
#include "lehmann/extended.hpp"
#include "lehmann/infotheory.hpp"
#include "lehmann/numeric.hpp"
#include "lehmann/rng.hpp"

namespace lehmann {

struct SimConfig {
  Alternative kind = Alternative::First;
  BaseDistribution base = BaseDistribution::exponential(1.0);  // carries theta0
  std::vector<double> lambda_grid{1.0};
  std::size_t n = 50;
  std::size_t replications = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t calibration_replications = 10000;
  ThetaBounds theta_bounds;  // empty: family defaults
  unsigned threads = 0;      // 0: hardware concurrency; never affects output
};

inline ThetaBounds effective_bounds(const SimConfig& cfg) {
  return cfg.theta_bounds.empty() ? default_theta_bounds(cfg.base.family())
                                  : cfg.theta_bounds;
}

inline void validate(const SimConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw DomainError("config: alpha must lie in (0, 1)");
  }
  if (cfg.lambda_grid.empty()) throw DomainError("config: empty lambda_grid");
  for (double l : cfg.lambda_grid) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw DomainError("config: lambda_grid values must be > 0");
    }
  }
  if (cfg.n < 1) throw DomainError("config: n must be >= 1");
  if (cfg.replications < 100) {
    throw DomainError("config: replications must be >= 100");
  }
  if (cfg.calibration_replications < 1000) {
    throw DomainError("config: calibration_replications must be >= 1000");
  }
  const auto bounds = effective_bounds(cfg);
  if (bounds.size() != cfg.base.theta().size()) {
    throw DomainError("config: theta bounds do not match the base family");
  }
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const double t0 = cfg.base.theta()[i];
    if (!(bounds[i].first <= t0 && t0 <= bounds[i].second)) {
      throw DomainError("config: theta0[" + std::to_string(i) +
                        "] outside its bounds");
    }
  }
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<double> parse_real_list(const std::string& key,
                                           std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(
        start, comma == std::string_view::npos ? text.size() - start
                                               : comma - start));
    double v = 0.0;
    const auto [ptr, ec] =
        std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
      throw DomainError("config: '" + key + "': not a number: '" + item + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DomainError("config: '" + key + "': not a non-negative integer: '" +
                      text + "'");
  }
  return v;
}

inline std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. fn writes its
// own slot, so the outcome is independent of scheduling.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
}

}  // namespace detail

// Flat key/value text: one `key = value` per line, `#` starts a comment.
//
//   kind = lehmann1
//   base = exponential(rate=1)
//   lambda_grid = 1, 1.5, 2, 3
//   n = 50
//   replications = 2000
//   alpha = 0.05
//   seed = 20240101
//   calibration_replications = 10000
//   theta_lower = 0.001        (optional, one per parameter)
//   theta_upper = 1000         (optional)
//   threads = 0                (optional)
inline SimConfig parse_sim_config(std::string_view text) {
  SimConfig cfg;
  std::vector<double> lower;
  std::vector<double> upper;
  bool have_base = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "kind") {
      if (value == "lehmann1") {
        cfg.kind = Alternative::First;
      } else if (value == "lehmann2") {
        cfg.kind = Alternative::Second;
      } else {
        throw DomainError("config: kind must be lehmann1 or lehmann2");
      }
    } else if (key == "base") {
      cfg.base = parse_base_descriptor(value);
      have_base = true;
    } else if (key == "lambda_grid") {
      cfg.lambda_grid = detail::parse_real_list(key, value);
    } else if (key == "n") {
      cfg.n = detail::parse_integer<std::size_t>(key, value);
    } else if (key == "replications") {
      cfg.replications = detail::parse_integer<std::size_t>(key, value);
    } else if (key == "alpha") {
      cfg.alpha = detail::parse_real_list(key, value).at(0);
    } else if (key == "seed") {
      cfg.seed = detail::parse_integer<std::uint64_t>(key, value);
    } else if (key == "calibration_replications") {
      cfg.calibration_replications =
          detail::parse_integer<std::size_t>(key, value);
    } else if (key == "theta_lower") {
      lower = detail::parse_real_list(key, value);
    } else if (key == "theta_upper") {
      upper = detail::parse_real_list(key, value);
    } else if (key == "threads") {
      cfg.threads = detail::parse_integer<unsigned>(key, value);
    } else {
      throw DomainError("config line " + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
  }
  if (!have_base) throw DomainError("config: missing 'base'");
  if (lower.size() != upper.size()) {
    throw DomainError("config: theta_lower and theta_upper differ in length");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    cfg.theta_bounds.emplace_back(lower[i], upper[i]);
  }
  validate(cfg);
  return cfg;
}

// Canonical text of every output-relevant field (threads excluded).
inline std::string canonical_config(const SimConfig& cfg) {
  std::vector<double> lower;
  std::vector<double> upper;
  for (const auto& [lo, hi] : effective_bounds(cfg)) {
    lower.push_back(lo);
    upper.push_back(hi);
  }
  std::ostringstream os;
  os << "kind=" << to_string(cfg.kind) << '\n'
     << "base=" << cfg.base.descriptor() << '\n'
     << "lambda_grid=" << detail::join(cfg.lambda_grid) << '\n'
     << "n=" << cfg.n << '\n'
     << "replications=" << cfg.replications << '\n'
     << "alpha=" << format_double(cfg.alpha) << '\n'
     << "seed=" << cfg.seed << '\n'
     << "calibration_replications=" << cfg.calibration_replications << '\n'
     << "theta_lower=" << detail::join(lower) << '\n'
     << "theta_upper=" << detail::join(upper) << '\n';
  return os.str();
}

inline std::string config_hash(const SimConfig& cfg) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0')
     << detail::fnv1a64(canonical_config(cfg));
  return os.str();
}

struct LrtStatistics {
  double full = 0.0;      // 2 [l(lambda_hat, theta_hat) - l(1, theta0)]
  double misspec = 0.0;   // 2 [l(1, theta_tilde) - l(1, theta0)]
  double loglik_null = 0.0;
  double loglik_full = 0.0;
  double loglik_restricted = 0.0;
  FitResult fit_full;
  FitResult fit_restricted;

  // Per-observation ln g(x|lambda_hat, theta_hat) - ln g(x|1, theta_tilde).
  double mean_log_ratio() const {
    return (loglik_full - loglik_restricted) /
           static_cast<double>(fit_full.n);
  }
};

// Both statistics for one sample. The restricted fit is anchored at theta0
// and the full fit at (1, theta0) and (1, theta_tilde), which makes
// full >= misspec >= 0 hold exactly.
inline LrtStatistics lrt_statistics(std::span<const double> x,
                                    const SimConfig& cfg) {
  const auto bounds = effective_bounds(cfg);
  const auto& family = cfg.base.family_ptr();
  const std::vector<double> theta0(cfg.base.theta().begin(),
                                   cfg.base.theta().end());

  LrtStatistics s;
  s.loglik_null = loglik(cfg.kind, cfg.base, 1.0, x);

  FitOptions restricted_opts;
  restricted_opts.anchors.emplace_back(1.0, theta0);
  s.fit_restricted =
      fit_restricted(cfg.kind, family, x, 1.0, bounds, restricted_opts);

  FitOptions full_opts;
  full_opts.anchors.emplace_back(1.0, theta0);
  full_opts.anchors.emplace_back(1.0, s.fit_restricted.theta_hat);
  s.fit_full = fit_full(cfg.kind, family, x, bounds, full_opts);

  s.loglik_restricted = s.fit_restricted.loglik;
  s.loglik_full = s.fit_full.loglik;
  s.misspec = 2.0 * (s.loglik_restricted - s.loglik_null);
  s.full = 2.0 * (s.loglik_full - s.loglik_null);
  return s;
}

inline LrtStatistics lrt_statistics(const Sample& s, const SimConfig& cfg) {
  return lrt_statistics(std::span<const double>(s.values), cfg);
}

struct Calibration {
  double crit_full = 0.0;
  double crit_misspec = 0.0;
  std::size_t used = 0;
  std::size_t failures = 0;
  double null_mean_full = 0.0;
};

// Stream key reserved for calibration draws; cells use their grid index.
inline constexpr std::uint64_t kCalibrationStream = 0xCA1BULL << 48;

namespace detail {

struct Replicates {
  std::vector<LrtStatistics> stats;
  std::size_t failures = 0;
};

inline Replicates simulate_cell(const SimConfig& cfg, double lambda,
                                std::uint64_t stream, std::size_t count) {
  const ExtendedDistribution g(cfg.base, lambda, cfg.kind);
  std::vector<std::optional<LrtStatistics>> slots(count);
  parallel_for(count, cfg.threads, [&](std::size_t r) {
    auto rng = Xoshiro256::stream(cfg.seed, {stream, r});
    std::vector<double> x(cfg.n);
    sample_into(g, rng, x);
    try {
      slots[r] = lrt_statistics(std::span<const double>(x), cfg);
    } catch (const Error& e) {
      spdlog::debug("replication {} of cell {} excluded: {}", r, stream,
                    e.what());
    }
  });
  Replicates out;
  for (auto& slot : slots) {
    if (slot) {
      out.stats.push_back(std::move(*slot));
    } else {
      ++out.failures;
    }
  }
  return out;
}

// Smallest order statistic with empirical CDF >= p.
inline double empirical_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const auto m = static_cast<double>(v.size());
  auto idx = static_cast<std::size_t>(std::ceil(p * m));
  idx = std::clamp<std::size_t>(idx, 1, v.size());
  return v[idx - 1];
}

}  // namespace detail

// Empirical (1 - alpha) quantiles of both statistics under H0.
inline Calibration calibrate(const SimConfig& cfg) {
  validate(cfg);
  const auto reps = detail::simulate_cell(cfg, 1.0, kCalibrationStream,
                                          cfg.calibration_replications);
  if (reps.stats.empty()) {
    throw NumericalFailure("calibrate: every null replication failed", 0.0,
                           kInf);
  }
  std::vector<double> full;
  std::vector<double> misspec;
  double sum = 0.0;
  for (const auto& s : reps.stats) {
    full.push_back(s.full);
    misspec.push_back(s.misspec);
    sum += s.full;
  }
  Calibration c;
  c.crit_full = detail::empirical_quantile(full, 1.0 - cfg.alpha);
  c.crit_misspec = detail::empirical_quantile(misspec, 1.0 - cfg.alpha);
  c.used = reps.stats.size();
  c.failures = reps.failures;
  c.null_mean_full = sum / static_cast<double>(c.used);
  spdlog::info(
      "calibration: {} null replications ({} excluded); mean full statistic "
      "{:.4f} (Wilks heuristic: {} free parameters); crit_full {:.4f}, "
      "crit_misspec {:.4f}",
      c.used, c.failures, c.null_mean_full, 1 + cfg.base.theta().size(),
      c.crit_full, c.crit_misspec);
  return c;
}

struct LrtCell {
  double lambda = 1.0;
  double power_full = 0.0;
  double power_misspec = 0.0;
  double se_full = 0.0;
  double se_misspec = 0.0;
  double mean_log_ratio = 0.0;
  double se_mean_log_ratio = 0.0;
  double delta_closed = std::numeric_limits<double>::quiet_NaN();
  double calibrated_crit_full = 0.0;
  double calibrated_crit_misspec = 0.0;
  std::size_t replications_used = 0;
  std::size_t fit_failures = 0;
  bool flagged = false;  // > 1% failed replications
};

struct LrtReport {
  SimConfig config;
  std::string config_hash;
  Calibration calibration;
  std::vector<LrtCell> cells;
};

inline LrtReport run_power_study(const SimConfig& cfg) {
  LrtReport report;
  report.config = cfg;
  report.config_hash = config_hash(cfg);
  report.calibration = calibrate(cfg);
  const auto& cal = report.calibration;

  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
    const double lambda = cfg.lambda_grid[i];
    const auto reps = detail::simulate_cell(cfg, lambda, i, cfg.replications);
    LrtCell cell;
    cell.lambda = lambda;
    cell.calibrated_crit_full = cal.crit_full;
    cell.calibrated_crit_misspec = cal.crit_misspec;
    cell.replications_used = reps.stats.size();
    cell.fit_failures = reps.failures;
    cell.flagged = static_cast<double>(reps.failures) >
                   0.01 * static_cast<double>(cfg.replications);
    if (cfg.kind == Alternative::First) {
      cell.delta_closed = power_loss_closed(lambda);
    }
    if (cell.flagged) {
      spdlog::warn("cell lambda={}: {} of {} replications failed to fit",
                   format_double(lambda), reps.failures, cfg.replications);
    }
    const auto used = static_cast<double>(reps.stats.size());
    if (used > 0) {
      std::size_t rej_full = 0;
      std::size_t rej_mis = 0;
      double mean = 0.0;
      double m2 = 0.0;
      std::size_t k = 0;
      for (const auto& s : reps.stats) {
        rej_full += s.full > cal.crit_full ? 1 : 0;
        rej_mis += s.misspec > cal.crit_misspec ? 1 : 0;
        const double d = s.mean_log_ratio();
        ++k;
        const double delta = d - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (d - mean);
      }
      cell.power_full = static_cast<double>(rej_full) / used;
      cell.power_misspec = static_cast<double>(rej_mis) / used;
      cell.se_full = std::sqrt(cell.power_full * (1.0 - cell.power_full) / used);
      cell.se_misspec =
          std::sqrt(cell.power_misspec * (1.0 - cell.power_misspec) / used);
      cell.mean_log_ratio = mean;
      cell.se_mean_log_ratio = k > 1 ? std::sqrt(m2 / (used - 1.0) / used) : 0.0;
    }
    report.cells.push_back(cell);
  }
  return report;
}

inline nlohmann::json to_json(const LrtReport& r) {
  const auto bounds = effective_bounds(r.config);
  nlohmann::json bounds_json = nlohmann::json::array();
  for (const auto& [lo, hi] : bounds) bounds_json.push_back({lo, hi});

  nlohmann::json j;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.config.seed;
  j["config"] = {{"kind", std::string(to_string(r.config.kind))},
                 {"base", r.config.base.descriptor()},
                 {"lambda_grid", r.config.lambda_grid},
                 {"n", r.config.n},
                 {"replications", r.config.replications},
                 {"alpha", r.config.alpha},
                 {"calibration_replications", r.config.calibration_replications},
                 {"theta_bounds", bounds_json},
                 {"generator", std::string(kGeneratorName)}};
  j["calibration"] = {{"crit_full", r.calibration.crit_full},
                      {"crit_misspec", r.calibration.crit_misspec},
                      {"replications_used", r.calibration.used},
                      {"fit_failures", r.calibration.failures},
                      {"null_mean_full", r.calibration.null_mean_full}};
  auto cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json cj = {{"lambda", c.lambda},
                         {"power_full", c.power_full},
                         {"power_misspec", c.power_misspec},
                         {"se_full", c.se_full},
                         {"se_misspec", c.se_misspec},
                         {"mean_log_ratio", c.mean_log_ratio},
                         {"se_mean_log_ratio", c.se_mean_log_ratio},
                         {"calibrated_crit_full", c.calibrated_crit_full},
                         {"calibrated_crit_misspec", c.calibrated_crit_misspec},
                         {"replications_used", c.replications_used},
                         {"fit_failures", c.fit_failures},
                         {"flagged", c.flagged}};
    cj["delta_closed"] = std::isnan(c.delta_closed)
                             ? nlohmann::json(nullptr)
                             : nlohmann::json(c.delta_closed);
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  return j;
}

inline std::string to_csv(const LrtReport& r) {
  std::ostringstream os;
  os << "# config_hash=" << r.config_hash << '\n'
     << "# seed=" << r.config.seed << '\n'
     << "# generator=" << kGeneratorName << '\n'
     << "lambda,power_full,se_full,power_misspec,se_misspec,mean_log_ratio,"
        "se_mean_log_ratio,delta_closed,calibrated_crit_full,"
        "calibrated_crit_misspec,replications_used,fit_failures,flagged\n";
  for (const auto& c : r.cells) {
    os << format_double(c.lambda) << ',' << format_double(c.power_full) << ','
       << format_double(c.se_full) << ',' << format_double(c.power_misspec)
       << ',' << format_double(c.se_misspec) << ','
       << format_double(c.mean_log_ratio) << ','
       << format_double(c.se_mean_log_ratio) << ','
       << (std::isnan(c.delta_closed) ? std::string()
                                      : format_double(c.delta_closed))
       << ',' << format_double(c.calibrated_crit_full) << ','
       << format_double(c.calibrated_crit_misspec) << ','
       << c.replications_used << ',' << c.fit_failures << ','
       << (c.flagged ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace lehmann
