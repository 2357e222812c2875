#pragma once

// Likelihood machinery for Lehmann-extended samples.
//
//   l(lambda, theta) = n ln lambda + sum ln f(x_j|theta)
//                      + (lambda - 1) sum ln T(x_j|theta)
//
// with T = F for the first alternative and T = 1 - F for the second. For a
// fixed theta the maximizer in lambda is closed form,
//
//   lambda_hat(theta) = -n / sum ln T(x_j|theta),
//
// so joint fits maximize the profile l(lambda_hat(theta), theta) over theta
// only.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lehmann/base_dist.hpp"
#include "lehmann/errors.hpp"
#include "lehmann/extended.hpp"
#include "lehmann/numeric.hpp"

namespace lehmann {

// Closed box [lower, upper] per parameter.
using ThetaBounds = std::vector<std::pair<double, double>>;

struct ProfilePoint {
  std::vector<double> theta;
  double profile_loglik = 0.0;
};

struct FitResult {
  double lambda_hat = 1.0;
  std::vector<double> theta_hat;
  double loglik = -kInf;
  std::size_t n = 0;
  std::vector<std::string> warnings;
  std::vector<ProfilePoint> profile_trace;
};

struct FitOptions {
  // (lambda, theta) points the fit must not fall below. Used to make nested
  // comparisons exact under floating point.
  std::vector<std::pair<double, std::vector<double>>> anchors;
  bool record_trace = false;
};

// Optimizer settings for the profile search.
inline constexpr double kProfileTolerance = 1e-8;
inline constexpr int kGoldenMaxIterations = 200;
inline constexpr int kMaxSweeps = 10;
inline constexpr std::size_t kMultistarts = 5;
inline constexpr double kTieTolerance = 1e-10;

namespace detail {

struct LogSums {
  double log_f = 0.0;
  double log_tail = 0.0;
  bool tail_saturated = false;  // some ln T(x_j) is -inf
};

inline LogSums log_sums(Alternative kind, const BaseDistribution& base,
                        std::span<const double> x) {
  LogSums s;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!base.support().contains(x[j])) {
      throw DomainError("observation " + std::to_string(j) + " (" +
                        format_double(x[j]) + ") outside the support of " +
                        base.descriptor());
    }
    s.log_f += base.log_pdf(x[j]);
    const double t =
        kind == Alternative::First ? base.log_cdf(x[j]) : base.log_sf(x[j]);
    if (t == -kInf) s.tail_saturated = true;
    s.log_tail += t;
  }
  return s;
}

inline double loglik_from_sums(const LogSums& s, std::size_t n,
                               double lambda) {
  double ll = static_cast<double>(n) * std::log(lambda) + s.log_f;
  if (lambda != 1.0) ll += (lambda - 1.0) * s.log_tail;
  return ll;
}

inline double mle_from_sums(const LogSums& s, std::size_t n) {
  if (s.tail_saturated || !std::isfinite(s.log_tail) ||
      std::abs(s.log_tail) < 1e-300) {
    throw DegenerateSample(
        "closed-form lambda MLE undefined: sum of log tail probabilities is " +
        format_double(s.log_tail));
  }
  return -static_cast<double>(n) / s.log_tail;
}

inline double radical_inverse(std::size_t index, std::size_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

// Search coordinates: log scale for strictly positive boxes.
struct Axis {
  double lo;
  double hi;
  bool log_scale;

  double to_param(double z) const { return log_scale ? std::exp(z) : z; }
};

template <class F>
std::pair<double, double> golden_section_max(F&& f, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < kGoldenMaxIterations && (b - a) > kProfileTolerance;
       ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

inline double squared_norm(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

// Better by loglik; near-ties (< kTieTolerance) go to the smaller norm.
inline bool preferred(double ll, const std::vector<double>& theta,
                      double best_ll, const std::vector<double>& best_theta) {
  if (ll > best_ll + kTieTolerance) return true;
  if (ll < best_ll - kTieTolerance) return false;
  return squared_norm(theta) < squared_norm(best_theta);
}

struct ProfileOutcome {
  std::vector<double> theta;
  double value = -kInf;
  std::vector<std::string> warnings;
};

// Largest interval of t with lo <= z + t d <= hi on every axis.
inline std::pair<double, double> line_range(const std::vector<Axis>& axes,
                                            const std::vector<double>& z,
                                            const std::vector<double>& d) {
  double t_lo = -kInf;
  double t_hi = kInf;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (d[i] == 0.0) continue;
    const double a = (axes[i].lo - z[i]) / d[i];
    const double b = (axes[i].hi - z[i]) / d[i];
    t_lo = std::max(t_lo, std::min(a, b));
    t_hi = std::min(t_hi, std::max(a, b));
  }
  return {std::min(t_lo, 0.0), std::max(t_hi, 0.0)};
}

// Maximizes objective(theta) over the box from kMultistarts Halton starting
// points. Each sweep runs golden-section line searches along a direction
// set that starts as the coordinate axes; after a sweep the net displacement
// replaces the direction that gained most (Powell's update), which lets the
// search follow curved ridges such as Weibull shape/scale.
template <class Objective>
ProfileOutcome maximize_profile(Objective&& objective,
                                const ThetaBounds& bounds,
                                std::vector<ProfilePoint>* trace) {
  const std::size_t dim = bounds.size();
  std::vector<Axis> axes;
  for (const auto& [lo, hi] : bounds) {
    const bool log_scale = lo > 0.0;
    axes.push_back({log_scale ? std::log(lo) : lo,
                    log_scale ? std::log(hi) : hi, log_scale});
  }
  constexpr std::array<std::size_t, 8> primes = {2, 3, 5, 7, 11, 13, 17, 19};

  std::vector<double> theta(dim);
  const auto eval = [&](const std::vector<double>& z) {
    for (std::size_t i = 0; i < dim; ++i) {
      theta[i] = std::clamp(axes[i].to_param(z[i]), bounds[i].first,
                            bounds[i].second);
    }
    const double v = objective(std::span<const double>(theta));
    if (trace) trace->push_back({theta, v});
    return std::isnan(v) ? -kInf : v;
  };

  // One golden-section search along unit direction d; moves z on gain.
  const auto line_search = [&](std::vector<double>& z, double& value,
                               const std::vector<double>& d) {
    const auto [t_lo, t_hi] = line_range(axes, z, d);
    if (!(t_hi - t_lo > kProfileTolerance)) return 0.0;
    std::vector<double> trial(dim);
    auto along = [&](double t) {
      for (std::size_t i = 0; i < dim; ++i) {
        trial[i] = std::clamp(z[i] + t * d[i], axes[i].lo, axes[i].hi);
      }
      return eval(trial);
    };
    const auto [t, ft] = golden_section_max(along, t_lo, t_hi);
    if (!(ft > value)) return 0.0;
    const double gain = ft - value;
    for (std::size_t i = 0; i < dim; ++i) {
      z[i] = std::clamp(z[i] + t * d[i], axes[i].lo, axes[i].hi);
    }
    value = ft;
    return gain;
  };

  ProfileOutcome best;
  std::vector<double> best_z;
  for (std::size_t start = 1; start <= kMultistarts; ++start) {
    std::vector<double> z(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const double h = radical_inverse(start, primes[i % primes.size()]);
      z[i] = axes[i].lo + h * (axes[i].hi - axes[i].lo);
    }
    std::vector<std::vector<double>> directions(dim, std::vector<double>(dim));
    for (std::size_t i = 0; i < dim; ++i) directions[i][i] = 1.0;

    double value = eval(z);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      const std::vector<double> z_start = z;
      std::size_t biggest = 0;
      double biggest_gain = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double gain = line_search(z, value, directions[k]);
        if (gain > biggest_gain) {
          biggest_gain = gain;
          biggest = k;
        }
      }
      std::vector<double> shift(dim);
      double norm = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        shift[i] = z[i] - z_start[i];
        norm += shift[i] * shift[i];
      }
      norm = std::sqrt(norm);
      if (norm < kProfileTolerance) break;
      if (dim > 1) {
        for (double& v : shift) v /= norm;
        line_search(z, value, shift);
        directions.erase(directions.begin() + static_cast<long>(biggest));
        directions.push_back(shift);
      }
    }
    std::vector<double> params(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      params[i] = std::clamp(axes[i].to_param(z[i]), bounds[i].first,
                             bounds[i].second);
    }
    if (best_z.empty() || preferred(value, params, best.value, best.theta)) {
      best.theta = params;
      best.value = value;
      best_z = z;
    }
  }

  for (std::size_t i = 0; i < dim; ++i) {
    const double margin = 1e-6 * (axes[i].hi - axes[i].lo);
    if (best_z[i] - axes[i].lo < margin) {
      best.warnings.push_back("theta[" + std::to_string(i) +
                              "] at lower bound " +
                              format_double(bounds[i].first));
    } else if (axes[i].hi - best_z[i] < margin) {
      best.warnings.push_back("theta[" + std::to_string(i) +
                              "] at upper bound " +
                              format_double(bounds[i].second));
    }
  }
  return best;
}

inline void check_bounds(const BaseFamily& family, const ThetaBounds& bounds) {
  if (bounds.size() != family.parameter_names().size()) {
    throw DomainError("theta bounds: expected " +
                      std::to_string(family.parameter_names().size()) +
                      " interval(s) for " + family.name() + ", got " +
                      std::to_string(bounds.size()));
  }
  for (const auto& [lo, hi] : bounds) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw DomainError("theta bounds: need finite lower < upper");
    }
  }
}

inline void check_not_degenerate(const BaseFamily& family,
                                 std::span<const double> x) {
  if (x.empty()) throw DomainError("fit: empty sample");
  if (family.parameter_names().empty()) return;
  const bool all_equal = std::all_of(x.begin(), x.end(),
                                     [&](double v) { return v == x[0]; });
  if (all_equal) {
    throw DegenerateSample("fit: all observations are equal");
  }
}

}  // namespace detail

// Exact log-likelihood of a Lehmann-extended model.
inline double loglik(Alternative kind, const BaseDistribution& base,
                     double lambda, std::span<const double> x) {
  if (!(lambda > 0.0)) {
    throw DomainError("loglik: lambda must be > 0, got " +
                      format_double(lambda));
  }
  return detail::loglik_from_sums(detail::log_sums(kind, base, x), x.size(),
                                  lambda);
}

inline double loglik(const ExtendedDistribution& g, std::span<const double> x) {
  return loglik(g.kind(), g.base(), g.lambda(), x);
}

// Closed-form MLE of lambda for known theta.
inline double mle_lambda(Alternative kind, const BaseDistribution& base,
                         std::span<const double> x) {
  if (x.empty()) throw DomainError("mle_lambda: empty sample");
  return detail::mle_from_sums(detail::log_sums(kind, base, x), x.size());
}

inline ThetaBounds default_theta_bounds(const BaseFamily& family) {
  ThetaBounds out;
  for (std::size_t i = 0; i < family.parameter_names().size(); ++i) {
    out.push_back(family.default_bounds(i));
  }
  return out;
}

// Unrestricted maximum likelihood over (lambda, theta).
inline FitResult fit_full(Alternative kind,
                          const std::shared_ptr<const BaseFamily>& family,
                          std::span<const double> x,
                          const ThetaBounds& bounds,
                          const FitOptions& opts = {}) {
  detail::check_bounds(*family, bounds);
  detail::check_not_degenerate(*family, x);

  FitResult fit;
  fit.n = x.size();
  const auto make = [&](std::span<const double> theta) {
    return BaseDistribution(family, {theta.begin(), theta.end()});
  };

  if (bounds.empty()) {
    const auto base = make({});
    fit.lambda_hat = mle_lambda(kind, base, x);
  } else {
    auto profile = [&](std::span<const double> theta) {
      const auto base = make(theta);
      const auto sums = detail::log_sums(kind, base, x);
      try {
        return detail::loglik_from_sums(sums, x.size(),
                                        detail::mle_from_sums(sums, x.size()));
      } catch (const DegenerateSample&) {
        return -kInf;
      }
    };
    auto outcome = detail::maximize_profile(
        profile, bounds, opts.record_trace ? &fit.profile_trace : nullptr);
    if (outcome.value == -kInf) {
      throw DegenerateSample("fit_full: profile likelihood is -inf everywhere");
    }
    fit.theta_hat = std::move(outcome.theta);
    fit.warnings = std::move(outcome.warnings);
    fit.lambda_hat = mle_lambda(kind, make(fit.theta_hat), x);
  }
  fit.loglik = loglik(kind, make(fit.theta_hat), fit.lambda_hat, x);

  for (const auto& [lambda, theta] : opts.anchors) {
    const auto base = make(theta);
    const double at_anchor = loglik(kind, base, lambda, x);
    if (at_anchor > fit.loglik) {
      fit.lambda_hat = lambda;
      fit.theta_hat = theta;
      fit.loglik = at_anchor;
    }
    try {
      const double lam = mle_lambda(kind, base, x);
      const double profiled = loglik(kind, base, lam, x);
      if (profiled > fit.loglik) {
        fit.lambda_hat = lam;
        fit.theta_hat = theta;
        fit.loglik = profiled;
      }
    } catch (const DegenerateSample&) {
    }
  }
  return fit;
}

// Maximum likelihood over theta with lambda held at lambda_fixed.
inline FitResult fit_restricted(Alternative kind,
                                const std::shared_ptr<const BaseFamily>& family,
                                std::span<const double> x, double lambda_fixed,
                                const ThetaBounds& bounds,
                                const FitOptions& opts = {}) {
  if (!(lambda_fixed > 0.0) || !std::isfinite(lambda_fixed)) {
    throw DomainError("fit_restricted: lambda must be finite and > 0");
  }
  detail::check_bounds(*family, bounds);
  detail::check_not_degenerate(*family, x);

  FitResult fit;
  fit.n = x.size();
  fit.lambda_hat = lambda_fixed;
  const auto make = [&](std::span<const double> theta) {
    return BaseDistribution(family, {theta.begin(), theta.end()});
  };

  if (!bounds.empty()) {
    auto objective = [&](std::span<const double> theta) {
      return detail::loglik_from_sums(detail::log_sums(kind, make(theta), x),
                                      x.size(), lambda_fixed);
    };
    auto outcome = detail::maximize_profile(
        objective, bounds, opts.record_trace ? &fit.profile_trace : nullptr);
    if (outcome.value == -kInf) {
      throw DegenerateSample(
          "fit_restricted: likelihood is -inf everywhere in the box");
    }
    fit.theta_hat = std::move(outcome.theta);
    fit.warnings = std::move(outcome.warnings);
  }
  fit.loglik = loglik(kind, make(fit.theta_hat), lambda_fixed, x);

  for (const auto& [lambda, theta] : opts.anchors) {
    if (lambda != lambda_fixed) continue;
    const double at_anchor = loglik(kind, make(theta), lambda_fixed, x);
    if (at_anchor > fit.loglik) {
      fit.theta_hat = theta;
      fit.loglik = at_anchor;
    }
  }
  return fit;
}

inline nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json j;
  j["lambda_hat"] = fit.lambda_hat;
  j["theta_hat"] = fit.theta_hat;
  j["loglik"] = fit.loglik;
  j["n"] = fit.n;
  j["warnings"] = fit.warnings;
  return j;
}

}  // namespace lehmann
