#pragma once

// Distributions generated by Lehmann alternatives:
//
//   first alternative   G1(x) = F(x)^lambda
//   second alternative  G2(x) = 1 - (1 - F(x))^lambda
//
// For integer lambda = m these are the laws of the maximum (G1) and the
// minimum (G2) of m independent draws from F. Both keep the support of F.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "lehmann/base_dist.hpp"
#include "lehmann/errors.hpp"
#include "lehmann/numeric.hpp"
#include "lehmann/quadrature.hpp"
#include "lehmann/rng.hpp"

namespace lehmann {

enum class Alternative { First, Second };

inline std::string_view to_string(Alternative kind) {
  return kind == Alternative::First ? "lehmann1" : "lehmann2";
}

inline constexpr double kLargeLambda = 1e8;

class ExtendedDistribution {
 public:
  ExtendedDistribution(BaseDistribution base, double lambda,
                       Alternative kind = Alternative::First)
      : base_(std::move(base)), lambda_(lambda), kind_(kind) {
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
      throw DomainError("lambda must be finite and > 0, got " +
                        format_double(lambda_));
    }
    if (lambda_ > kLargeLambda) {
      spdlog::warn("lambda = {} exceeds {}; likely a user error",
                   format_double(lambda_), kLargeLambda);
    }
  }

  const BaseDistribution& base() const { return base_; }
  double lambda() const { return lambda_; }
  Alternative kind() const { return kind_; }
  const Support& support() const { return base_.support(); }

  double cdf(double x) const {
    if (lambda_ == 1.0) return base_.cdf(x);
    if (kind_ == Alternative::First) {
      return std::exp(lambda_ * base_.log_cdf(x));
    }
    return -std::expm1(lambda_ * base_.log_sf(x));
  }

  // ln g(x) = ln lambda + ln f(x) + (lambda - 1) ln F(x)    (first)
  //         = ln lambda + ln f(x) + (lambda - 1) ln(1-F(x)) (second)
  //
  // At a support endpoint where F (resp. 1-F) vanishes the density is +inf
  // for lambda < 1; those are boundary points of measure zero.
  double log_pdf(double x) const {
    if (lambda_ == 1.0) return base_.log_pdf(x);
    if (!base_.support().contains(x)) return -kInf;
    const double tail =
        kind_ == Alternative::First ? base_.log_cdf(x) : base_.log_sf(x);
    if (tail == -kInf) return lambda_ < 1.0 ? kInf : -kInf;
    const double lf = base_.log_pdf(x);
    if (lf == -kInf || std::isnan(lf)) return lf;
    return std::log(lambda_) + lf + (lambda_ - 1.0) * tail;
  }

  double pdf(double x) const {
    if (lambda_ == 1.0) return base_.pdf(x);
    return std::exp(log_pdf(x));
  }

  // First: Q(u^(1/lambda)); second: Q(1 - (1-u)^(1/lambda)). Evaluated in
  // log space through the base's log-CDF / log-survival inverses.
  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) {
      throw DomainError("quantile: u must lie in (0, 1), got " +
                        format_double(u));
    }
    if (lambda_ == 1.0) return base_.quantile(u);
    if (kind_ == Alternative::First) {
      return base_.quantile_from_log_cdf(std::log(u) / lambda_);
    }
    return base_.quantile_from_log_sf(std::log1p(-u) / lambda_);
  }

  // Q_G(1 - s) computed from s directly, so the upper tail keeps full
  // resolution as s -> 0.
  double quantile_complement(double s) const {
    if (!(s > 0.0 && s < 1.0)) {
      throw DomainError("quantile_complement: s must lie in (0, 1), got " +
                        format_double(s));
    }
    if (kind_ == Alternative::First) {
      return base_.quantile_from_log_sf(log1mexp(std::log1p(-s) / lambda_));
    }
    return base_.quantile_from_log_sf(std::log(s) / lambda_);
  }

  // Same base and kind, exponent lambda * lambda_prime.
  ExtendedDistribution compose(double lambda_prime) const {
    if (!(lambda_prime > 0.0) || !std::isfinite(lambda_prime)) {
      throw DomainError("compose: lambda' must be finite and > 0, got " +
                        format_double(lambda_prime));
    }
    return {base_, lambda_ * lambda_prime, kind_};
  }

  std::string descriptor() const {
    return std::string(to_string(kind_)) + "(base=" + base_.descriptor() +
           ",lambda=" + format_double(lambda_) + ")";
  }

 private:
  BaseDistribution base_;
  double lambda_;
  Alternative kind_;
};

inline ExtendedDistribution extend(BaseDistribution base, double lambda,
                                   Alternative kind = Alternative::First) {
  return {std::move(base), lambda, kind};
}

inline ExtendedDistribution compose(const ExtendedDistribution& g,
                                    double lambda_prime) {
  return g.compose(lambda_prime);
}

struct Sample {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string source;
  std::string generator = std::string(kGeneratorName);

  std::size_t size() const { return values.size(); }
};

namespace detail {

template <class Law>
Sample inverse_transform(const Law& law, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample: n must be >= 1");
  Sample s;
  s.seed = seed;
  s.source = law.descriptor();
  s.values.reserve(n);
  Xoshiro256 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    s.values.push_back(law.quantile(rng.uniform_open()));
  }
  return s;
}

}  // namespace detail

// Inverse-transform sample; identical (g, n, seed) gives an identical sample.
inline Sample sample(const ExtendedDistribution& g, std::size_t n,
                     std::uint64_t seed) {
  return detail::inverse_transform(g, n, seed);
}

inline Sample sample(const BaseDistribution& base, std::size_t n,
                     std::uint64_t seed) {
  return detail::inverse_transform(base, n, seed);
}

// Draws n values into out from an already positioned generator.
inline void sample_into(const ExtendedDistribution& g, Xoshiro256& rng,
                        std::span<double> out) {
  for (double& v : out) v = g.quantile(rng.uniform_open());
}

// k-th raw moment E[X^k]. Uses the Beta-expectation form
//   first:  int_0^1 lambda Q(u)^k u^(lambda-1) du
//   second: int_0^1 lambda Q(u)^k (1-u)^(lambda-1) du
// after the substitution t = u^lambda (resp. t = (1-u)^lambda), which turns
// both into int_0^1 Q_G(t)^k dt with Q_G the extended quantile and removes
// the endpoint singularity of the weight for lambda < 1. The integral is
// split at 1/2 and the upper half runs in 1 - t.
inline double moment(const ExtendedDistribution& g, int k,
                     const QuadratureOptions& opts = {}) {
  if (k < 1) throw DomainError("moment: order k must be >= 1");
  // Lower half in t, upper half in s = 1 - t.
  const auto lower = [&](double t) { return std::pow(g.quantile(t), k); };
  const auto upper = [&](double s) {
    return std::pow(g.quantile_complement(s), k);
  };
  double first_half = 0.0;
  try {
    first_half = integrate(lower, 0.0, 0.5, opts).value;
    return first_half + integrate(upper, 0.0, 0.5, opts).value;
  } catch (const NumericalFailure& e) {
    throw NumericalFailure("moment " + std::to_string(k) + " of " +
                               g.descriptor() + " did not converge: " +
                               e.what(),
                           first_half + e.best_estimate(), e.error_estimate());
  }
}

}  // namespace lehmann
