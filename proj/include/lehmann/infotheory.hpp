#pragma once

// Kullback-Leibler divergence between Lehmann-extended laws, the closed-form
// power loss of the first alternative, and the empirical objective that
// links likelihood maximization to divergence minimization. All values are
// in nats.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lehmann/base_dist.hpp"
#include "lehmann/errors.hpp"
#include "lehmann/estimate.hpp"
#include "lehmann/extended.hpp"
#include "lehmann/numeric.hpp"
#include "lehmann/quadrature.hpp"
#include "lehmann/rng.hpp"

namespace lehmann {

enum class KlMethod { ClosedForm, Quadrature, MonteCarlo };

inline std::string_view to_string(KlMethod m) {
  switch (m) {
    case KlMethod::ClosedForm:
      return "closed_form";
    case KlMethod::Quadrature:
      return "quadrature";
    case KlMethod::MonteCarlo:
      return "monte_carlo";
  }
  return "unknown";
}

struct KlResult {
  double value = 0.0;
  double error_estimate = 0.0;
  KlMethod method = KlMethod::Quadrature;
  std::string meta;
};

inline nlohmann::json to_json(const KlResult& r) {
  return {{"value", r.value},
          {"error_estimate", r.error_estimate},
          {"method", std::string(to_string(r.method))},
          {"meta", r.meta}};
}

// Delta(lambda) = ln lambda + (1 - lambda) / lambda, the divergence between
// a first-alternative extension and its base (same theta).
inline double power_loss_closed(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("power_loss_closed: lambda must be finite and > 0, got " +
                      format_double(lambda));
  }
  return std::log(lambda) + (1.0 - lambda) / lambda;
}

inline KlResult power_loss(double lambda) {
  return {power_loss_closed(lambda), 0.0, KlMethod::ClosedForm,
          "lehmann1 lambda=" + format_double(lambda) + " vs lambda=1"};
}

// ln lambda + lambda (lambda - 1) int_0^1 u^(lambda-1) ln u du, by quadrature.
// For lambda < 1 the weight u^(lambda-1) is singular at 0; the substitution
// t = u^lambda turns the integral into lambda^-2 int_0^1 ln t dt first.
inline double power_loss_integrand_check(double lambda,
                                         const QuadratureOptions& opts = {}) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("power_loss_integrand_check: lambda must be > 0");
  }
  if (lambda == 1.0) return 0.0;
  double integral = 0.0;
  if (lambda < 1.0) {
    integral = integrate([](double t) { return std::log(t); }, 0.0, 1.0, opts)
                   .value /
               (lambda * lambda);
  } else {
    integral = integrate(
                   [lambda](double u) {
                     return std::pow(u, lambda - 1.0) * std::log(u);
                   },
                   0.0, 1.0, opts)
                   .value;
  }
  return std::log(lambda) + lambda * (lambda - 1.0) * integral;
}

namespace detail {

// ln p(x) - ln q(x) for two extensions of the same base law, written in
// terms of t in (0, 1) with x = Q_p(t). The base density cancels; what
// remains depends on u = F(x) only, and u is recovered from t in log form:
//   first:  ln u = ln t / lambda_p
//   second: ln(1 - u) = ln t / lambda_p
inline double same_base_log_ratio(const ExtendedDistribution& p,
                                  const ExtendedDistribution& q, double t) {
  const double lt = std::log(t) / p.lambda();
  double log_u = 0.0;
  double log_1mu = 0.0;
  if (p.kind() == Alternative::First) {
    log_u = lt;
    log_1mu = log1mexp(lt);
  } else {
    log_1mu = lt;
    log_u = log1mexp(lt);
  }
  const auto tail = [&](const ExtendedDistribution& g) {
    const double l = g.kind() == Alternative::First ? log_u : log_1mu;
    return g.lambda() == 1.0 ? 0.0 : (g.lambda() - 1.0) * l;
  };
  return std::log(p.lambda()) - std::log(q.lambda()) + tail(p) - tail(q);
}

}  // namespace detail

// D_KL(p | q) = int p ln(p / q), integrated over t in (0, 1) after x = Q_p(t).
// Pairs sharing the same base law use the base-free u-space integrand;
// other pairs with equal support evaluate both log densities at Q_p(t).
inline KlResult kl_numeric(const ExtendedDistribution& p,
                           const ExtendedDistribution& q,
                           const QuadratureOptions& opts = {}) {
  if (!(p.support() == q.support())) {
    throw DomainError("kl_numeric: support mismatch between " +
                      p.descriptor() + " and " + q.descriptor());
  }
  KlResult out;
  out.method = KlMethod::Quadrature;
  out.meta = "p=" + p.descriptor() + "; q=" + q.descriptor();

  try {
    QuadratureResult r;
    if (p.base().same_law(q.base())) {
      r = integrate(
          [&](double t) { return detail::same_base_log_ratio(p, q, t); }, 0.0,
          1.0, opts);
    } else {
      r = integrate(
          [&](double t) {
            const double x = p.quantile(t);
            return p.log_pdf(x) - q.log_pdf(x);
          },
          0.0, 1.0, opts);
    }
    out.value = r.value;
    out.error_estimate = r.error;
  } catch (const NumericalFailure& e) {
    throw NumericalFailure("kl_numeric(" + out.meta + "): " + e.what(),
                           e.best_estimate(), e.error_estimate());
  }
  return out;
}

// Monte Carlo estimate of E_p[ln p(X) - ln q(X)] from n inverse-transform
// draws of p, with its standard error.
inline KlResult mean_log_ratio_mc(const ExtendedDistribution& p,
                                  const ExtendedDistribution& q, std::size_t n,
                                  std::uint64_t seed) {
  if (n < 2) throw DomainError("mean_log_ratio_mc: need n >= 2");
  if (!(p.support() == q.support())) {
    throw DomainError("mean_log_ratio_mc: support mismatch");
  }
  Xoshiro256 rng(seed);
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = p.quantile(rng.uniform_open());
    const double d = p.log_pdf(x) - q.log_pdf(x);
    const double delta = d - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (d - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), KlMethod::MonteCarlo,
          "p=" + p.descriptor() + "; q=" + q.descriptor() +
              "; n=" + std::to_string(n) + "; seed=" + std::to_string(seed)};
}

// -(1/n) l(lambda, theta): the parameter-dependent part of the divergence
// between the empirical law and the model. Its minimizer is the MLE.
inline double empirical_kl_objective(Alternative kind,
                                     const BaseDistribution& base,
                                     double lambda, std::span<const double> x) {
  if (x.empty()) throw DomainError("empirical_kl_objective: empty sample");
  return -loglik(kind, base, lambda, x) / static_cast<double>(x.size());
}

}  // namespace lehmann
