#pragma once

// Base laws F(x | theta) that the Lehmann extensions are built on.
//
// A BaseFamily is a stateless description of a parametric family (Uniform,
// Exponential, Weibull, or anything a user registers). A BaseDistribution
// binds a family to a validated parameter vector and is the value type the
// rest of the library works with.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lehmann/errors.hpp"
#include "lehmann/numeric.hpp"

namespace lehmann {

struct Support {
  double lower = -kInf;
  double upper = kInf;
  bool lower_closed = false;
  bool upper_closed = false;

  bool contains(double x) const {
    const bool above = lower_closed ? x >= lower : x > lower;
    const bool below = upper_closed ? x <= upper : x < upper;
    return above && below;
  }

  friend bool operator==(const Support&, const Support&) = default;
};

using Theta = std::span<const double>;

// Interface for a parametric family. Evaluation methods are only called with
// a theta that passed validate() and with x inside [lower, upper]; the
// clamping outside the support is done by BaseDistribution.
//
// The log_cdf / log_sf / quantile_from_log_* hooks have generic defaults;
// families override them when a direct formula keeps precision in the tails,
// which is what makes large lambda usable.
class BaseFamily {
 public:
  virtual ~BaseFamily() = default;

  virtual std::string name() const = 0;
  virtual std::vector<std::string> parameter_names() const = 0;
  // Throws DomainError for an invalid parameter vector.
  virtual void validate(Theta theta) const = 0;
  virtual Support support(Theta theta) const = 0;

  virtual double log_pdf(Theta theta, double x) const = 0;
  virtual double cdf(Theta theta, double x) const = 0;
  // Total on [0, 1]; u = 0 and u = 1 map to the support endpoints.
  virtual double quantile(Theta theta, double u) const = 0;

  virtual double pdf(Theta theta, double x) const {
    return std::exp(log_pdf(theta, x));
  }
  virtual double log_cdf(Theta theta, double x) const {
    return std::log(cdf(theta, x));
  }
  // ln(1 - F(x))
  virtual double log_sf(Theta theta, double x) const {
    return std::log1p(-cdf(theta, x));
  }
  // x such that ln F(x) = log_u
  virtual double quantile_from_log_cdf(Theta theta, double log_u) const {
    return quantile(theta, std::exp(log_u));
  }
  // x such that ln(1 - F(x)) = log_v
  virtual double quantile_from_log_sf(Theta theta, double log_v) const {
    return quantile(theta, -std::expm1(log_v));
  }

  // Search box for parameter i used when fitting without explicit bounds.
  virtual std::pair<double, double> default_bounds(std::size_t) const {
    return {1e-3, 1e3};
  }
};

namespace detail {

inline void expect_arity(const BaseFamily& fam, Theta theta) {
  if (theta.size() != fam.parameter_names().size()) {
    throw DomainError(fam.name() + ": expected " +
                      std::to_string(fam.parameter_names().size()) +
                      " parameter(s), got " + std::to_string(theta.size()));
  }
}

inline void expect_positive(const BaseFamily& fam, std::string_view what,
                            double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(fam.name() + ": " + std::string(what) +
                      " must be finite and > 0, got " + format_double(v));
  }
}

}  // namespace detail

class UniformFamily final : public BaseFamily {
 public:
  std::string name() const override { return "uniform"; }
  std::vector<std::string> parameter_names() const override { return {}; }
  void validate(Theta theta) const override {
    detail::expect_arity(*this, theta);
  }
  Support support(Theta) const override { return {0.0, 1.0, true, true}; }

  double log_pdf(Theta, double) const override { return 0.0; }
  double pdf(Theta, double) const override { return 1.0; }
  double cdf(Theta, double x) const override { return x; }
  double quantile(Theta, double u) const override { return u; }
  double log_cdf(Theta, double x) const override { return std::log(x); }
  double log_sf(Theta, double x) const override { return std::log1p(-x); }
  double quantile_from_log_cdf(Theta, double log_u) const override {
    return std::exp(log_u);
  }
  double quantile_from_log_sf(Theta, double log_v) const override {
    return -std::expm1(log_v);
  }
};

class ExponentialFamily final : public BaseFamily {
 public:
  std::string name() const override { return "exponential"; }
  std::vector<std::string> parameter_names() const override {
    return {"rate"};
  }
  void validate(Theta theta) const override {
    detail::expect_arity(*this, theta);
    detail::expect_positive(*this, "rate", theta[0]);
  }
  Support support(Theta) const override { return {0.0, kInf, true, false}; }

  double log_pdf(Theta theta, double x) const override {
    return std::log(theta[0]) - theta[0] * x;
  }
  double pdf(Theta theta, double x) const override {
    return theta[0] * std::exp(-theta[0] * x);
  }
  double cdf(Theta theta, double x) const override {
    return -std::expm1(-theta[0] * x);
  }
  double quantile(Theta theta, double u) const override {
    if (u >= 1.0) return kInf;
    return -std::log1p(-u) / theta[0];
  }
  double log_cdf(Theta theta, double x) const override {
    if (x <= 0.0) return -kInf;
    return log1mexp(-theta[0] * x);
  }
  double log_sf(Theta theta, double x) const override {
    return -theta[0] * x;
  }
  double quantile_from_log_cdf(Theta theta, double log_u) const override {
    if (log_u >= 0.0) return kInf;
    return -log1mexp(log_u) / theta[0];
  }
  double quantile_from_log_sf(Theta theta, double log_v) const override {
    return -log_v / theta[0];
  }
};

class WeibullFamily final : public BaseFamily {
 public:
  std::string name() const override { return "weibull"; }
  std::vector<std::string> parameter_names() const override {
    return {"shape", "scale"};
  }
  void validate(Theta theta) const override {
    detail::expect_arity(*this, theta);
    detail::expect_positive(*this, "shape", theta[0]);
    detail::expect_positive(*this, "scale", theta[1]);
  }
  Support support(Theta) const override { return {0.0, kInf, true, false}; }

  double log_pdf(Theta theta, double x) const override {
    const double k = theta[0];
    const double s = theta[1];
    if (x == 0.0) {
      if (k < 1.0) return kInf;
      if (k > 1.0) return -kInf;
      return -std::log(s);
    }
    const double y = x / s;
    return std::log(k / s) + (k - 1.0) * std::log(y) - std::pow(y, k);
  }
  double cdf(Theta theta, double x) const override {
    return -std::expm1(-std::pow(x / theta[1], theta[0]));
  }
  double quantile(Theta theta, double u) const override {
    if (u >= 1.0) return kInf;
    return theta[1] * std::pow(-std::log1p(-u), 1.0 / theta[0]);
  }
  double log_cdf(Theta theta, double x) const override {
    if (x <= 0.0) return -kInf;
    // ln(1 - exp(-H)) with H = (x/s)^k; for tiny H use ln H - H/2 so the
    // result stays finite after H itself underflows.
    const double log_h = theta[0] * std::log(x / theta[1]);
    if (log_h < -20.0) return log_h - 0.5 * std::exp(log_h);
    return log1mexp(-std::exp(log_h));
  }
  double log_sf(Theta theta, double x) const override {
    return -std::pow(x / theta[1], theta[0]);
  }
  double quantile_from_log_cdf(Theta theta, double log_u) const override {
    if (log_u >= 0.0) return kInf;
    return theta[1] * std::pow(-log1mexp(log_u), 1.0 / theta[0]);
  }
  double quantile_from_log_sf(Theta theta, double log_v) const override {
    return theta[1] * std::pow(-log_v, 1.0 / theta[0]);
  }
};

// A family bound to a validated parameter vector. Immutable; copies share the
// family object.
class BaseDistribution {
 public:
  BaseDistribution(std::shared_ptr<const BaseFamily> family,
                   std::vector<double> theta)
      : family_(std::move(family)), theta_(std::move(theta)) {
    if (!family_) throw DomainError("base distribution: null family");
    family_->validate(theta_);
    support_ = family_->support(theta_);
  }

  static BaseDistribution uniform() {
    return {std::make_shared<UniformFamily>(), {}};
  }
  static BaseDistribution exponential(double rate) {
    return {std::make_shared<ExponentialFamily>(), {rate}};
  }
  static BaseDistribution weibull(double shape, double scale) {
    return {std::make_shared<WeibullFamily>(), {shape, scale}};
  }

  const BaseFamily& family() const { return *family_; }
  const std::shared_ptr<const BaseFamily>& family_ptr() const {
    return family_;
  }
  std::string family_name() const { return family_->name(); }
  Theta theta() const { return theta_; }
  const Support& support() const { return support_; }

  BaseDistribution with_theta(std::vector<double> theta) const {
    return {family_, std::move(theta)};
  }

  // Same family name and bitwise-equal parameters.
  bool same_law(const BaseDistribution& other) const {
    return family_name() == other.family_name() && theta_ == other.theta_;
  }

  double pdf(double x) const {
    if (std::isnan(x)) return x;
    if (!support_.contains(x)) return 0.0;
    return family_->pdf(theta_, x);
  }
  double log_pdf(double x) const {
    if (std::isnan(x)) return x;
    if (!support_.contains(x)) return -kInf;
    return family_->log_pdf(theta_, x);
  }
  double cdf(double x) const {
    if (std::isnan(x)) return x;
    if (x <= support_.lower) return 0.0;
    if (x >= support_.upper) return 1.0;
    return std::clamp(family_->cdf(theta_, x), 0.0, 1.0);
  }
  double log_cdf(double x) const {
    if (std::isnan(x)) return x;
    if (x <= support_.lower) return -kInf;
    if (x >= support_.upper) return 0.0;
    return std::min(family_->log_cdf(theta_, x), 0.0);
  }
  double log_sf(double x) const {
    if (std::isnan(x)) return x;
    if (x <= support_.lower) return 0.0;
    if (x >= support_.upper) return -kInf;
    return std::min(family_->log_sf(theta_, x), 0.0);
  }

  // Inverse CDF on the open interval (0, 1).
  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) {
      throw DomainError("quantile: u must lie in (0, 1), got " +
                        format_double(u));
    }
    return family_->quantile(theta_, u);
  }
  double quantile_from_log_cdf(double log_u) const {
    if (log_u == -kInf) return support_.lower;
    return clamp_to_support(family_->quantile_from_log_cdf(theta_, log_u));
  }
  double quantile_from_log_sf(double log_v) const {
    if (log_v == -kInf) return support_.upper;
    return clamp_to_support(family_->quantile_from_log_sf(theta_, log_v));
  }

  // Text descriptor, e.g. "weibull(shape=2,scale=1)".
  std::string descriptor() const {
    std::string out = family_->name() + "(";
    const auto names = family_->parameter_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i > 0) out += ",";
      out += names[i] + "=" + format_double(theta_[i]);
    }
    return out + ")";
  }

 private:
  double clamp_to_support(double x) const {
    return std::clamp(x, support_.lower, support_.upper);
  }

  std::shared_ptr<const BaseFamily> family_;
  std::vector<double> theta_;
  Support support_;
};

// Name -> family lookup used by the descriptor parser. The global registry
// comes preloaded with the bundled families.
class FamilyRegistry {
 public:
  FamilyRegistry() = default;

  static FamilyRegistry& global() {
    static FamilyRegistry registry = [] {
      FamilyRegistry r;
      r.add(std::make_shared<UniformFamily>());
      r.add(std::make_shared<ExponentialFamily>());
      r.add(std::make_shared<WeibullFamily>());
      return r;
    }();
    return registry;
  }

  FamilyRegistry(const FamilyRegistry& other) : families_(other.snapshot()) {}
  FamilyRegistry& operator=(const FamilyRegistry&) = delete;

  void add(std::shared_ptr<const BaseFamily> family) {
    if (!family) throw DomainError("registry: null family");
    std::lock_guard lock(mutex_);
    const auto name = family->name();
    if (!families_.emplace(name, std::move(family)).second) {
      throw DomainError("registry: family '" + name + "' already registered");
    }
  }

  std::shared_ptr<const BaseFamily> find(std::string_view name) const {
    std::lock_guard lock(mutex_);
    const auto it = families_.find(std::string(name));
    return it == families_.end() ? nullptr : it->second;
  }

  std::vector<std::string> names() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [name, fam] : families_) out.push_back(name);
    return out;
  }

 private:
  std::map<std::string, std::shared_ptr<const BaseFamily>> snapshot() const {
    std::lock_guard lock(mutex_);
    return families_;
  }

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const BaseFamily>> families_;
};

}  // namespace lehmann
