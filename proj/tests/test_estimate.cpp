#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lehmann/estimate.hpp"
#include "oracles.hpp"

using namespace lehmann;

namespace {

std::shared_ptr<const BaseFamily> family(const std::string& name) {
  return FamilyRegistry::global().find(name);
}

std::vector<double> draw(const ExtendedDistribution& g, std::size_t n,
                         std::uint64_t seed) {
  return sample(g, n, seed).values;
}

}  // namespace

TEST(Loglik, UnitLambdaIsBaseLoglik) {
  const auto b = BaseDistribution::weibull(1.7, 2.0);
  const auto x = draw(extend(b, 1.0), 100, 3);
  double expected = 0.0;
  for (double v : x) expected += b.log_pdf(v);
  EXPECT_NEAR(loglik(Alternative::First, b, 1.0, x), expected, 1e-10);
  EXPECT_NEAR(loglik(Alternative::Second, b, 1.0, x), expected, 1e-10);
}

TEST(Loglik, HandEvaluation) {
  const std::vector<double> x = {0.5};
  EXPECT_NEAR(loglik(Alternative::First, BaseDistribution::uniform(), 2.0, x), 0.0,
              1e-15);
}

TEST(Loglik, AgreesWithSumOfExtendedLogPdf) {
  Xoshiro256 rng(77);
  const std::vector<BaseDistribution> bases = {BaseDistribution::uniform(),
                                               BaseDistribution::exponential(0.6),
                                               BaseDistribution::weibull(3.0, 1.5)};
  for (const auto& b : bases) {
    for (auto kind : {Alternative::First, Alternative::Second}) {
      for (int rep = 0; rep < 20; ++rep) {
        const double lambda = 0.1 + 10.0 * rng.uniform_open();
        const auto g = extend(b, lambda, kind);
        const auto x = draw(g, 50, rng());
        double expected = 0.0;
        for (double v : x) expected += g.log_pdf(v);
        ASSERT_NEAR(loglik(g, x), expected, 1e-10) << g.descriptor();
      }
    }
  }
}

TEST(Loglik, OutOfSupportNamesTheIndex) {
  const std::vector<double> x = {0.2, 0.4, 1.5};
  try {
    loglik(Alternative::First, BaseDistribution::uniform(), 2.0, x);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("observation 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(mle_lambda(Alternative::First, BaseDistribution::exponential(1.0),
                          std::vector<double>{1.0, -0.5}),
               DomainError);
}

TEST(MleLambda, HandExamples) {
  const auto u = BaseDistribution::uniform();
  EXPECT_NEAR(mle_lambda(Alternative::First, u, std::vector<double>{std::exp(-1.0)}),
              1.0, 1e-12);
  EXPECT_NEAR(mle_lambda(Alternative::First, u,
                         std::vector<double>{std::exp(-2.0), std::exp(-2.0)}),
              0.5, 1e-12);
  // second alternative: 1 - F = e^-1
  EXPECT_NEAR(mle_lambda(Alternative::Second, u,
                         std::vector<double>{1.0 - std::exp(-1.0)}),
              1.0, 1e-12);
}

TEST(MleLambda, Consistency) {
  const auto g = extend(BaseDistribution::uniform(), 2.5);
  const double hat = mle_lambda(Alternative::First, g.base(), draw(g, 10000, 2025));
  EXPECT_NEAR(hat, 2.5, 3.0 * 2.5 / std::sqrt(1e4));
}

TEST(MleLambda, ExponentialRateOracleForSecondAlternative) {
  // Under the second alternative of exponential(rate), -ln(1 - F(x)) = rate x,
  // so the MLE is n / (rate * sum x).
  const auto b = BaseDistribution::exponential(1.5);
  const auto x = draw(extend(b, 2.0, Alternative::Second), 500, 8);
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  EXPECT_NEAR(mle_lambda(Alternative::Second, b, x), 500.0 / (1.5 * sum), 1e-10);
}

TEST(MleLambda, DegenerateSamples) {
  const auto u = BaseDistribution::uniform();
  EXPECT_THROW(mle_lambda(Alternative::First, u, std::vector<double>{1.0, 1.0}),
               DegenerateSample);
  EXPECT_THROW(mle_lambda(Alternative::Second, u, std::vector<double>{0.0}),
               DegenerateSample);
  EXPECT_THROW(mle_lambda(Alternative::First, u, std::vector<double>{}), DomainError);
}

TEST(MleLambda, IsTheProfileMaximum) {
  Xoshiro256 rng(5);
  const std::vector<BaseDistribution> bases = {BaseDistribution::exponential(0.8),
                                               BaseDistribution::weibull(1.5, 2.0)};
  for (const auto& b : bases) {
    for (auto kind : {Alternative::First, Alternative::Second}) {
      for (int rep = 0; rep < 10; ++rep) {
        // data from a different law than the one being profiled
        const auto x = draw(extend(BaseDistribution::exponential(1.3), 2.0), 40, rng());
        const double hat = mle_lambda(kind, b, x);
        const double top = loglik(kind, b, hat, x);
        for (int i = 1; i <= 100; ++i) {
          const double lambda = 0.1 * i;
          ASSERT_GE(top, loglik(kind, b, lambda, x)) << "lambda=" << lambda;
        }
      }
    }
  }
}

TEST(FitFull, UniformReducesToMleLambda) {
  const auto g = extend(BaseDistribution::uniform(), 1.7);
  const auto x = draw(g, 300, 12);
  const auto fit = fit_full(Alternative::First, family("uniform"), x, {});
  EXPECT_EQ(fit.lambda_hat, mle_lambda(Alternative::First, g.base(), x));
  EXPECT_TRUE(fit.theta_hat.empty());
  EXPECT_EQ(fit.n, 300u);
  EXPECT_NEAR(fit.loglik, loglik(Alternative::First, g.base(), fit.lambda_hat, x),
              1e-10);
}

TEST(FitFull, DominatesTheNull) {
  const auto fam = family("exponential");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = BaseDistribution::exponential(1.0);
    const auto x = draw(extend(b, 1.0), 50, seed);
    const auto fit = fit_full(Alternative::First, fam, x, default_theta_bounds(*fam));
    ASSERT_GE(fit.loglik, loglik(Alternative::First, b, 1.0, x)) << seed;
  }
}

TEST(FitFull, LoglikMatchesReportedPoint) {
  const auto fam = family("weibull");
  const auto x = draw(extend(BaseDistribution::weibull(2.0, 1.0), 2.0), 200, 4);
  const auto fit = fit_full(Alternative::First, fam, x, default_theta_bounds(*fam));
  const BaseDistribution at(fam, fit.theta_hat);
  EXPECT_GT(fit.lambda_hat, 0.0);
  EXPECT_NEAR(fit.loglik, loglik(Alternative::First, at, fit.lambda_hat, x), 1e-10);
}

TEST(FitFull, RecoversExponentialTruth) {
  const auto fam = family("exponential");
  const auto g = extend(BaseDistribution::exponential(1.0), 3.0);
  std::vector<double> lambdas;
  std::vector<double> rates;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto fit =
        fit_full(Alternative::First, fam, draw(g, 10000, seed), default_theta_bounds(*fam));
    lambdas.push_back(fit.lambda_hat);
    rates.push_back(fit.theta_hat.at(0));
  }
  EXPECT_NEAR(oracle::median(lambdas), 3.0, 0.3);
  EXPECT_NEAR(oracle::median(rates), 1.0, 0.1);
}

TEST(FitFull, IsDeterministic) {
  const auto fam = family("weibull");
  const auto x = draw(extend(BaseDistribution::weibull(1.2, 3.0), 0.7), 150, 21);
  const auto a = fit_full(Alternative::Second, fam, x, default_theta_bounds(*fam));
  const auto b = fit_full(Alternative::Second, fam, x, default_theta_bounds(*fam));
  EXPECT_EQ(a.lambda_hat, b.lambda_hat);
  EXPECT_EQ(a.theta_hat, b.theta_hat);
  EXPECT_EQ(a.loglik, b.loglik);
}

TEST(FitFull, BoundaryWarning) {
  const auto fam = family("exponential");
  const auto x = draw(extend(BaseDistribution::exponential(5.0), 1.0), 500, 9);
  // the box excludes the true rate, so the maximum sits on its upper edge
  const auto fit = fit_restricted(Alternative::First, fam, x, 1.0, {{0.1, 1.0}});
  ASSERT_EQ(fit.warnings.size(), 1u);
  EXPECT_NE(fit.warnings.front().find("upper bound"), std::string::npos);
  EXPECT_NEAR(fit.theta_hat.at(0), 1.0, 1e-6);
  const auto inside = fit_restricted(Alternative::First, fam, x, 1.0, {{0.1, 100.0}});
  EXPECT_TRUE(inside.warnings.empty());

  const auto full = fit_full(Alternative::First, fam, x, {{0.1, 1.0}});
  EXPECT_FALSE(full.warnings.empty());
}

TEST(FitFull, DegenerateSampleRaises) {
  const auto fam = family("exponential");
  const std::vector<double> same(20, 1.5);
  EXPECT_THROW(fit_full(Alternative::First, fam, same, default_theta_bounds(*fam)),
               DegenerateSample);
  EXPECT_THROW(fit_restricted(Alternative::First, fam, same, 1.0,
                              default_theta_bounds(*fam)),
               DegenerateSample);
}

TEST(FitFull, RejectsMalformedBounds) {
  const auto fam = family("weibull");
  const auto x = draw(extend(BaseDistribution::weibull(2.0, 1.0), 1.0), 50, 1);
  EXPECT_THROW(fit_full(Alternative::First, fam, x, {{0.1, 10.0}}), DomainError);
  EXPECT_THROW(fit_full(Alternative::First, fam, x, {{0.1, 10.0}, {5.0, 1.0}}),
               DomainError);
}

TEST(FitFull, ProfileTrace) {
  const auto fam = family("exponential");
  const auto x = draw(extend(BaseDistribution::exponential(2.0), 1.5), 100, 2);
  FitOptions opts;
  opts.record_trace = true;
  const auto fit = fit_full(Alternative::First, fam, x, default_theta_bounds(*fam), opts);
  ASSERT_FALSE(fit.profile_trace.empty());
  for (const auto& p : fit.profile_trace) {
    ASSERT_EQ(p.theta.size(), 1u);
    // the trace and the final value are summed in different orders
    ASSERT_LE(p.profile_loglik, fit.loglik + 1e-9 * std::abs(fit.loglik));
  }
}

TEST(FitRestricted, UniformKeepsLambda) {
  const auto x = draw(extend(BaseDistribution::uniform(), 2.0), 100, 6);
  const auto fit = fit_restricted(Alternative::First, family("uniform"), x, 3.0, {});
  EXPECT_EQ(fit.lambda_hat, 3.0);
  EXPECT_NEAR(fit.loglik,
              loglik(Alternative::First, BaseDistribution::uniform(), 3.0, x), 1e-12);
}

TEST(FitRestricted, MatchesExponentialClosedForm) {
  const auto fam = family("exponential");
  const auto x = draw(extend(BaseDistribution::exponential(2.0), 1.0), 2000, 31);
  const auto fit = fit_restricted(Alternative::First, fam, x, 1.0,
                                  default_theta_bounds(*fam));
  const double rate = 2000.0 / std::accumulate(x.begin(), x.end(), 0.0);
  EXPECT_NEAR(fit.theta_hat.at(0), rate, 1e-6 * rate);
}

TEST(FitRestricted, AtFullLambdaGivesFullTheta) {
  const auto fam = family("weibull");
  const auto x = draw(extend(BaseDistribution::weibull(1.5, 2.0), 2.0), 400, 13);
  const auto bounds = default_theta_bounds(*fam);
  const auto full = fit_full(Alternative::First, fam, x, bounds);
  const auto restricted =
      fit_restricted(Alternative::First, fam, x, full.lambda_hat, bounds);
  ASSERT_EQ(restricted.theta_hat.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(restricted.theta_hat[i], full.theta_hat[i],
                1e-3 * std::abs(full.theta_hat[i]));
  }
  EXPECT_NEAR(restricted.loglik, full.loglik, 1e-6);
}

TEST(FitRestricted, RejectsBadLambda) {
  const auto fam = family("exponential");
  const std::vector<double> x = {0.5, 1.0, 2.0};
  EXPECT_THROW(fit_restricted(Alternative::First, fam, x, 0.0, {{0.1, 10.0}}),
               DomainError);
}

TEST(Nesting, FullNeverBelowRestricted) {
  Xoshiro256 rng(404);
  const auto fam = family("exponential");
  const auto bounds = default_theta_bounds(*fam);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = draw(extend(BaseDistribution::exponential(0.5 + rng.uniform_open()),
                               0.5 + 3.0 * rng.uniform_open()),
                        60, rng());
    const auto full = fit_full(Alternative::First, fam, x, bounds);
    for (double lambda_fixed : {0.3, 1.0, 2.0, 5.0}) {
      const auto restricted = fit_restricted(Alternative::First, fam, x, lambda_fixed,
                                             bounds);
      ASSERT_GE(full.loglik, restricted.loglik)
          << "rep=" << rep << " lambda_fixed=" << lambda_fixed;
    }
    // At lambda_fixed = lambda_hat both fits reach the same optimum and only
    // rounding separates them; anchoring the full fit makes the order exact.
    const auto restricted =
        fit_restricted(Alternative::First, fam, x, full.lambda_hat, bounds);
    FitOptions opts;
    opts.anchors.emplace_back(full.lambda_hat, restricted.theta_hat);
    const auto anchored = fit_full(Alternative::First, fam, x, bounds, opts);
    ASSERT_GE(anchored.loglik, restricted.loglik) << "rep=" << rep;
    ASSERT_NEAR(anchored.loglik, full.loglik, 1e-9 * std::abs(full.loglik));
  }
}

TEST(Nesting, WeibullFullNeverBelowRestricted) {
  Xoshiro256 rng(405);
  const auto fam = family("weibull");
  const auto bounds = default_theta_bounds(*fam);
  for (int rep = 0; rep < 5; ++rep) {
    const auto x = draw(extend(BaseDistribution::weibull(1.0 + rng.uniform_open(), 2.0),
                               0.5 + 3.0 * rng.uniform_open()),
                        100, rng());
    const auto full = fit_full(Alternative::First, fam, x, bounds);
    for (double lambda_fixed : {0.5, 1.0, 3.0}) {
      const auto restricted = fit_restricted(Alternative::First, fam, x, lambda_fixed,
                                             bounds);
      ASSERT_GE(full.loglik, restricted.loglik)
          << "rep=" << rep << " lambda_fixed=" << lambda_fixed;
    }
  }
}

TEST(Nesting, AnchorsMakeComparisonsExact) {
  const auto fam = family("weibull");
  const auto bounds = default_theta_bounds(*fam);
  const auto x = draw(extend(BaseDistribution::weibull(2.0, 1.0), 1.0), 80, 17);
  const auto restricted = fit_restricted(Alternative::First, fam, x, 1.0, bounds);
  FitOptions opts;
  opts.anchors.emplace_back(1.0, restricted.theta_hat);
  const auto full = fit_full(Alternative::First, fam, x, bounds, opts);
  EXPECT_GE(full.loglik, restricted.loglik);
}

TEST(ComposeInvariance, UniformLambdaScales) {
  const auto g = extend(BaseDistribution::uniform(), 1.5);
  const double c = 4.0;
  std::vector<double> ratios;
  std::vector<double> scaled;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto base_hat = mle_lambda(Alternative::First, g.base(), draw(g, 500, seed));
    const auto comp_hat =
        mle_lambda(Alternative::First, g.base(), draw(compose(g, c), 500, seed));
    ratios.push_back(comp_hat / base_hat);
    scaled.push_back(comp_hat);
  }
  EXPECT_NEAR(oracle::median(ratios), c, 1e-9);
  EXPECT_NEAR(oracle::median(scaled), c * 1.5, 0.1 * c * 1.5);
}

TEST(FitJson, HasDocumentedKeys) {
  const auto fam = family("exponential");
  const auto x = draw(extend(BaseDistribution::exponential(1.0), 2.0), 50, 1);
  const auto j = to_json(fit_full(Alternative::First, fam, x, default_theta_bounds(*fam)));
  for (const char* key : {"lambda_hat", "theta_hat", "loglik", "n", "warnings"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["n"].get<std::size_t>(), 50u);
  EXPECT_TRUE(j["theta_hat"].is_array());
}
