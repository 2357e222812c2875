#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lehmann/lehmann.hpp"

namespace lehmann::cli {

namespace {

// Thrown for bad flag combinations detected after CLI11 parsing.
struct UsageError : Error {
  using Error::Error;
};

struct DistFlags {
  std::string dist;
  std::optional<double> lambda;
  std::string alternative = "first";

  void add_to(CLI::App* cmd, bool required = true) {
    cmd->add_option("--dist", dist,
                    "Distribution descriptor, e.g. 'lehmann1(base=uniform(),lambda=2)' "
                    "or a base descriptor such as 'exponential(rate=1)'")
        ->required(required);
    cmd->add_option("--lambda", lambda,
                    "Exponent; overrides the descriptor's lambda")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alternative", alternative,
                    "Lehmann alternative used with a bare base descriptor")
        ->check(CLI::IsMember({"first", "second"}));
  }

  ExtendedDistribution resolve() const {
    const Alternative kind =
        alternative == "second" ? Alternative::Second : Alternative::First;
    auto g = parse_distribution(dist, 1.0, kind);
    if (lambda) g = ExtendedDistribution(g.base(), *lambda, g.kind());
    return g;
  }
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open output file '" + path + "'");
  file << text;
  if (!file) throw UsageError("failed writing '" + path + "'");
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

ThetaBounds bounds_from_flags(const BaseFamily& family,
                              const std::vector<double>& lower,
                              const std::vector<double>& upper) {
  if (lower.empty() && upper.empty()) return default_theta_bounds(family);
  auto bounds = default_theta_bounds(family);
  if (!lower.empty() && lower.size() != bounds.size()) {
    throw UsageError("--theta-lower needs " + std::to_string(bounds.size()) +
                     " value(s)");
  }
  if (!upper.empty() && upper.size() != bounds.size()) {
    throw UsageError("--theta-upper needs " + std::to_string(bounds.size()) +
                     " value(s)");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) bounds[i].first = lower[i];
  for (std::size_t i = 0; i < upper.size(); ++i) bounds[i].second = upper[i];
  return bounds;
}

Sample read_sample_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open input file '" + path + "'");
  return read_sample_csv(in);
}

std::vector<double> uniform_grid(double lo, double hi, int steps) {
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
  }
  grid.back() = hi;
  return grid;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Distributions generated by Lehmann alternatives", "lehmann"};
  app.require_subcommand(1);
  std::string out_path;
  std::function<std::string()> action;

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Draw an inverse-transform sample");
  DistFlags sample_dist;
  sample_dist.add_to(sample_cmd);
  std::size_t sample_n = 0;
  std::uint64_t sample_seed = 0;
  std::string sample_format = "csv";
  sample_cmd->add_option("-n,--n", sample_n, "Sample size")
      ->required()
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sample_seed, "Generator seed");
  sample_cmd->add_option("--format", sample_format)->check(CLI::IsMember({"csv", "json"}));
  sample_cmd->add_option("--out", out_path, "Output file (default stdout)");
  sample_cmd->callback([&] {
    action = [&] {
      const auto s = sample(sample_dist.resolve(), sample_n, sample_seed);
      if (sample_format == "json") {
        return json_text({{"seed", s.seed},
                          {"source", s.source},
                          {"generator", s.generator},
                          {"values", s.values}});
      }
      return sample_to_csv(s);
    };
  });

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood fit of a sample file");
  DistFlags fit_dist;
  fit_dist.add_to(fit_cmd);
  std::string fit_input;
  std::string fit_mode = "full";
  std::vector<double> theta_lower;
  std::vector<double> theta_upper;
  fit_cmd->add_option("input,--in", fit_input, "Sample CSV as written by 'sample'")
      ->required();
  fit_cmd->add_option("--mode", fit_mode,
                      "full: free (lambda, theta); restricted: theta with --lambda "
                      "fixed; lambda: closed-form lambda at the descriptor's theta")
      ->check(CLI::IsMember({"full", "restricted", "lambda"}));
  fit_cmd->add_option("--theta-lower", theta_lower)->delimiter(',');
  fit_cmd->add_option("--theta-upper", theta_upper)->delimiter(',');
  fit_cmd->add_option("--out", out_path, "Output file (default stdout)");
  fit_cmd->callback([&] {
    action = [&] {
      const auto g = fit_dist.resolve();
      const auto s = read_sample_file(fit_input);
      const auto& family = g.base().family_ptr();
      const auto bounds = bounds_from_flags(*family, theta_lower, theta_upper);
      FitResult fit;
      if (fit_mode == "lambda") {
        fit.n = s.size();
        fit.theta_hat.assign(g.base().theta().begin(), g.base().theta().end());
        fit.lambda_hat = mle_lambda(g.kind(), g.base(), s.values);
        fit.loglik = loglik(g.kind(), g.base(), fit.lambda_hat, s.values);
      } else if (fit_mode == "restricted") {
        if (!fit_dist.lambda) throw UsageError("--mode restricted needs --lambda");
        fit = fit_restricted(g.kind(), family, s.values, *fit_dist.lambda, bounds);
      } else {
        fit = fit_full(g.kind(), family, s.values, bounds);
      }
      return json_text(to_json(fit));
    };
  });

  // moments
  auto* mom_cmd = app.add_subcommand("moments", "Raw moment E[X^k] by quadrature");
  DistFlags mom_dist;
  mom_dist.add_to(mom_cmd);
  int mom_k = 1;
  std::string mom_format = "json";
  mom_cmd->add_option("-k,--k", mom_k, "Moment order")->check(CLI::PositiveNumber);
  mom_cmd->add_option("--format", mom_format)->check(CLI::IsMember({"csv", "json"}));
  mom_cmd->add_option("--out", out_path, "Output file (default stdout)");
  mom_cmd->callback([&] {
    action = [&] {
      const auto g = mom_dist.resolve();
      const double m = moment(g, mom_k);
      if (mom_format == "csv") {
        return "k,moment\n" + std::to_string(mom_k) + "," + format_double(m) + "\n";
      }
      return json_text({{"distribution", g.descriptor()}, {"k", mom_k}, {"moment", m}});
    };
  });

  // kl
  auto* kl_cmd = app.add_subcommand("kl", "Kullback-Leibler divergence D(p | q) in nats");
  std::string kl_p;
  std::string kl_q;
  std::string kl_method = "quadrature";
  std::size_t kl_n = 100000;
  std::uint64_t kl_seed = 0;
  kl_cmd->add_option("--p", kl_p, "Descriptor of p")->required();
  kl_cmd->add_option("--q", kl_q, "Descriptor of q")->required();
  kl_cmd->add_option("--method", kl_method)
      ->check(CLI::IsMember({"quadrature", "monte_carlo", "closed_form"}));
  kl_cmd->add_option("-n,--n", kl_n, "Monte Carlo draws")->check(CLI::Range(2ul, 1ul << 40));
  kl_cmd->add_option("--seed", kl_seed, "Monte Carlo seed");
  kl_cmd->add_option("--out", out_path, "Output file (default stdout)");
  kl_cmd->callback([&] {
    action = [&] {
      const auto p = parse_distribution(kl_p);
      const auto q = parse_distribution(kl_q);
      KlResult r;
      if (kl_method == "monte_carlo") {
        r = mean_log_ratio_mc(p, q, kl_n, kl_seed);
      } else if (kl_method == "closed_form") {
        if (p.kind() != Alternative::First || q.kind() != Alternative::First ||
            !p.base().same_law(q.base()) || q.lambda() != 1.0) {
          throw UsageError(
              "closed_form needs p = lehmann1(base, lambda) and q = lehmann1(base, 1)");
        }
        r = power_loss(p.lambda());
        r.meta = "p=" + p.descriptor() + "; q=" + q.descriptor();
      } else {
        r = kl_numeric(p, q);
      }
      return json_text(to_json(r));
    };
  });

  // powerloss
  auto* pl_cmd = app.add_subcommand(
      "powerloss", "Power loss ln(lambda) + (1 - lambda)/lambda on a lambda grid");
  double pl_min = 1.0;
  double pl_max = 10.0;
  int pl_steps = 10;
  std::string pl_format = "csv";
  pl_cmd->add_option("--lambda-min", pl_min);
  pl_cmd->add_option("--lambda-max", pl_max);
  pl_cmd->add_option("--steps", pl_steps, "Number of grid points (>= 2)");
  pl_cmd->add_option("--format", pl_format)->check(CLI::IsMember({"csv", "svg"}));
  pl_cmd->add_option("--out", out_path, "Output file (default stdout)");
  pl_cmd->callback([&] {
    action = [&] {
      if (!(pl_min > 0.0) || !(pl_min < pl_max) || !std::isfinite(pl_max)) {
        throw UsageError("need 0 < --lambda-min < --lambda-max");
      }
      if (pl_steps < 2) throw UsageError("--steps must be >= 2");
      const auto grid = uniform_grid(pl_min, pl_max, pl_steps);
      std::vector<double> loss;
      for (double l : grid) loss.push_back(power_loss_closed(l));
      if (pl_format == "svg") {
        return render_curve_svg(grid, loss,
                                {"Loss of power as a function of lambda", "lambda",
                                 "power loss (nats)"});
      }
      std::string csv = "lambda,power_loss\n";
      for (std::size_t i = 0; i < grid.size(); ++i) {
        csv += format_double(grid[i]) + "," + format_double(loss[i]) + "\n";
      }
      return csv;
    };
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo LRT power study");
  std::string sim_config;
  std::string sim_format = "json";
  std::optional<unsigned> sim_threads;
  sim_cmd->add_option("--config", sim_config, "Key/value config file")->required();
  sim_cmd->add_option("--format", sim_format)->check(CLI::IsMember({"csv", "json"}));
  sim_cmd->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");
  sim_cmd->add_option("--out", out_path, "Output file (default stdout)");
  sim_cmd->callback([&] {
    action = [&] {
      std::ifstream in(sim_config, std::ios::binary);
      if (!in) throw UsageError("cannot open config '" + sim_config + "'");
      std::stringstream text;
      text << in.rdbuf();
      auto cfg = parse_sim_config(text.str());
      if (sim_threads) cfg.threads = *sim_threads;
      const auto report = run_power_study(cfg);
      return sim_format == "csv" ? to_csv(report) : json_text(to_json(report));
    };
  });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (const auto* sub = app.get_subcommands().empty() ? nullptr
                                                        : app.get_subcommands().front()) {
      err << sub->help();
    } else {
      err << app.help();
    }
    return kExitUsage;
  }

  try {
    emit(action(), out_path, out);
    return kExitOk;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DegenerateSample& e) {
    err << "degenerate sample: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace lehmann::cli
