#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "../tools/cli.hpp"
#include "lehmann/lehmann.hpp"

using namespace lehmann;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lehmann");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("lehmann_cli_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Exit status of the real executable.
int exit_code(const std::string& args) {
  const std::string cmd =
      std::string(LEHMANN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

}  // namespace

TEST(CliPowerloss, CsvRows) {
  const auto r = run({"powerloss", "--lambda-min", "1", "--lambda-max", "10",
                      "--steps", "10", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"lambda", "power_loss"}));
  EXPECT_EQ(std::stod(rows[1][0]), 1.0);
  EXPECT_EQ(std::stod(rows[1][1]), 0.0);
  EXPECT_EQ(std::stod(rows[2][0]), 2.0);
  EXPECT_NEAR(std::stod(rows[2][1]), 0.193147, 5e-7);
  EXPECT_EQ(std::stod(rows[10][0]), 10.0);
  EXPECT_NEAR(std::stod(rows[10][1]), std::log(10.0) - 0.9, 1e-12);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    EXPECT_GT(std::stod(rows[i][1]), std::stod(rows[i - 1][1]));
  }
}

TEST(CliPowerloss, SvgHasOnePath) {
  const auto r = run({"powerloss", "--format", "svg"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("<?xml", 0), 0u);
  std::size_t paths = 0;
  for (auto pos = r.out.find("<path"); pos != std::string::npos;
       pos = r.out.find("<path", pos + 1)) {
    ++paths;
  }
  EXPECT_EQ(paths, 1u);
  EXPECT_NE(r.out.find(">lambda<"), std::string::npos);
  EXPECT_NE(r.out.find(">power loss (nats)<"), std::string::npos);
}

TEST(CliPowerloss, BadRangeIsUsageError) {
  EXPECT_EQ(run({"powerloss", "--lambda-min", "0"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"powerloss", "--lambda-min", "5", "--lambda-max", "2"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"powerloss", "--steps", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"powerloss", "--format", "png"}).code, cli::kExitUsage);
}

TEST(CliKl, QuadratureValue) {
  const auto r = run({"kl", "--p", "lehmann1(base=exponential(rate=1),lambda=2)", "--q",
                      "lehmann1(base=exponential(rate=1),lambda=1)"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["value"].get<double>(), 0.193147, 1e-6);
  EXPECT_EQ(j["method"], "quadrature");
}

TEST(CliKl, OtherMethods) {
  const std::string p = "lehmann1(base=uniform(),lambda=3)";
  const std::string q = "lehmann1(base=uniform(),lambda=1)";
  const auto closed = run({"kl", "--p", p, "--q", q, "--method", "closed_form"});
  ASSERT_EQ(closed.code, 0) << closed.err;
  const auto jc = nlohmann::json::parse(closed.out);
  EXPECT_EQ(jc["value"].get<double>(), power_loss_closed(3.0));
  EXPECT_EQ(jc["error_estimate"].get<double>(), 0.0);

  const auto mc = run({"kl", "--p", p, "--q", q, "--method", "monte_carlo", "--n",
                       "20000", "--seed", "4"});
  ASSERT_EQ(mc.code, 0) << mc.err;
  const auto jm = nlohmann::json::parse(mc.out);
  EXPECT_EQ(jm["method"], "monte_carlo");
  EXPECT_NEAR(jm["value"].get<double>(), power_loss_closed(3.0),
              4.0 * jm["error_estimate"].get<double>());

  // closed form only covers first-alternative pairs against lambda = 1
  EXPECT_EQ(run({"kl", "--p", p, "--q", "lehmann1(base=uniform(),lambda=2)",
                 "--method", "closed_form"})
                .code,
            cli::kExitUsage);
}

TEST(CliKl, SupportMismatchIsUsageError) {
  const auto r = run({"kl", "--p", "uniform()", "--q", "exponential(rate=1)"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("support"), std::string::npos);
}

TEST(CliSample, ZeroSizeExitsTwo) {
  EXPECT_EQ(run({"sample", "--dist", "uniform()", "--n", "0"}).code, cli::kExitUsage);
  EXPECT_EQ(exit_code("sample --dist 'uniform()' -n 0"), 2);
}

TEST(CliSample, MatchesLibraryAndIsDeterministic) {
  const auto a = run({"sample", "--dist", "lehmann2(base=weibull(shape=2,scale=1),lambda=3)",
                      "--n", "100", "--seed", "11"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run({"sample", "--dist", "weibull(shape=2,scale=1)", "--lambda", "3",
                      "--alternative", "second", "--n", "100", "--seed", "11"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  const auto lib = sample(parse_extended_descriptor(
                              "lehmann2(base=weibull(shape=2,scale=1),lambda=3)"),
                          100, 11);
  EXPECT_EQ(a.out, sample_to_csv(lib));
  EXPECT_EQ(a.out, run({"sample", "--dist",
                        "lehmann2(base=weibull(shape=2,scale=1),lambda=3)", "--n", "100",
                        "--seed", "11"})
                       .out);
}

TEST(CliSample, JsonFormat) {
  const auto r = run({"sample", "--dist", "uniform()", "--n", "3", "--seed", "1",
                      "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["values"].size(), 3u);
  EXPECT_EQ(j["seed"], 1u);
  EXPECT_EQ(j["generator"], std::string(kGeneratorName));
}

TEST(CliFit, RoundTripIsBitIdentical) {
  TempDir dir;
  const auto path = dir.file("s.csv");
  const std::string desc = "lehmann1(base=uniform(),lambda=2)";
  ASSERT_EQ(run({"sample", "--dist", desc, "--n", "10000", "--seed", "99", "--out", path})
                .code,
            0);
  const auto r = run({"fit", path, "--dist", "uniform()"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);

  const auto s = sample(parse_extended_descriptor(desc), 10000, 99);
  const auto lib = fit_full(Alternative::First, FamilyRegistry::global().find("uniform"),
                            s.values, {});
  EXPECT_EQ(j["lambda_hat"].get<double>(), lib.lambda_hat);
  EXPECT_EQ(j["loglik"].get<double>(), lib.loglik);
  EXPECT_EQ(j["n"], 10000u);
  EXPECT_NEAR(lib.lambda_hat, 2.0, 3.0 * 2.0 / std::sqrt(1e4));
}

TEST(CliFit, ModesAndBounds) {
  TempDir dir;
  const auto path = dir.file("e.csv");
  ASSERT_EQ(run({"sample", "--dist", "lehmann1(base=exponential(rate=2),lambda=1.5)",
                 "--n", "500", "--seed", "3", "--out", path})
                .code,
            0);
  const auto full = run({"fit", "--in", path, "--dist", "exponential(rate=1)"});
  ASSERT_EQ(full.code, 0) << full.err;
  EXPECT_EQ(nlohmann::json::parse(full.out)["theta_hat"].size(), 1u);

  const auto restricted = run({"fit", path, "--dist", "exponential(rate=1)", "--mode",
                               "restricted", "--lambda", "1"});
  ASSERT_EQ(restricted.code, 0) << restricted.err;
  EXPECT_EQ(nlohmann::json::parse(restricted.out)["lambda_hat"].get<double>(), 1.0);

  const auto lambda_only =
      run({"fit", path, "--dist", "exponential(rate=2)", "--mode", "lambda"});
  ASSERT_EQ(lambda_only.code, 0) << lambda_only.err;
  EXPECT_EQ(nlohmann::json::parse(lambda_only.out)["theta_hat"][0].get<double>(), 2.0);

  const auto boxed = run({"fit", path, "--dist", "exponential(rate=1)", "--theta-lower",
                          "0.1", "--theta-upper", "0.5"});
  ASSERT_EQ(boxed.code, 0) << boxed.err;
  EXPECT_FALSE(nlohmann::json::parse(boxed.out)["warnings"].empty());

  EXPECT_EQ(run({"fit", path, "--dist", "exponential(rate=1)", "--mode", "restricted"})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"fit", path, "--dist", "exponential(rate=1)", "--theta-lower", "1,2"})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"fit", dir.file("missing.csv"), "--dist", "uniform()"}).code,
            cli::kExitUsage);
}

TEST(CliFit, DegenerateSampleExitsOne) {
  TempDir dir;
  const auto path = dir.file("flat.csv");
  std::ofstream(path) << "value\n2\n2\n2\n";
  const auto r = run({"fit", path, "--dist", "exponential(rate=1)"});
  EXPECT_EQ(r.code, cli::kExitNumerical);
  EXPECT_NE(r.err.find("degenerate"), std::string::npos);
  EXPECT_EQ(exit_code("fit " + path + " --dist 'exponential(rate=1)'"), 1);
}

TEST(CliMoments, JsonAndCsv) {
  const auto j = run({"moments", "--dist", "lehmann1(base=uniform(),lambda=2)", "--k", "1"});
  ASSERT_EQ(j.code, 0) << j.err;
  const auto parsed = nlohmann::json::parse(j.out);
  EXPECT_NEAR(parsed["moment"].get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(parsed["k"], 1);
  const auto c = run({"moments", "--dist", "exponential(rate=2)", "--format", "csv"});
  ASSERT_EQ(c.code, 0) << c.err;
  const auto rows = csv_rows(c.out);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_NEAR(std::stod(rows.back().back()), 0.5, 1e-10);
}

TEST(CliErrors, ExitCodes) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"sample", "--dist", "uniform()", "--n", "5", "--bogus"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  const auto bad = run({"sample", "--dist", "gamma(shape=1)", "--n", "5"});
  EXPECT_EQ(bad.code, cli::kExitUsage);
  EXPECT_NE(bad.err.find("position 0"), std::string::npos) << bad.err;
  EXPECT_EQ(exit_code("sample --dist 'uniform()' --n 5 --bogus"), 2);
  EXPECT_EQ(exit_code("moments --dist 'uniform()'"), 0);
}

TEST(CliErrors, HelpExitsZeroEverywhere) {
  for (const char* sub : {"sample", "fit", "moments", "kl", "powerloss", "simulate"}) {
    const auto r = run({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
    EXPECT_EQ(exit_code(std::string(sub) + " --help"), 0) << sub;
  }
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliSimulate, WritesDeterministicReport) {
  TempDir dir;
  const auto cfg_path = dir.file("study.cfg");
  std::ofstream(cfg_path) << "kind = lehmann1\n"
                             "base = uniform()\n"
                             "lambda_grid = 1, 2\n"
                             "n = 20\n"
                             "replications = 100\n"
                             "calibration_replications = 1000\n"
                             "seed = 5\n";
  const auto a = run({"simulate", "--config", cfg_path, "--format", "csv"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run({"simulate", "--config", cfg_path, "--format", "csv", "--threads",
                      "2"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("# config_hash=", 0), 0u);

  const auto out_path = dir.file("report.json");
  ASSERT_EQ(run({"simulate", "--config", cfg_path, "--out", out_path}).code, 0);
  const auto j = nlohmann::json::parse(slurp(out_path));
  EXPECT_EQ(j["cells"].size(), 2u);
  EXPECT_EQ(j["seed"], 5u);

  std::ofstream(dir.file("bad.cfg")) << "base = uniform()\nreplications = 5\n";
  EXPECT_EQ(run({"simulate", "--config", dir.file("bad.cfg")}).code, cli::kExitUsage);
  EXPECT_EQ(run({"simulate", "--config", dir.file("none.cfg")}).code, cli::kExitUsage);
}
