#include <gtest/gtest.h>

#include <cmath>

#include "powerutil/cli.hpp"
#include "powerutil/error.hpp"

using namespace powerutil;
using nlohmann::json;

namespace {

const char* kMerton = R"(command = solve
[model]
family = genbs
mu0 = 0.08
var0 = 0.04
[preferences]
p = 2
)";

const char* kExplosion = R"(command = explode
[model]
family = time_changed
lambda = 0.5
y0 = 1
B.drift = 1
B.diffusion = 1
Z.measure = explosion
Z.C = auto
[preferences]
p = 0.5
T = 1
)";

const char* kKou = R"(command = verify
[model]
family = integrated_levy
B.drift = 0.05
B.diffusion = 0.04
B.measure = kou
B.intensity = 1
B.p_up = 0.5
B.eta_up = 10
B.eta_down = 5
B.scale = log
[preferences]
p = 2
[verify]
grid_resolution = 1e-5
)";

const char* kSimulate = R"(command = simulate
[model]
family = time_changed
lambda = 1.5
y0 = 0.6
B.drift = 0.3
B.diffusion = 1
Z.measure = cp_exp
Z.intensity = 2
Z.jump_rate = 5
[preferences]
p = 2
[simulation]
n_paths = 4000
n_steps = 20
seed = 99
)";

cli::RunOutput run_text(const std::string& text, const cli::Overrides& o = {}) {
  return cli::run(cli::parse_config(text, o));
}

ErrorCode config_code(const std::string& text) {
  try {
    cli::parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

std::string config_message(const std::string& text) {
  try {
    cli::parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Cli, SolveMerton) {
  const auto out = run_text(kMerton);
  EXPECT_EQ(out.exit_status, 0);
  EXPECT_NEAR(out.report["result"]["pi"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(out.report["result"]["location"], "interior");
  EXPECT_TRUE(cli::validate_report(out.report).empty());
}

TEST(Cli, ExplodeReproducesLog2OverLambda) {
  const auto out = run_text(kExplosion);
  ASSERT_EQ(out.exit_status, 0) << cli::render(out.report);
  const auto& r = out.report["result"];
  EXPECT_NEAR(r["explosion_time"].get<double>(), 2.0 * std::log(2.0), 1e-6);
  EXPECT_TRUE(r["finite_at_T"].get<bool>());
  EXPECT_TRUE(r.contains("bound"));
  EXPECT_EQ(out.report["config"]["model"]["Z.C"], "auto");
}

TEST(Cli, VerifyKouAgreesWithOracle) {
  const auto out = run_text(kKou);
  ASSERT_EQ(out.exit_status, 0) << cli::render(out.report);
  const auto& r = out.report["result"];
  EXPECT_TRUE(r["conditions"]["all_pass"].get<bool>());
  EXPECT_TRUE(r["agree"].get<bool>());
  EXPECT_LT(r["delta_pi"].get<double>(), 1e-5);
}

TEST(Cli, ValueMatchesLibraryAndRefusesDrift) {
  std::string text = kExplosion;
  text.replace(text.find("explode"), 7, "value");
  const auto out = run_text(text);
  ASSERT_EQ(out.exit_status, 0);
  const TimeChangedLevy m{0.0, make_triplet(1.0, 1.0), 0.5,
                          make_triplet(0.0, 0.0, LevyMeasure::explosion(-0.5, 0.5), Truncation::zero),
                          1.0};
  const auto v = value_closed_form(m, 2.0, Preferences{0.5, 1.0, 1.0});
  EXPECT_EQ(out.report["result"]["value"].get<double>(), v.value);

  text.replace(text.find("lambda = 0.5"), 12, "lambda = 0.5\nmu = 0.1");
  const auto bad = run_text(text);
  EXPECT_EQ(bad.exit_status, 1);
  ASSERT_EQ(bad.report["errors"].size(), 1u);
  EXPECT_EQ(bad.report["errors"][0]["code"], "NOT_CLOSED_FORM");
  EXPECT_TRUE(bad.report["result"].is_null());
  EXPECT_TRUE(cli::validate_report(bad.report).empty());
}

TEST(Cli, ConfigErrorsNameTheKey) {
  EXPECT_EQ(config_code("[model]\nfamily = genbs\nmu0 = abc\n"), ErrorCode::config_error);
  EXPECT_NE(config_message("[model]\nfamily = genbs\nmu0 = abc\n").find("model.mu0"),
            std::string::npos);
  EXPECT_NE(config_message("[model]\nfamily = genbs\nmuu = 1\n").find("model.muu"),
            std::string::npos);
  EXPECT_NE(config_message("[preferences]\np = 2\n").find("model.family"), std::string::npos);
  EXPECT_NE(config_message("[model]\nfamily = bns\nlambda = 1\ny0 = 1\nZ.measure = kou\n")
                .find("model.Z.intensity"),
            std::string::npos);
  EXPECT_NE(config_message("command = solvee\n[model]\nfamily = genbs\n").find("command"),
            std::string::npos);
  EXPECT_EQ(config_code("[model]\nfamily = genbs\nvar0 = 0.04\n[preferences]\np = 1\n"),
            ErrorCode::config_error);
}

TEST(Cli, OverridesTakePrecedence) {
  cli::Overrides o;
  o.command = "simulate";
  o.seed = 5;
  const auto cfg = cli::parse_config(kSimulate, o);
  EXPECT_EQ(cfg.command, cli::Command::simulate);
  EXPECT_EQ(cfg.sim->seed, 5u);
  EXPECT_EQ(cfg.resolved["simulation"]["seed"], 5u);
  o.command = "fly";
  EXPECT_THROW(cli::parse_config(kSimulate, o), Error);
}

TEST(Cli, ReportsRoundTripUnderSchema) {
  for (const char* text : {kMerton, kExplosion, kKou, kSimulate}) {
    const auto out = run_text(text);
    EXPECT_EQ(out.exit_status == 0, out.report["errors"].empty());
    const json back = json::parse(cli::render(out.report));
    EXPECT_EQ(back, out.report);
    EXPECT_TRUE(cli::validate_report(back).empty());
  }
  json broken = run_text(kMerton).report;
  broken["result"].erase("pi");
  EXPECT_FALSE(cli::validate_report(broken).empty());
  broken = run_text(kMerton).report;
  broken["errors"].push_back({{"code", "NOPE"}, {"message", "x"}});
  EXPECT_FALSE(cli::validate_report(broken).empty());
  EXPECT_TRUE(cli::validate_report(cli::failed_run("unknown", "CONFIG_ERROR", "x").report).empty());
}

TEST(Cli, SimulateIsIndependentOfWorkers) {
  cli::Overrides one;
  one.workers = 1;
  cli::Overrides four;
  four.workers = 4;
  const auto a = run_text(kSimulate, one);
  const auto b = run_text(kSimulate, four);
  ASSERT_EQ(a.exit_status, 0) << cli::render(a.report);
  EXPECT_EQ(cli::render(a.report), cli::render(b.report));
  EXPECT_FALSE(a.report["config"]["simulation"].contains("workers"));
}

TEST(Cli, PathCsvLayout) {
  cli::Overrides o;
  o.format = "csv";
  const auto out = run_text(kSimulate, o);
  ASSERT_EQ(out.exit_status, 0);
  EXPECT_EQ(out.csv.rfind("time,y,pi,S,V,alpha\n", 0), 0u);
  EXPECT_EQ(out.csv.find('\r'), std::string::npos);
  int lines = 0;
  for (char c : out.csv) lines += c == '\n';
  EXPECT_EQ(lines, 22);
}

TEST(Cli, SolveWithUserPathEmitsFractions) {
  const char* text = R"(command = solve
[model]
family = integrated_levy
factor = path
path.times = 0, 0.5
path.values = 1, 2
B.drift = 0.08
B.diffusion = 0.04
)";
  const auto out = run_text(text);
  ASSERT_EQ(out.exit_status, 0) << cli::render(out.report);
  const auto& fp = out.report["result"]["fraction_path"];
  ASSERT_EQ(fp["pi"].size(), 2u);
  EXPECT_NEAR(fp["pi"][1].get<double>(), 0.5 * fp["pi"][0].get<double>(), 1e-10);
}
