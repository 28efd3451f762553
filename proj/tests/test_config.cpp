#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "wep/commands.hpp"
#include "wep/config.hpp"

TEST(Config, ReadsSectionsAndOverrides) {
  std::istringstream in(
      "# comment\n"
      "[run]\nmodel = dependent\nseed = 7\n\n"
      "[grid]\ntime_points = 9\n");
  wep::RunConfig cfg;
  wep::read_config(in, cfg);
  EXPECT_EQ(cfg.text("run.model"), "dependent");
  EXPECT_EQ(cfg.unsigned_integer("run.seed"), 7u);
  EXPECT_EQ(cfg.unsigned_integer("grid.time_points"), 9u);
  EXPECT_EQ(cfg.text("run.weight"), "const:1");
}

TEST(Config, ErrorsCarryLineNumbers) {
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    wep::RunConfig cfg;
    try {
      wep::read_config(in, cfg);
    } catch (const wep::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_EQ(error_of("[run]\nseed = 1\nbogus = 2\n"), "config line 3: unknown config key 'run.bogus'");
  EXPECT_EQ(error_of("[run\n"), "config line 1: unterminated section header");
  EXPECT_EQ(error_of("seed = 1\n"), "config line 1: key 'seed' outside a section");
  EXPECT_EQ(error_of("[run]\nseed\n"), "config line 2: expected key = value");
}

TEST(Config, TypedAccessors) {
  wep::RunConfig cfg;
  cfg.set("run.n", "1e5");
  EXPECT_EQ(cfg.unsigned_integer("run.n"), 100000u);
  cfg.set("run.n", "-3");
  EXPECT_THROW(cfg.unsigned_integer("run.n"), wep::ConfigError);
  cfg.set("probes.ab", "0.01:0.2, 0.05:0.1");
  ASSERT_EQ(cfg.pairs("probes.ab").size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.pairs("probes.ab")[1].second, 0.1);
  cfg.set("probes.xs", "0.1,x");
  EXPECT_THROW(cfg.list("probes.xs"), wep::ConfigError);
  EXPECT_THROW(cfg.set("run.nope", "1"), wep::ConfigError);
  EXPECT_EQ(wep::flag_name(wep::RunConfig::lookup("grid.time_points")), "--time-points");
}

TEST(Manifest, RoundTripsResolvedConfig) {
  wep::RunConfig cfg;
  cfg.command = "verify";
  cfg.target = "feller";
  cfg.set("run.no_timing", "true");
  const wep::CommandResult first = wep::run_command(cfg);
  const std::string manifest = wep::write_manifest(cfg);
  EXPECT_NE(manifest.find("version = 1.0.0"), std::string::npos);
  EXPECT_NE(manifest.find("ys = 1.5,2,2.5,3,3.5,4,4.5,5"), std::string::npos);

  std::istringstream in(manifest);
  wep::RunConfig again;
  wep::read_config(in, again);
  EXPECT_EQ(again.command, "verify");
  EXPECT_EQ(again.target, "feller");
  EXPECT_EQ(again.values, cfg.values);
  EXPECT_EQ(wep::run_command(again).output, first.output);
}

TEST(Commands, ExitCodes) {
  wep::RunConfig pass;
  pass.command = "verify";
  pass.target = "feller";
  EXPECT_EQ(wep::run_command(pass).exit_code, 0);

  wep::RunConfig fail;
  fail.command = "verify";
  fail.target = "integral";
  fail.set("run.weight", "pow:0.5");
  fail.set("run.unchecked", "true");
  EXPECT_EQ(wep::run_command(fail).exit_code, 1);

  wep::RunConfig unknown;
  unknown.command = "verify";
  unknown.target = "nonsense";
  EXPECT_THROW(wep::run_command(unknown), wep::ConfigError);

  wep::RunConfig sim;
  sim.command = "simulate";
  try {
    wep::run_command(sim);
    ADD_FAILURE() << "simulate without a model ran";
  } catch (const wep::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("--model"), std::string::npos);
  }
}

TEST(Commands, WlOnDependentModelIsZero) {
  wep::RunConfig cfg;
  cfg.command = "verify";
  cfg.target = "wl";
  cfg.set("run.model", "dependent");
  cfg.set("run.n", "2000");
  const auto res = wep::run_command(cfg);
  EXPECT_EQ(res.exit_code, 0);
  EXPECT_NE(res.output.find("\"l_hat\": 0.0"), std::string::npos);
}

TEST(Commands, SimulateSinglePathClosedForm) {
  wep::RunConfig cfg;
  cfg.command = "simulate";
  cfg.set("run.model", "dependent");
  cfg.set("run.n", "1");
  cfg.set("run.seed", "7");
  cfg.set("grid.time_points", "3");
  cfg.set("probes.levels", "0.25,0.75");
  const auto res = wep::run_command(cfg);
  EXPECT_EQ(res.exit_code, 0);
  std::istringstream in(res.output);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    const auto parts = wep::split(line, ',');
    ASSERT_EQ(parts.size(), 3u);
    const double y = std::stod(parts[1]);
    const double nu = std::stod(parts[2]);
    EXPECT_TRUE(std::abs(nu - (1.0 - y)) < 1e-12 || std::abs(nu + y) < 1e-12) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 6);
}
