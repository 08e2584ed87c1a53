#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oscillat/cli.hpp"

using namespace oscillat;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepConfig const_config() {
  SweepConfig cfg;
  cfg.fixture = "const";
  cfg.params = {{"d", 1}, {"g", 2}, {"N", 16}};
  cfg.eps = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  cfg.t = {0.5, 1.0};
  cfg.samples = 3;
  return cfg;
}

SweepConfig small_sine_config() {
  SweepConfig cfg;
  cfg.fixture = "sine1d";
  cfg.params = {{"N", 128}};
  cfg.eps = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  cfg.t = {1.0};
  cfg.samples = 3;
  return cfg;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "oscillat");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(FitRate, LinearData) {
  const auto fit = fit_rate({{0.5, 0.5}, {0.25, 0.25}, {0.125, 0.125}, {0.0625, 0.0625}});
  EXPECT_NEAR(fit.slope, 1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-12);
  EXPECT_NEAR(fit.max_residual, 0.0, 1e-12);
}

TEST(FitRate, SquareRootData) {
  std::vector<std::pair<double, double>> pts;
  for (int k = 3; k <= 7; ++k) pts.emplace_back(std::ldexp(1.0, -k), 2.0 * std::sqrt(std::ldexp(1.0, -k)));
  const auto fit = fit_rate(pts);
  EXPECT_NEAR(fit.slope, 0.5, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(2.0), 1e-12);
}

TEST(FitRate, NoisyPowerLaw) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<double, double>> pts;
    for (int k = 3; k <= 7; ++k) {
      const double e = std::ldexp(1.0, -k);
      pts.emplace_back(e, 3.0 * std::pow(e, 0.93) * (1.0 + 0.05 * noise(rng)));
    }
    const double s = fit_rate(pts).slope;
    EXPECT_GE(s, 0.85);
    EXPECT_LE(s, 1.01);
  }
}

TEST(FitRate, Preconditions) {
  auto kind = [](const std::vector<std::pair<double, double>>& pts) {
    try {
      fit_rate(pts);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;  // sentinel: nothing thrown
  };
  EXPECT_EQ(kind({{0.5, 1.0}}), ErrorKind::InsufficientPoints);
  EXPECT_EQ(kind({{0.5, 1.0}, {0.25, 0.0}}), ErrorKind::ZeroError);
  EXPECT_EQ(kind({{0.5, 1.0}, {0.5, 2.0}}), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind({{0.5, 1.0}, {-0.25, 2.0}}), ErrorKind::InvalidConfig);
}

TEST(Finalize, Verdicts) {
  EstimateSeries s;
  s.threshold = 0.9;
  s.points = {{0.5, 0.5}, {0.25, 0.25}, {0.125, 0.125}, {0.0625, 0.0625}};
  finalize(s, true);
  EXPECT_EQ(s.verdict, "pass");
  EXPECT_FALSE(s.indicative);

  EstimateSeries slow = s;
  for (auto& p : slow.points) p.second = std::sqrt(p.first);
  finalize(slow, false);
  EXPECT_EQ(slow.verdict, "fail");
  EXPECT_TRUE(slow.indicative);

  EstimateSeries few = s;
  few.points.resize(3);
  finalize(few, true);
  EXPECT_EQ(few.verdict, "insufficient");

  EstimateSeries zero = s;
  for (auto& p : zero.points) p.second = 1e-13;
  finalize(zero, true);
  EXPECT_EQ(zero.verdict, "exact");

  EstimateSeries rep = s;
  rep.has_verdict = false;
  finalize(rep, true);
  EXPECT_EQ(rep.verdict, "reported");
}

TEST(Config, ParsesScalarsListsAndSections) {
  const Config c = Config::parse(
      "# comment\n"
      "[coeff]\n"
      "catalog = sine1d   # trailing\n"
      "[coeff.params]\n"
      "amp = 1/2\n"
      "[lattice]\n"
      "basis = [[1, 0], [0.5, 2]]\n"
      "[sweep]\n"
      "eps = [1/8, 1/16]\n"
      "[corrector]\n"
      "smoothed = false\n");
  EXPECT_EQ(c.get_string("coeff.catalog"), "sine1d");
  EXPECT_DOUBLE_EQ(c.get_double("coeff.params.amp", 0.0), 0.5);
  EXPECT_EQ(c.get_list("sweep.eps"), (std::vector<double>{0.125, 0.0625}));
  const auto B = c.get_matrix("lattice.basis");
  ASSERT_EQ(B.size(), 2u);
  EXPECT_DOUBLE_EQ(B[1][0], 0.5);
  EXPECT_FALSE(c.get_bool("corrector.smoothed", true));
  EXPECT_EQ(c.section("coeff.params").size(), 1u);
  EXPECT_DOUBLE_EQ(c.get_double("missing", 7.0), 7.0);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(Config::parse("[a]\nno equals sign\n"), Error);
  EXPECT_THROW(Config::parse("x = 1/0\n").get_double("x", 0.0), Error);
  EXPECT_THROW(Config::parse("x = 1.5abc\n").get_double("x", 0.0), Error);
  EXPECT_THROW(Config::parse("x = [1, 2\n").get_list("x"), Error);
  EXPECT_THROW(Config::parse("x = maybe\n").get_bool("x", true), Error);
}

TEST(SweepConfig, FromConfigFile) {
  const Config c = Config::load(std::string(OSCILLAT_CONFIG_DIR) + "/sine1d.cfg");
  const SweepConfig s = SweepConfig::from_config(c);
  EXPECT_EQ(s.fixture, "sine1d");
  EXPECT_DOUBLE_EQ(s.params.at("N"), 256.0);
  EXPECT_EQ(s.eps.size(), 5u);
  EXPECT_DOUBLE_EQ(s.eps.back(), 1.0 / 128);
  EXPECT_DOUBLE_EQ(s.h_over_eps, 1.0 / 16);
  EXPECT_FALSE(s.lambda.has_value());
  EXPECT_DOUBLE_EQ(s.zeta, -1.0);
}

TEST(Prepare, Preconditions) {
  SweepConfig few = const_config();
  few.eps = {0.125, 0.0625, 0.03125};
  try {
    prepare(few);
    FAIL() << "expected InsufficientPoints";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientPoints);
  }
  SweepConfig dup = const_config();
  dup.eps = {0.125, 0.125, 0.0625, 0.03125};
  EXPECT_THROW(prepare(dup), Error);
  SweepConfig big = const_config();
  big.eps = {0.5, 0.125, 0.0625, 0.03125};  // above min side / 4
  EXPECT_THROW(prepare(big), Error);
  SweepConfig unknown = const_config();
  unknown.fixture = "nope";
  EXPECT_THROW(prepare(unknown), Error);
}

TEST(Prepare, DefaultsAndSorting) {
  SweepConfig cfg = const_config();
  cfg.eps = {1.0 / 64, 1.0 / 8, 1.0 / 32, 1.0 / 16};
  const Problem pb = prepare(cfg);
  EXPECT_EQ(pb.cfg.eps.front(), 1.0 / 8);
  EXPECT_EQ(pb.cfg.eps.back(), 1.0 / 64);
  EXPECT_LE(pb.mesh.max_h(), pb.cfg.eps.back() / 16 + 1e-15);
  EXPECT_EQ(pb.cs.lambda, 0.0);
  EXPECT_TRUE(pb.strict);
  EXPECT_EQ(default_eps(1).size(), 5u);
  EXPECT_EQ(default_eps(2).front(), 0.25);
}

TEST(Data, PreconditionedByEffectiveOperatorSquared) {
  SweepConfig cfg = small_sine_config();
  const Problem pb = prepare(cfg);
  const HyperbolicData data = hyperbolic_data(pb);
  const Eigen::VectorXcd f = data_function(pb.mesh, 1, "sine");
  // Oracle: B0^{-2} through the eigendecomposition instead of two sparse solves.
  const Eigen::VectorXcd expect = spectral_decompose(pb.B0).apply([](double mu) { return 1.0 / (mu * mu); }, f);
  EXPECT_LE((data.phi - expect).norm(), 1e-8 * expect.norm());
  EXPECT_THROW(data_function(pb.mesh, 1, "bogus"), Error);
  EXPECT_EQ(data_function(pb.mesh, 1, "zero").norm(), 0.0);
  EXPECT_NEAR(l2_norm(pb.mesh, random_sine_series(pb.mesh, 1, 3)), 1.0, 1e-12);
}

TEST(Sweeps, ConstantCoefficientIsExact) {
  const Problem pb = prepare(const_config());
  ASSERT_TRUE(pb.cell.corrector_vanishes());
  for (const RateReport& rep : {convergence_sweep(pb), resolvent_sweep(pb), cosine_corrector_sweep(pb)}) {
    EXPECT_TRUE(rep.passed()) << rep.sweep;
    for (const auto& e : rep.estimates) {
      EXPECT_LE(e.max_error(), 1e-9) << e.tag;
      EXPECT_EQ(e.verdict, "exact") << e.tag;
    }
  }
}

TEST(Sweeps, ZeroDataGivesZeroErrors) {
  SweepConfig cfg = small_sine_config();
  cfg.phi = cfg.psi = cfg.forcing = "zero";
  const RateReport rep = convergence_sweep(prepare(cfg));
  for (const auto& e : rep.estimates) EXPECT_EQ(e.max_error(), 0.0) << e.tag;
}

TEST(Sweeps, SineResolventRates) {
  const RateReport rep = resolvent_sweep(prepare(small_sine_config()));
  ASSERT_NE(rep.find("resolvent-L2"), nullptr);
  EXPECT_EQ(rep.find("resolvent-L2")->verdict, "pass");
  EXPECT_EQ(rep.find("resolvent-H1-corr")->verdict, "pass");
  EXPECT_EQ(rep.find("sqrt-L2")->verdict, "pass");
  EXPECT_TRUE(rep.passed());
}

TEST(Sweeps, CosinePlainEstimateHasNoVerdict) {
  SweepConfig cfg = small_sine_config();
  const RateReport rep = cosine_corrector_sweep(prepare(cfg));
  const auto* plain = rep.find("cos-plain-H1@t=1");
  ASSERT_NE(plain, nullptr);
  EXPECT_FALSE(plain->has_verdict);
  EXPECT_EQ(plain->verdict, "reported");
  cfg.t = {0.0};
  EXPECT_THROW(cosine_corrector_sweep(prepare(cfg)), Error);
}

TEST(Output, CsvAndReportFormat) {
  const Problem pb = prepare(const_config());
  const std::vector<RateReport> reps = {resolvent_sweep(pb)};
  const auto dir = std::filesystem::path(::testing::TempDir()) / "oscillat_study_fmt";
  std::filesystem::create_directories(dir);
  write_rates_csv(reps, (dir / "rates.csv").string());
  write_report_txt(reps, (dir / "report.txt").string());
  std::istringstream csv(slurp(dir / "rates.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "estimate,eps,t,error,norm");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4) << line;
  }
  EXPECT_EQ(rows, 3 * 4);
  std::istringstream rep(slurp(dir / "report.txt"));
  int lines = 0;
  while (std::getline(rep, line)) {
    ++lines;
    std::istringstream fields(line);
    std::string tag, slope, intercept, verdict, extra;
    fields >> tag >> slope >> intercept >> verdict;
    EXPECT_FALSE(verdict.empty()) << line;
    EXPECT_FALSE(fields >> extra) << line;
  }
  EXPECT_EQ(lines, 3);
  std::filesystem::remove_all(dir);
}

TEST(Output, DeterministicCsv) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "oscillat_study_det";
  std::filesystem::create_directories(dir);
  for (const char* name : {"a.csv", "b.csv"}) {
    const Problem pb = prepare(small_sine_config());
    write_rates_csv({resolvent_sweep(pb)}, (dir / name).string());
  }
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_FALSE(slurp(dir / "a.csv").empty());
  std::filesystem::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"selftest"}), 0);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"sweep", "--config", "/nonexistent.cfg"}), 1);
  const auto dir = std::filesystem::path(::testing::TempDir()) / "oscillat_cli";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "bad.cfg";
  std::ofstream(cfg) << "[coeff]\ncatalog = nope\n";
  EXPECT_EQ(run({"cell", "--config", cfg.string(), "--output", dir.string()}), 1);
  std::filesystem::remove_all(dir);
}

TEST(Cli, CellAndSweepWriteOutputs) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "oscillat_cli_run";
  std::filesystem::remove_all(dir);
  const std::string cfg = std::string(OSCILLAT_CONFIG_DIR) + "/const1d.cfg";
  EXPECT_EQ(run({"cell", "--config", cfg, "--output", dir.string()}), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "cell_solution.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "effective.json"));
  EXPECT_NE(slurp(dir / "effective.json").find("\"g0\""), std::string::npos);
  EXPECT_EQ(run({"resolvent-sweep", "--config", cfg, "--output", dir.string()}), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "rates.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report.txt"));
  EXPECT_EQ(run({"evolve", "--config", cfg, "--output", dir.string(), "--eps", "0.125"}), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "solution_t1.csv"));
  std::filesystem::remove_all(dir);
}
