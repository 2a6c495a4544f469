#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gffsle/io.hpp"
#include "gffsle/pipeline.hpp"

using namespace gffsle;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gffsle_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.domain.side = 12;
  c.runs = 4;
  return c;
}

}  // namespace

TEST(Config, SnapshotRoundTrip) {
  ExperimentConfig c;
  c.name = "roundtrip";
  c.seed = 99;
  c.domain.shape = "hexagon";
  c.domain.side = 14;
  c.lambda = 1.25;
  c.bump = BumpSpec::parse("1,2,0.5,-0.3");
  c.projection_sides = {8, 16};
  const auto back = parse_config(c.snapshot());
  EXPECT_EQ(back.snapshot(), c.snapshot());
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_EQ(back.seed, 99u);
  ASSERT_TRUE(back.bump.has_value());
  EXPECT_DOUBLE_EQ(back.bump->height, -0.3);
}

TEST(Config, ParsesSectionsAndRejectsUnknownKeys) {
  const auto c = parse_config("[experiment]\nname = demo\nruns = 7\n[domain]\nside = 20\n[field]\nlambda = 0.5\n");
  EXPECT_EQ(c.name, "demo");
  EXPECT_EQ(c.runs, 7u);
  EXPECT_EQ(c.domain.side, 20);
  EXPECT_DOUBLE_EQ(c.lambda, 0.5);
  EXPECT_THROW(parse_config("[experiment]\nnmae = typo\n"), DomainError);
  EXPECT_THROW(parse_config("[nowhere]\nx = 1\n"), DomainError);
}

TEST(Config, ValidationAndHash) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  const auto h = c.hash();
  EXPECT_EQ(h.size(), 16u);
  c.lambda = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = ExperimentConfig{};
  c.runs = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = ExperimentConfig{};
  c.extract_delta = -1.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = ExperimentConfig{};
  c.seed = 2;
  EXPECT_NE(c.hash(), h);
}

TEST(Config, EnvironmentOverridesOutAndThreadsOnly) {
  ::setenv("GFFSLE_OUT", "/tmp/elsewhere", 1);
  ::setenv("GFFSLE_THREADS", "3", 1);
  ExperimentConfig c;
  apply_environment(c);
  ::unsetenv("GFFSLE_OUT");
  ::unsetenv("GFFSLE_THREADS");
  EXPECT_EQ(c.out_dir, "/tmp/elsewhere");
  EXPECT_EQ(c.threads, 3u);
  EXPECT_EQ(c.seed, ExperimentConfig{}.seed);
}

TEST(Config, BumpParsing) {
  const auto b = BumpSpec::parse("0.5,1.5,2,-1");
  EXPECT_EQ(b.center, Point(0.5, 1.5));
  EXPECT_DOUBLE_EQ(b.radius, 2.0);
  EXPECT_DOUBLE_EQ(b.height, -1.0);
  EXPECT_THROW(BumpSpec::parse("1,2,3"), DomainError);
  EXPECT_THROW(BumpSpec::parse("a,b,c,d"), DomainError);
  EXPECT_THROW(BumpSpec::parse("0,0,-1,1"), DomainError);
}

TEST(Io, DrivingCsvRoundTripIsExact) {
  const auto dir = scratch_dir("io");
  const auto w = sample_sle4_driving(0.1, 1e-3, 4);
  io::write_driving_csv(dir / "w.csv", w);
  const auto back = io::read_driving_csv(dir / "w.csv");
  EXPECT_EQ(back.times, w.times);
  EXPECT_EQ(back.values, w.values);
  const auto text = slurp(dir / "w.csv");
  EXPECT_EQ(text.rfind("# gffsle " + io::version() + "\nt,w\n", 0), 0u);
  fs::remove_all(dir);
}

TEST(Io, FieldAndPathColumns) {
  const auto dir = scratch_dir("cols");
  const auto d = build_rhombus_domain(3);
  const auto h = harmonic_extension(d, arc_boundary_data(d, 1.0));
  io::write_field_csv(dir / "f.csv", d, h.values);
  io::write_path_csv(dir / "p.csv", std::vector<Point>{{0, 0}, {1, 2}});
  std::istringstream f(slurp(dir / "f.csv")), p(slurp(dir / "p.csv"));
  std::string line;
  std::getline(f, line);
  std::getline(f, line);
  EXPECT_EQ(line, "id,x,y,value");
  std::getline(p, line);
  std::getline(p, line);
  EXPECT_EQ(line, "k,x,y");
  std::getline(p, line);
  EXPECT_EQ(line, "0,0,0");
  EXPECT_THROW(io::write_field_csv(dir / "g.csv", d, Eigen::VectorXd::Zero(3)), DomainError);
  fs::remove_all(dir);
}

TEST(Pipeline, SingleRunHasNoAggregateTest) {
  auto c = small_config();
  c.runs = 1;
  const auto res = run_interface_pipeline(c);
  ASSERT_EQ(res.runs.size(), 1u);
  EXPECT_TRUE(res.runs[0].ok()) << res.runs[0].error;
  ASSERT_EQ(res.report.checks.size(), 1u);
  EXPECT_EQ(res.report.checks[0].name, "failed seed fraction");
  const auto dir = scratch_dir("single");
  write_pipeline_outputs(dir, c, res);
  EXPECT_TRUE(fs::exists(dir / "runs" / "000000.driving.csv"));
  EXPECT_TRUE(fs::exists(dir / "runs" / "000000.path.csv"));
  EXPECT_TRUE(fs::exists(dir / "config.snapshot"));
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["config_hash"], c.hash());
  EXPECT_EQ(report["version"], io::version());
  fs::remove_all(dir);
}

TEST(Pipeline, MappedPathStartsAtZero) {
  const InterfacePipeline pipe(small_config());
  const auto run = pipe.run(0);
  ASSERT_TRUE(run.ok()) << run.error;
  EXPECT_EQ(run.mapped.front(), Point(0.0, 0.0));
  for (std::size_t k = 1; k < run.mapped.size(); ++k) EXPECT_GT(run.mapped[k].imag(), 0.0);
  EXPECT_GE(run.driving.horizon(), pipe.config().t_max);
}

TEST(Pipeline, BitReproducibleAcrossThreadCounts) {
  auto c = small_config();
  const auto a_dir = scratch_dir("repro_a"), b_dir = scratch_dir("repro_b");
  write_pipeline_outputs(a_dir, c, run_interface_pipeline(c));
  c.threads = 2;
  const auto b = run_interface_pipeline(c);
  c.threads = 1;  // same snapshot
  write_pipeline_outputs(b_dir, c, b);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a_dir / "runs")) {
    EXPECT_EQ(slurp(entry.path()), slurp(b_dir / "runs" / entry.path().filename()));
    ++files;
  }
  EXPECT_EQ(files, 2 * c.runs);
  EXPECT_EQ(slurp(a_dir / "report.json"), slurp(b_dir / "report.json"));
  fs::remove_all(a_dir);
  fs::remove_all(b_dir);
}

TEST(Pipeline, BumpChangesTheInterface) {
  auto c = small_config();
  const InterfacePipeline plain(c);
  c.bump = BumpSpec{plain.domain().centroid(), 4.0, 3.0};
  const InterfacePipeline bumped(c);
  bool differs = false;
  for (std::uint64_t i = 0; i < 4; ++i) {
    differs |= plain.trace(plain.sample(i)).crossed != bumped.trace(bumped.sample(i)).crossed;
  }
  EXPECT_TRUE(differs);
}

TEST(Verifiers, NamesAndDispatch) {
  const auto& names = verifier_names();
  for (const char* n : {"martingale", "qv", "energy-clock", "coupling", "projection", "locality", "height-gap"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  }
  EXPECT_THROW(run_verifier(ExperimentConfig{}, "nonsense"), DomainError);
  ExperimentConfig c;
  c.locality_rule = "no-such-rule";
  EXPECT_THROW(run_verifier(c, "locality"), DomainError);
}

TEST(Verifiers, LocalityNegativeRuleFails) {
  ExperimentConfig c;
  c.locality_rule = "negative";
  EXPECT_FALSE(run_verifier(c, "locality").passed());
  c.locality_rule = "deterministic";
  EXPECT_TRUE(run_verifier(c, "locality").passed());
}

TEST(Verifiers, StampedReport) {
  Report r;
  r.name = "x";
  r.add("ok", 1.0, 0.0, 2.0, true);
  const auto j = stamped(r, ExperimentConfig{});
  EXPECT_EQ(j["config_hash"], ExperimentConfig{}.hash());
  EXPECT_TRUE(j.contains("version"));
  EXPECT_TRUE(j.contains("config"));
  EXPECT_TRUE(j["passed"].get<bool>());
}
