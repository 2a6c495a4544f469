#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gffsle/io.hpp"
#include "gffsle/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gffsle;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::string> bump;
  bool expected_fail = false;
  std::string which;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  apply_environment(c);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out_dir = *o.out;
  if (o.threads) c.threads = *o.threads;
  if (o.bump) c.bump = BumpSpec::parse(*o.bump);
  c.validate();
  return c;
}

// exit status of a checked run; --expected-fail inverts it
int verdict(bool passed, bool expected_fail) {
  const bool ok = expected_fail ? !passed : passed;
  return ok ? 0 : 1;
}

void print(const Report& r) {
  for (const auto& c : r.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  stat=" << c.statistic << " se=" << c.std_error
              << " threshold=" << c.threshold << "\n";
  }
  std::cout << r.name << ": " << (r.passed() ? "passed" : "failed") << "\n";
}

int single_seed(const std::string& stage, const Options& o) {
  const ExperimentConfig c = resolve(o);
  const fs::path dir = fs::path(c.out_dir) / c.name;
  const InterfacePipeline pipe(c);
  const FieldSample field = pipe.sample(0);
  io::write_field_csv(dir / "field.csv", pipe.domain(), field.values);
  if (stage != "sample") {
    const InterfacePath path = pipe.trace(field);
    io::write_path_csv(dir / "path.csv", path.dual_points);
    if (stage != "trace") {
      const auto mapped = pipe.to_half_plane(path);
      io::write_json(dir / "map.json", pipe.map().to_json());
      io::write_path_csv(dir / "path_h.csv", mapped);
      if (stage == "extract") io::write_driving_csv(dir / "driving.csv", pipe.extract(mapped));
    }
  }
  io::write_text(dir / "config.snapshot", c.snapshot());
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

int verify(const Options& o) {
  const ExperimentConfig c = resolve(o);
  const Report r = run_verifier(c, o.which);
  const fs::path dir = fs::path(c.out_dir) / (c.name + "-" + o.which);
  io::write_json(dir / "report.json", stamped(r, c));
  io::write_text(dir / "config.snapshot", c.snapshot());
  print(r);
  return verdict(r.passed(), o.expected_fail);
}

int pipeline(const Options& o) {
  const ExperimentConfig c = resolve(o);
  const PipelineResult res = run_interface_pipeline(c);
  const fs::path dir = fs::path(c.out_dir) / c.name;
  write_pipeline_outputs(dir, c, res);
  print(res.report);
  std::cout << "wrote " << dir.string() << "\n";
  return verdict(res.report.passed(), o.expected_fail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete GFF level lines and SLE4 driving functions"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "INI experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Base seed");
  app.add_option("--out", o.out, "Output root directory");
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--add-bump", o.bump, "Radial bump cx,cy,r,height added before tracing");
  app.add_flag("--expected-fail", o.expected_fail, "Exit 0 only if the checks fail (negative controls)");
  app.add_flag_callback("--version", [] {
    std::cout << io::version() << "\n";
    std::exit(0);
  });

  std::string stage;
  for (const char* name : {"sample", "trace", "map", "extract"}) {
    app.add_subcommand(name, std::string("Run one seed up to the ") + name + " stage")->fallthrough()->callback([&stage, name] {
      stage = name;
    });
  }
  auto* ver = app.add_subcommand("verify", "Run a verifier and write its report")->fallthrough();
  ver->add_option("which", o.which, "Verifier")->required()->check(CLI::IsMember(verifier_names()));
  app.add_subcommand("pipeline", "Run the interface pipeline over an ensemble of seeds")->fallthrough();

  CLI11_PARSE(app, argc, argv);
  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "verify") return verify(o);
    if (cmd == "pipeline") return pipeline(o);
    return single_seed(stage, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
