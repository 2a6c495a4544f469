#include "gffsle/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gffsle/continuum.hpp"
#include "gffsle/io.hpp"
#include "gffsle/localset.hpp"
#include "gffsle/parallel.hpp"
#include "gffsle/stats.hpp"

namespace gffsle {

namespace pt = boost::property_tree;

TgDomain build_domain(const DomainSpec& spec) {
  if (spec.shape == "rhombus") return build_rhombus_domain(spec.side, spec.split, spec.scale);
  if (spec.shape == "hexagon") return build_hexagon_domain(spec.side, spec.split, spec.scale);
  throw DomainError("unknown domain shape '" + spec.shape + "' (rhombus or hexagon)");
}

namespace {

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      throw DomainError("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) throw DomainError("not a number: '" + item + "'");
    out.push_back(x);
  }
  return out;
}

std::vector<int> split_ints(const std::string& text) {
  std::vector<int> out;
  for (double x : split_numbers(text)) {
    if (x != std::floor(x)) throw DomainError("expected an integer list: '" + text + "'");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? "," : "") << xs[i];
  return out.str();
}

std::string exact(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

BumpSpec BumpSpec::parse(const std::string& text) {
  const auto v = split_numbers(text);
  if (v.size() != 4) throw DomainError("bump must be cx,cy,r,height");
  BumpSpec b{{v[0], v[1]}, v[2], v[3]};
  if (!(b.radius > 0.0)) throw DomainError("bump radius must be positive");
  return b;
}

void ExperimentConfig::validate() const {
  if (!(lambda > 0.0)) throw DomainError("config: lambda must be positive");
  if (runs < 1) throw DomainError("config: runs must be at least 1");
  if (threads < 1) throw DomainError("config: threads must be at least 1");
  if (domain.side < 2) throw DomainError("config: domain side must be at least 2");
  if (!(domain.split > 0.0 && domain.split < 1.0)) throw DomainError("config: split must lie in (0, 1)");
  if (!(domain.scale > 0.0)) throw DomainError("config: scale must be positive");
  if (zipper_subdiv < 1) throw DomainError("config: zipper subdiv must be positive");
  if (!(extract_delta > 0.0) || !(verify_delta > 0.0) || !(verify_horizon > 0.0)) {
    throw DomainError("config: tolerances and steps must be positive");
  }
  if (!(t_min > 0.0) || !(t_step > 0.0) || !(t_max > t_min)) throw DomainError("config: need 0 < t_min < t_max, t_step > 0");
  if (verify_runs < 1 || coupling_runs < 2 || locality_samples < 2 || height_gap_runs < 1) {
    throw DomainError("config: verifier sample counts are too small");
  }
  if (projection_sides.size() < 2) throw DomainError("config: projection needs at least two sides");
}

std::string ExperimentConfig::snapshot() const {
  std::ostringstream o;
  o << "[experiment]\nname = " << name << "\nseed = " << seed << "\nruns = " << runs << "\nthreads = " << threads
    << "\nout = " << out_dir << "\n\n";
  o << "[domain]\nshape = " << domain.shape << "\nside = " << domain.side << "\nsplit = " << exact(domain.split)
    << "\nscale = " << exact(domain.scale) << "\n\n";
  o << "[field]\nlambda = " << exact(lambda) << "\n";
  if (bump) {
    o << "bump = " << exact(bump->center.real()) << "," << exact(bump->center.imag()) << "," << exact(bump->radius)
      << "," << exact(bump->height) << "\n";
  }
  o << "\n[zipper]\nsubdiv = " << zipper_subdiv << "\ndelta = " << exact(extract_delta) << "\nt_min = " << exact(t_min)
    << "\nt_max = " << exact(t_max) << "\nt_step = " << exact(t_step) << "\n\n";
  o << "[verify]\nruns = " << verify_runs << "\ndelta = " << exact(verify_delta) << "\nhorizon = " << exact(verify_horizon)
    << "\ncoupling_runs = " << coupling_runs << "\nlocality_rule = " << locality_rule
    << "\nlocality_side = " << locality_side << "\nlocality_samples = " << locality_samples
    << "\nprojection_sides = " << join(projection_sides) << "\nheight_gap_side = " << height_gap_side
    << "\nheight_gap_runs = " << height_gap_runs << "\nheight_gap_distances = " << join(height_gap_distances) << "\n";
  return o.str();
}

std::string ExperimentConfig::hash() const { return io::hex64(io::fnv1a64(snapshot())); }

ExperimentConfig parse_config(const std::string& ini_text) {
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  static const std::vector<std::string> known = {
      "experiment.name", "experiment.seed", "experiment.runs", "experiment.threads", "experiment.out",
      "domain.shape", "domain.side", "domain.split", "domain.scale", "field.lambda", "field.bump",
      "zipper.subdiv", "zipper.delta", "zipper.t_min", "zipper.t_max", "zipper.t_step",
      "verify.runs", "verify.delta", "verify.horizon", "verify.coupling_runs", "verify.locality_rule",
      "verify.locality_side", "verify.locality_samples", "verify.projection_sides", "verify.height_gap_side",
      "verify.height_gap_runs", "verify.height_gap_distances"};
  for (const auto& [section, keys] : tree) {
    if (keys.empty()) throw DomainError("config: key '" + section + "' outside a section");
    for (const auto& kv : keys) {
      const std::string full = section + "." + kv.first;
      if (std::find(known.begin(), known.end(), full) == known.end()) throw DomainError("config: unknown key '" + full + "'");
    }
  }
  ExperimentConfig c;
  try {
    c.name = tree.get("experiment.name", c.name);
    c.seed = tree.get("experiment.seed", c.seed);
    c.runs = tree.get("experiment.runs", c.runs);
    c.threads = tree.get("experiment.threads", c.threads);
    c.out_dir = tree.get("experiment.out", c.out_dir);
    c.domain.shape = tree.get("domain.shape", c.domain.shape);
    c.domain.side = tree.get("domain.side", c.domain.side);
    c.domain.split = tree.get("domain.split", c.domain.split);
    c.domain.scale = tree.get("domain.scale", c.domain.scale);
    c.lambda = tree.get("field.lambda", c.lambda);
    if (auto b = tree.get_optional<std::string>("field.bump")) c.bump = BumpSpec::parse(*b);
    c.zipper_subdiv = tree.get("zipper.subdiv", c.zipper_subdiv);
    c.extract_delta = tree.get("zipper.delta", c.extract_delta);
    c.t_min = tree.get("zipper.t_min", c.t_min);
    c.t_max = tree.get("zipper.t_max", c.t_max);
    c.t_step = tree.get("zipper.t_step", c.t_step);
    c.verify_runs = tree.get("verify.runs", c.verify_runs);
    c.verify_delta = tree.get("verify.delta", c.verify_delta);
    c.verify_horizon = tree.get("verify.horizon", c.verify_horizon);
    c.coupling_runs = tree.get("verify.coupling_runs", c.coupling_runs);
    c.locality_rule = tree.get("verify.locality_rule", c.locality_rule);
    c.locality_side = tree.get("verify.locality_side", c.locality_side);
    c.locality_samples = tree.get("verify.locality_samples", c.locality_samples);
    if (auto s = tree.get_optional<std::string>("verify.projection_sides")) c.projection_sides = split_ints(*s);
    c.height_gap_side = tree.get("verify.height_gap_side", c.height_gap_side);
    c.height_gap_runs = tree.get("verify.height_gap_runs", c.height_gap_runs);
    if (auto s = tree.get_optional<std::string>("verify.height_gap_distances")) c.height_gap_distances = split_ints(*s);
  } catch (const pt::ptree_bad_data& e) {
    throw DomainError(std::string("config: bad value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read config " + file.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_environment(ExperimentConfig& config) {
  if (const char* out = std::getenv("GFFSLE_OUT"); out && *out) config.out_dir = out;
  if (const char* t = std::getenv("GFFSLE_THREADS"); t && *t) {
    char* end = nullptr;
    const long n = std::strtol(t, &end, 10);
    if (*end != '\0' || n < 1) throw DomainError("GFFSLE_THREADS must be a positive integer");
    config.threads = static_cast<unsigned>(n);
  }
}

InterfacePipeline::InterfacePipeline(const ExperimentConfig& config)
    : config_(config), domain_(std::make_shared<const TgDomain>(build_domain(config.domain))) {
  config_.validate();
  map_ = map_domain_to_H(*domain_, config_.zipper_subdiv);
  sampler_ = std::make_shared<const DgffSampler>(*domain_);
  boundary_ = arc_boundary_data(*domain_, config_.lambda);
  if (config_.bump) psi_ = vertex_bump(*domain_, config_.bump->center, config_.bump->radius, config_.bump->height);
}

FieldSample InterfacePipeline::sample(std::uint64_t index) const {
  FieldSample f = sampler_->sample(boundary_, config_.seed, index);
  if (psi_.size() > 0) f = add_bump(f, *domain_, psi_);
  return f;
}

InterfacePath InterfacePipeline::trace(const FieldSample& field) const { return trace_interface(*domain_, field); }

std::vector<Point> InterfacePipeline::to_half_plane(const InterfacePath& path) const {
  std::vector<Point> out;
  const auto& d = path.dual_points;
  if (d.empty()) return out;
  out.reserve(d.size());
  out.emplace_back(0.0, 0.0);  // x is a zipper node with image 0
  const std::size_t last = path.complete ? d.size() - 1 : d.size();
  for (std::size_t k = 1; k < last; ++k) out.push_back(map_.map(d[k]));
  return out;
}

DrivingFunction InterfacePipeline::extract(const std::vector<Point>& mapped) const {
  DrivingFunction w = extract_driving({mapped, {}}, config_.extract_delta, config_.t_max);
  if (w.horizon() < config_.t_max) throw DomainError("interface ends before capacity t_max");
  return w;
}

InterfaceRun InterfacePipeline::run(std::uint64_t index) const {
  InterfaceRun r;
  r.index = index;
  try {
    r.field = sample(index);
    r.path = trace(r.field);
    r.mapped = to_half_plane(r.path);
    r.driving = extract(r.mapped);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

PipelineResult run_interface_pipeline(const ExperimentConfig& config) {
  const InterfacePipeline pipe(config);
  PipelineResult out;
  out.runs.resize(config.runs);
  parallel_for(config.runs, config.threads, [&](std::size_t i) {
    out.runs[i] = pipe.run(i);
    out.runs[i].field.values.resize(0);  // not kept for ensembles
  });

  Report& rep = out.report;
  rep.name = "interface-pipeline";
  std::vector<const InterfaceRun*> good;
  auto& failures = rep.details["failures"] = nlohmann::json::array();
  for (const auto& r : out.runs) {
    if (r.ok()) {
      good.push_back(&r);
    } else {
      failures.push_back({{"index", r.index}, {"error", r.error}});
    }
  }
  const double failed = static_cast<double>(config.runs - good.size()) / static_cast<double>(config.runs);
  rep.add("failed seed fraction", failed, 0.0, 0.01, failed <= 0.01);
  rep.details["runs"] = config.runs;
  rep.details["lambda"] = config.lambda;
  if (good.size() < 2) return out;

  std::vector<double> grid;
  for (double t = config.t_min; t <= config.t_max + 1e-9; t += config.t_step) grid.push_back(t);
  const std::size_t m = grid.size(), n = good.size();
  Eigen::MatrixXd w(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < m; ++j) w(r, j) = good[r]->driving(std::min(grid[j], good[r]->driving.horizon()));
  }
  std::vector<double> var(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> col(w.col(j).data(), w.col(j).data() + n);
    var[j] = stats::variance(col);
  }
  const auto fit = stats::linear_fit(grid, var);
  rep.add("Var(W_t) slope", fit.slope, fit.slope_se, 4.0, fit.slope >= 3.5 && fit.slope <= 4.5);

  // increments from 0 and between grid times, standardized per step
  std::vector<double> pooled;
  std::vector<std::vector<double>> incs(m, std::vector<double>(n));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t r = 0; r < n; ++r) incs[j][r] = w(r, j) - (j ? w(r, j - 1) : 0.0);
    const double mu = stats::mean(incs[j]), sd = std::sqrt(stats::variance(incs[j]));
    for (double x : incs[j]) pooled.push_back(sd > 0.0 ? (x - mu) / sd : 0.0);
  }
  const auto ks = stats::ks_test_normal(pooled);
  rep.add("increment normality (KS p)", ks.pvalue, 0.0, 0.01, ks.pvalue > 0.01);

  // increments over disjoint steps should be uncorrelated
  auto& indep = rep.details["increment_correlation"] = nlohmann::json::array();
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const double c = stats::correlation(incs[j], incs[j + 1]);
    indep.push_back({{"t", grid[j]}, {"corr", c}, {"z", c * std::sqrt(static_cast<double>(n))}});
  }
  rep.details["grid"] = grid;
  rep.details["variance"] = var;
  rep.details["slope"] = fit.slope;
  rep.details["intercept"] = fit.intercept;
  rep.details["ks_statistic"] = ks.statistic;
  rep.details["completed"] = n;
  return out;
}

void write_pipeline_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                            const PipelineResult& result) {
  for (const auto& r : result.runs) {
    if (!r.ok()) continue;
    char name[32];
    std::snprintf(name, sizeof name, "%06llu", static_cast<unsigned long long>(r.index));
    io::write_driving_csv(dir / "runs" / (std::string(name) + ".driving.csv"), r.driving);
    io::write_path_csv(dir / "runs" / (std::string(name) + ".path.csv"), r.path.dual_points);
  }
  io::write_json(dir / "report.json", stamped(result.report, config));
  io::write_text(dir / "config.snapshot", config.snapshot());
}

Report verify_projection(const std::vector<int>& sides, unsigned threads) {
  if (sides.size() < 2) throw DomainError("verify_projection: need at least two sides");
  Report rep;
  rep.name = "projection";
  // fixed bump in H around i; its pullback sits well inside every domain
  const SmoothFunction f = radial_bump({0.0, 1.0}, 0.9, 1.0);
  std::vector<double> log_r(sides.size()), log_err(sides.size());
  auto& rows = rep.details["domains"] = nlohmann::json::array();
  std::vector<nlohmann::json> row(sides.size());
  parallel_for(sides.size(), threads, [&](std::size_t k) {
    const TgDomain d = build_rhombus_domain(sides[k], 0.5);
    const ConformalMap m = map_domain_to_H(d);
    const ProjectionResult p = project_fem(f, d, m.as_planar_map());
    const double r = inradius(d, m.inverse({0.0, 1.0}));
    log_r[k] = std::log(r);
    log_err[k] = std::log(p.error);
    row[k] = {{"side", sides[k]}, {"r_D", r}, {"error", p.error}, {"norm", p.norm}};
  });
  for (auto& j : row) rows.push_back(j);
  const auto fit = stats::linear_fit(log_r, log_err);
  rep.add("log-log slope", fit.slope, fit.slope_se, -1.0, fit.slope >= -1.35 && fit.slope <= -0.65);
  return rep;
}

Report verify_height_gap(int side, std::size_t runs, const std::vector<int>& distances, std::uint64_t seed,
                         double lambda, unsigned threads) {
  if (distances.empty()) throw DomainError("verify_height_gap: no distances");
  const TgDomain d = build_rhombus_domain(side, 0.5);
  const DgffSampler sampler(d);
  const auto boundary = arc_boundary_data(d, lambda);
  const auto to_boundary = graph_distance(d, d.boundary_cycle());
  const std::size_t nd = distances.size();
  std::vector<std::vector<std::vector<double>>> gaps(runs, std::vector<std::vector<double>>(nd));
  parallel_for(runs, threads, [&](std::size_t r) {
    const FieldSample f = sampler.sample(boundary, seed, r);
    const InterfacePath path = trace_interface(d, f);
    std::vector<int> sources = path.left_vertices;
    sources.insert(sources.end(), path.right_vertices.begin(), path.right_vertices.end());
    const auto dist = graph_distance(d, sources);
    const HeightGap gap(d, f, path, lambda);
    for (int v : d.interior_vertices()) {
      if (to_boundary[static_cast<std::size_t>(v)] <= 2) continue;
      const auto it = std::find(distances.begin(), distances.end(), dist[static_cast<std::size_t>(v)]);
      if (it == distances.end()) continue;
      gaps[r][static_cast<std::size_t>(it - distances.begin())].push_back(std::abs(gap(v)));
    }
  });
  Report rep;
  rep.name = "height-gap";
  std::vector<double> med(nd);
  auto& rows = rep.details["distances"] = nlohmann::json::array();
  for (std::size_t k = 0; k < nd; ++k) {
    std::vector<double> all;
    for (std::size_t r = 0; r < runs; ++r) all.insert(all.end(), gaps[r][k].begin(), gaps[r][k].end());
    if (all.empty()) throw DomainError("verify_height_gap: no probe at distance " + std::to_string(distances[k]));
    med[k] = stats::median(all);
    rows.push_back({{"distance", distances[k]}, {"median_abs_gap", med[k]}, {"probes", all.size()}});
  }
  for (std::size_t k = 1; k < nd; ++k) {
    const double step = med[k] - med[k - 1];
    rep.add("median(d=" + std::to_string(distances[k]) + ") - median(d=" + std::to_string(distances[k - 1]) + ")", step,
            0.0, 0.0, step <= 0.0);
  }
  rep.details["runs"] = runs;
  rep.details["side"] = side;
  return rep;
}

const std::vector<std::string>& verifier_names() {
  static const std::vector<std::string> names = {"martingale", "qv",       "energy-clock", "coupling",
                                                 "projection", "locality", "height-gap"};
  return names;
}

namespace {

void absorb(Report& into, const Report& from, const std::string& prefix) {
  for (auto c : from.checks) {
    c.name = prefix + ": " + c.name;
    into.checks.push_back(c);
  }
  into.details[prefix] = from.details;
}

SetRule rule_by_name(const std::string& name, const TgDomain& d, double lambda) {
  if (name == "deterministic") return deterministic_rule({d.interior_vertices().front()});
  if (name == "negative") return negative_set_rule();
  if (name == "minus-cluster") return boundary_cluster_rule(Arc::Minus);
  if (name == "plus-cluster") return boundary_cluster_rule(Arc::Plus);
  if (name == "random-level") return random_level_cluster_rule(0.5 * lambda);
  if (name == "exploration") return exploration_rule(4);
  throw DomainError("unknown locality rule '" + name +
                    "' (deterministic, negative, minus-cluster, plus-cluster, random-level, exploration)");
}

}  // namespace

Report run_verifier(const ExperimentConfig& config, const std::string& which) {
  config.validate();
  EnsembleOptions ens;
  ens.runs = config.verify_runs;
  ens.delta = config.verify_delta;
  ens.seed = config.seed;
  ens.lambda = config.lambda;
  ens.threads = config.threads;
  const double h = config.verify_horizon;
  if (which == "martingale") return verify_height_martingale({0.0, 1.0}, {0.0, 0.5 * h, h}, ens);
  if (which == "qv") {
    Report rep;
    rep.name = "qv";
    absorb(rep, verify_qv_relation({0.0, 1.0}, {0.0, 1.0}, h, ens), "(i,i)");
    absorb(rep, verify_qv_relation({0.0, 1.0}, {1.0, 1.0}, h, ens), "(i,1+i)");
    return rep;
  }
  if (which == "energy-clock") return verify_energy_clock(two_point_test_function(), h, ens);
  if (which == "coupling") {
    CouplingOptions opts;
    opts.lambda = config.lambda;
    const CouplingBuilder builder(opts);
    return verify_coupling(builder, default_coupling_test_functions(builder.domain()), config.coupling_runs,
                           config.seed, config.threads);
  }
  if (which == "projection") return verify_projection(config.projection_sides, config.threads);
  if (which == "locality") {
    const TgDomain d = build_rhombus_domain(config.locality_side, 0.5);
    LocalityOptions opts;
    opts.lambda = config.lambda;
    opts.threads = config.threads;
    return test_locality(rule_by_name(config.locality_rule, d, config.lambda), d, config.locality_samples, config.seed,
                         opts);
  }
  if (which == "height-gap") {
    return verify_height_gap(config.height_gap_side, config.height_gap_runs, config.height_gap_distances, config.seed,
                             config.lambda, config.threads);
  }
  throw DomainError("unknown verifier '" + which + "'");
}

nlohmann::json stamped(const Report& report, const ExperimentConfig& config) {
  nlohmann::json j = report.to_json();
  j["version"] = io::version();
  j["config_hash"] = config.hash();
  j["config"] = config.snapshot();
  return j;
}

}  // namespace gffsle
