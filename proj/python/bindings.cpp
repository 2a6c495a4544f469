#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <limits>

#include "gffsle/conformal.hpp"
#include "gffsle/continuum.hpp"
#include "gffsle/field.hpp"
#include "gffsle/interface.hpp"
#include "gffsle/io.hpp"
#include "gffsle/lattice.hpp"
#include "gffsle/localset.hpp"
#include "gffsle/loewner.hpp"
#include "gffsle/pipeline.hpp"

namespace py = pybind11;
using namespace gffsle;

namespace {

using release = py::call_guard<py::gil_scoped_release>;

py::object json_to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

HalfPlanePath as_path(const std::vector<Point>& points) {
  HalfPlanePath p;
  p.points = points;
  return p;
}

EnsembleOptions ensemble(std::size_t runs, double delta, unsigned substeps, std::uint64_t seed, double lambda,
                         unsigned threads) {
  EnsembleOptions o;
  o.runs = runs;
  o.delta = delta;
  o.substeps = substeps;
  o.seed = seed;
  o.lambda = lambda;
  o.threads = threads;
  return o;
}

}  // namespace

PYBIND11_MODULE(_gffsle, m) {
  m.doc() = "Discrete GFF level lines and SLE4 driving functions";
  m.attr("__version__") = io::version();
  m.attr("CRITICAL_LAMBDA") = kCriticalLambda;

  // translators run newest first, so derived types are registered last
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto& numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SwallowedError>(m, "SwallowedError", numerical.ptr());

  // lattice
  py::class_<TgDomain>(m, "TgDomain")
      .def_property_readonly("num_vertices", &TgDomain::num_vertices)
      .def_property_readonly("num_interior", &TgDomain::num_interior)
      .def_property_readonly("num_triangles", &TgDomain::num_triangles)
      .def_property_readonly("positions", &TgDomain::positions)
      .def_property_readonly("coords",
                             [](const TgDomain& d) {
                               std::vector<std::pair<int, int>> out;
                               for (auto c : d.coords()) out.emplace_back(c.a, c.b);
                               return out;
                             })
      .def_property_readonly("interior_vertices", &TgDomain::interior_vertices)
      .def_property_readonly("boundary_cycle", &TgDomain::boundary_cycle)
      .def_property_readonly("triangles", &TgDomain::triangles)
      .def_property_readonly("arc_plus", &TgDomain::arc_plus)
      .def_property_readonly("arc_minus", &TgDomain::arc_minus)
      .def_property_readonly("x_point", &TgDomain::x_point)
      .def_property_readonly("y_point", &TgDomain::y_point)
      .def_property_readonly("scale", &TgDomain::scale)
      .def("is_interior", &TgDomain::is_interior)
      .def("in_arc_plus", &TgDomain::in_arc_plus)
      .def("in_arc_minus", &TgDomain::in_arc_minus)
      .def("neighbors", [](const TgDomain& d, int v) {
        std::vector<int> out;
        for (int n : d.neighbors(v)) {
          if (n >= 0) out.push_back(n);
        }
        return out;
      })
      .def("find", [](const TgDomain& d, int a, int b) { return d.find({a, b}); })
      .def("boundary_polygon", &TgDomain::boundary_polygon)
      .def("centroid", &TgDomain::centroid)
      .def("contains", &TgDomain::contains)
      .def("with_arcs_swapped", &TgDomain::with_arcs_swapped)
      .def("to_dict", [](const TgDomain& d) { return json_to_py(d.to_json()); });

  m.def("build_rhombus_domain", &build_rhombus_domain, py::arg("side_n"), py::arg("split_fraction") = 0.5,
        py::arg("scale") = 1.0);
  m.def("build_hexagon_domain", &build_hexagon_domain, py::arg("side_n"), py::arg("split_fraction") = 0.5,
        py::arg("scale") = 1.0);
  m.def("build_box_domain", &build_box_domain, py::arg("width"), py::arg("height"), py::arg("mesh"));
  m.def("inradius", &inradius, py::arg("domain"), py::arg("center"));
  m.def("count_primal_edges", &count_primal_edges);

  // field
  py::class_<FieldSample>(m, "FieldSample")
      .def(py::init<>())
      .def_readwrite("values", &FieldSample::values)
      .def_readwrite("boundary_data", &FieldSample::boundary_data)
      .def_readwrite("seed", &FieldSample::seed);
  m.def("arc_boundary_data", &arc_boundary_data, py::arg("domain"), py::arg("lam") = kCriticalLambda);
  m.def("harmonic_extension", &harmonic_extension, py::arg("domain"), py::arg("boundary_data"));
  m.def("sample_dgff", &sample_dgff, py::arg("domain"), py::arg("boundary_data"), py::arg("seed"), release());
  m.def("discrete_green", &discrete_green, py::arg("domain"), py::arg("u"), py::arg("v"));
  m.def("dirichlet_energy", [](const TgDomain& d, const Eigen::VectorXd& f) { return dirichlet_form(d).energy(f); },
        py::arg("domain"), py::arg("values"));
  m.def("vertex_bump", &vertex_bump, py::arg("domain"), py::arg("center"), py::arg("radius"), py::arg("height"));
  m.def("add_bump", &add_bump, py::arg("field"), py::arg("domain"), py::arg("psi"));

  py::class_<DgffSampler>(m, "DgffSampler")
      .def(py::init<const TgDomain&>(), py::keep_alive<1, 2>())
      .def("sample",
           py::overload_cast<const std::vector<double>&, std::uint64_t, std::uint64_t>(&DgffSampler::sample, py::const_),
           py::arg("boundary_data"), py::arg("seed"), py::arg("index") = 0, release())
      .def("mean", &DgffSampler::mean);

  // interface
  py::class_<InterfacePath>(m, "InterfacePath")
      .def_readonly("dual_points", &InterfacePath::dual_points)
      .def_readonly("crossed", &InterfacePath::crossed)
      .def_readonly("triangles", &InterfacePath::triangles)
      .def_readonly("left_vertices", &InterfacePath::left_vertices)
      .def_readonly("right_vertices", &InterfacePath::right_vertices)
      .def_readonly("complete", &InterfacePath::complete)
      .def_property_readonly("num_steps", &InterfacePath::num_steps);
  m.def(
      "trace_interface",
      [](const TgDomain& d, const FieldSample& f, double level) {
        TraceOptions o;
        o.level = level;
        return trace_interface(d, f, o);
      },
      py::arg("domain"), py::arg("field"), py::arg("level") = 0.0);
  m.def("height_gap_statistic", &height_gap_statistic, py::arg("domain"), py::arg("field"), py::arg("path"),
        py::arg("probe"));
  m.def("graph_distance", &graph_distance, py::arg("domain"), py::arg("sources"));

  // conformal
  py::class_<ConformalMap>(m, "ConformalMap")
      .def("map", &ConformalMap::map)
      .def("inverse", &ConformalMap::inverse)
      .def("derivative", &ConformalMap::derivative)
      .def("boundary_image", &ConformalMap::boundary_image)
      .def_property_readonly("num_slits", &ConformalMap::num_slits)
      .def("to_dict", [](const ConformalMap& c) { return json_to_py(c.to_json()); });
  m.def("map_domain_to_H", &map_domain_to_H, py::arg("domain"), py::arg("subdiv") = 4, py::arg("refine") = 0,
        release());

  // loewner
  py::class_<DrivingFunction>(m, "DrivingFunction")
      .def(py::init([](std::vector<double> t, std::vector<double> w) {
             DrivingFunction d{std::move(t), std::move(w)};
             d.validate();
             return d;
           }),
           py::arg("times"), py::arg("values"))
      .def_readonly("times", &DrivingFunction::times)
      .def_readonly("values", &DrivingFunction::values)
      .def_property_readonly("horizon", &DrivingFunction::horizon)
      .def("__call__", &DrivingFunction::operator())
      .def("__len__", &DrivingFunction::size)
      .def("resampled", &DrivingFunction::resampled);
  py::class_<HalfPlanePath>(m, "HalfPlanePath")
      .def_readonly("points", &HalfPlanePath::points)
      .def_readonly("times", &HalfPlanePath::times);
  m.def("sample_sle4_driving", &sample_sle4_driving, py::arg("horizon"), py::arg("delta"), py::arg("seed"),
        py::arg("index") = 0);
  m.def("solve_forward", &solve_forward, py::arg("driving"), py::arg("z"), py::arg("t"));
  m.def("trace_from_driving", &trace_from_driving, py::arg("driving"), py::arg("substeps") = 1, release());
  m.def(
      "extract_driving",
      [](const std::vector<Point>& points, double delta, double t_max) {
        return extract_driving(as_path(points), delta, t_max);
      },
      py::arg("points"), py::arg("delta"), py::arg("t_max") = std::numeric_limits<double>::infinity(), release());
  m.def(
      "halfplane_capacity", [](const std::vector<Point>& points) { return halfplane_capacity(as_path(points)); },
      py::arg("points"));
  m.def("driving_sup_distance", &driving_sup_distance, py::arg("w1"), py::arg("w2"), py::arg("t_max"));
  m.def("d_star", &d_star);

  // continuum
  m.def("green_h", &green_h, py::arg("x"), py::arg("y"));
  m.def("h_t_eval", &h_t_eval, py::arg("g"), py::arg("w"), py::arg("lam") = kCriticalLambda);

  py::class_<Report>(m, "Report")
      .def_readonly("name", &Report::name)
      .def_property_readonly("passed", &Report::passed)
      .def("to_dict", [](const Report& r) { return json_to_py(r.to_json()); })
      .def("__repr__", [](const Report& r) {
        return "<Report " + r.name + (r.passed() ? " passed" : " failed") + ", " + std::to_string(r.checks.size()) +
               " checks>";
      });

  m.def(
      "verify_height_martingale",
      [](Point z, std::vector<double> checkpoints, std::size_t runs, double delta, unsigned substeps,
         std::uint64_t seed, double lambda, unsigned threads) {
        return verify_height_martingale(z, std::move(checkpoints), ensemble(runs, delta, substeps, seed, lambda, threads));
      },
      py::arg("z"), py::arg("checkpoints"), py::arg("runs") = 10000, py::arg("delta") = 1e-3, py::arg("substeps") = 8,
      py::arg("seed") = 1, py::arg("lam") = kCriticalLambda, py::arg("threads") = 1, release());
  m.def(
      "verify_qv_relation",
      [](Point x, Point y, double horizon, std::size_t runs, double delta, unsigned substeps, std::uint64_t seed,
         double lambda, unsigned threads) {
        return verify_qv_relation(x, y, horizon, ensemble(runs, delta, substeps, seed, lambda, threads));
      },
      py::arg("x"), py::arg("y"), py::arg("horizon"), py::arg("runs") = 10000, py::arg("delta") = 1e-3,
      py::arg("substeps") = 8, py::arg("seed") = 1, py::arg("lam") = kCriticalLambda, py::arg("threads") = 1,
      release());
  m.def(
      "verify_energy_clock",
      [](double horizon, std::size_t runs, double delta, unsigned substeps, std::uint64_t seed, double lambda,
         unsigned threads) {
        return verify_energy_clock(two_point_test_function(), horizon,
                                   ensemble(runs, delta, substeps, seed, lambda, threads));
      },
      py::arg("horizon"), py::arg("runs") = 10000, py::arg("delta") = 1e-3, py::arg("substeps") = 8,
      py::arg("seed") = 1, py::arg("lam") = kCriticalLambda, py::arg("threads") = 1, release());
  m.def("verify_projection", &verify_projection, py::arg("sides"), py::arg("threads") = 1, release());
  m.def("verify_height_gap", &verify_height_gap, py::arg("side"), py::arg("runs"), py::arg("distances"),
        py::arg("seed"), py::arg("lam") = kCriticalLambda, py::arg("threads") = 1, release());

  // localset
  py::enum_<Arc>(m, "Arc").value("Minus", Arc::Minus).value("Plus", Arc::Plus);
  py::class_<SetRule>(m, "SetRule")
      .def_readonly("name", &SetRule::name)
      .def_readonly("randomized", &SetRule::randomized)
      .def(
          "__call__",
          [](const SetRule& r, const TgDomain& d, const Eigen::VectorXd& values, std::optional<std::uint64_t> aux_seed) {
            std::vector<char> mask;
            if (aux_seed) {
              Rng aux = make_rng(*aux_seed);
              mask = r(d, values, &aux);
            } else {
              mask = r(d, values);
            }
            std::vector<int> members;
            for (std::size_t v = 0; v < mask.size(); ++v) {
              if (mask[v]) members.push_back(static_cast<int>(v));
            }
            return members;
          },
          py::arg("domain"), py::arg("values"), py::arg("aux_seed") = py::none());
  m.def("deterministic_rule", &deterministic_rule, py::arg("vertices"));
  m.def("negative_set_rule", &negative_set_rule);
  m.def("boundary_cluster_rule", &boundary_cluster_rule, py::arg("arc"), py::arg("level") = 0.0);
  m.def("random_level_cluster_rule", &random_level_cluster_rule, py::arg("spread"));
  m.def("exploration_rule", &exploration_rule, py::arg("max_steps"));
  m.def(
      "test_locality",
      [](const SetRule& rule, const TgDomain& d, std::size_t n, std::uint64_t seed, double threshold, unsigned threads) {
        LocalityOptions o;
        o.threshold = threshold;
        o.threads = threads;
        return test_locality(rule, d, n, seed, o);
      },
      py::arg("rule"), py::arg("domain"), py::arg("n_samples"), py::arg("seed"), py::arg("threshold") = 4.0,
      py::arg("threads") = 1, release());
  m.def(
      "ccup_union",
      [](const SetRule& a, const SetRule& b, const TgDomain& d, std::size_t n, std::uint64_t seed) {
        return ccup_union(a, b, d, n, seed).union_report;
      },
      py::arg("first"), py::arg("second"), py::arg("domain"), py::arg("n_samples"), py::arg("seed"), release());
  m.def(
      "conditional_mean_harmonicity",
      [](const SetRule& rule, const TgDomain& d, std::size_t n, std::uint64_t seed, std::size_t min_hits) {
        HarmonicityOptions o;
        o.min_hits = min_hits;
        return conditional_mean_harmonicity(rule, d, n, seed, o);
      },
      py::arg("rule"), py::arg("domain"), py::arg("n_samples"), py::arg("seed"), py::arg("min_hits") = 200, release());

  // pipeline
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_static("parse", &parse_config, py::arg("ini_text"))
      .def_static("load", &load_config, py::arg("path"))
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("runs", &ExperimentConfig::runs)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_readwrite("lam", &ExperimentConfig::lambda)
      .def_property(
          "side", [](const ExperimentConfig& c) { return c.domain.side; },
          [](ExperimentConfig& c, int s) { c.domain.side = s; })
      .def_property(
          "shape", [](const ExperimentConfig& c) { return c.domain.shape; },
          [](ExperimentConfig& c, std::string s) { c.domain.shape = std::move(s); })
      .def_property(
          "bump",
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            if (!c.bump) return std::nullopt;
            const auto& b = *c.bump;
            return std::to_string(b.center.real()) + "," + std::to_string(b.center.imag()) + "," +
                   std::to_string(b.radius) + "," + std::to_string(b.height);
          },
          [](ExperimentConfig& c, std::optional<std::string> text) {
            c.bump = text ? std::optional<BumpSpec>(BumpSpec::parse(*text)) : std::nullopt;
          })
      .def_readwrite("extract_delta", &ExperimentConfig::extract_delta)
      .def_readwrite("t_max", &ExperimentConfig::t_max)
      .def_readwrite("verify_runs", &ExperimentConfig::verify_runs)
      .def_readwrite("verify_horizon", &ExperimentConfig::verify_horizon)
      .def_readwrite("coupling_runs", &ExperimentConfig::coupling_runs)
      .def_readwrite("locality_rule", &ExperimentConfig::locality_rule)
      .def_readwrite("locality_samples", &ExperimentConfig::locality_samples)
      .def_readwrite("projection_sides", &ExperimentConfig::projection_sides)
      .def_readwrite("height_gap_side", &ExperimentConfig::height_gap_side)
      .def_readwrite("height_gap_runs", &ExperimentConfig::height_gap_runs)
      .def("validate", &ExperimentConfig::validate)
      .def("snapshot", &ExperimentConfig::snapshot)
      .def("hash", &ExperimentConfig::hash);

  py::class_<InterfaceRun>(m, "InterfaceRun")
      .def_readonly("index", &InterfaceRun::index)
      .def_readonly("error", &InterfaceRun::error)
      .def_readonly("path", &InterfaceRun::path)
      .def_readonly("mapped", &InterfaceRun::mapped)
      .def_readonly("driving", &InterfaceRun::driving)
      .def_property_readonly("ok", &InterfaceRun::ok);
  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("report", &PipelineResult::report)
      .def_readonly("runs", &PipelineResult::runs);

  py::class_<InterfacePipeline>(m, "InterfacePipeline")
      .def(py::init<const ExperimentConfig&>(), release())
      .def_property_readonly("domain", &InterfacePipeline::domain, py::return_value_policy::reference_internal)
      .def_property_readonly("map", &InterfacePipeline::map, py::return_value_policy::reference_internal)
      .def("sample", &InterfacePipeline::sample, py::arg("index"))
      .def("trace", &InterfacePipeline::trace)
      .def("to_half_plane", &InterfacePipeline::to_half_plane)
      .def("extract", &InterfacePipeline::extract)
      .def("run", &InterfacePipeline::run, py::arg("index"), release());

  m.def("run_interface_pipeline", &run_interface_pipeline, py::arg("config"), release());
  m.def("write_pipeline_outputs", &write_pipeline_outputs, py::arg("dir"), py::arg("config"), py::arg("result"),
        release());
  m.def("verifier_names", &verifier_names);
  m.def("run_verifier", &run_verifier, py::arg("config"), py::arg("which"), release());
}
