#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lpvplan/errors.hpp"
#include "lpvplan/guidance.hpp"
#include "lpvplan/harness.hpp"
#include "lpvplan/qp.hpp"
#include "lpvplan/scenario.hpp"
#include "lpvplan/vehicle.hpp"
#include "lpvplan/world.hpp"

namespace py = pybind11;
using namespace lpvplan;

namespace {

std::vector<Polygon> toPolygons(const std::vector<std::vector<std::array<double, 2>>>& in) {
  std::vector<Polygon> out;
  for (const auto& poly : in) {
    Polygon p;
    for (const auto& v : poly) p.emplace_back(v[0], v[1]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Vec2> toPoints(const std::vector<std::array<double, 2>>& in) {
  std::vector<Vec2> out;
  for (const auto& v : in) out.emplace_back(v[0], v[1]);
  return out;
}

std::vector<std::array<double, 2>> fromPoints(const std::vector<Vec2>& in) {
  std::vector<std::array<double, 2>> out;
  for (const auto& v : in) out.push_back({v.x(), v.y()});
  return out;
}

struct GraphView {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  std::size_t start = 0;
  std::size_t goal = 0;
  VisibilityGraph graph;
};

struct RunSummary {
  bool collision = false;
  bool planningFailed = false;
  std::string diagnostic;
  double finalPositionError = 0.0;
  double finalHeadingError = 0.0;
  int infeasibleCycles = 0;
  int emergencyStops = 0;
  int relaxationRequests = 0;
  std::size_t cycles = 0;
  std::size_t plantSteps = 0;
  double maxSlack = 0.0;
  std::vector<double> deltaF;
  std::vector<double> deltaR;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "lpvplan core bindings";

  py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidQuery>(m, "InvalidQuery");
  py::register_exception<NoPath>(m, "NoPath");
  py::register_exception<InvalidPath>(m, "InvalidPath");
  py::register_exception<ScenarioError>(m, "ScenarioError");

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("Optimal", SolveStatus::Optimal)
      .value("Infeasible", SolveStatus::Infeasible)
      .value("IterationLimit", SolveStatus::IterationLimit);

  py::class_<VehicleParams>(m, "VehicleParams")
      .def_readwrite("mass", &VehicleParams::mass)
      .def_readwrite("yaw_inertia", &VehicleParams::yawInertia)
      .def_readwrite("l_f", &VehicleParams::lF)
      .def_readwrite("l_r", &VehicleParams::lR)
      .def_readwrite("c_f", &VehicleParams::corneringStiffnessF)
      .def_readwrite("c_r", &VehicleParams::corneringStiffnessR)
      .def_readwrite("half_width", &VehicleParams::halfWidth);
  m.def("vehicle_preset", [](const std::string& name) { return vehiclePreset(name); }, py::arg("name"));

  py::class_<LpvModel>(m, "LpvModel")
      .def_property_readonly("A", [](const LpvModel& x) { return Eigen::MatrixXd(x.A); })
      .def_property_readonly("B", [](const LpvModel& x) { return Eigen::MatrixXd(x.B); })
      .def_readonly("speed", &LpvModel::speed)
      .def_readonly("speed_clamped", &LpvModel::speedClamped);

  m.def("lpv_matrices", &lpvMatrices, py::arg("vehicle"), py::arg("speed"));
  m.def("output_matrix", [](const VehicleParams& p) { return Eigen::MatrixXd(outputMatrix(p)); }, py::arg("vehicle"));
  m.def(
      "discretize",
      [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double Ts) {
        const DiscreteModel d = discretize(A, B, Ts);
        return py::make_tuple(d.Ad, d.Bd);
      },
      py::arg("A"), py::arg("B"), py::arg("Ts"));

  m.def(
      "solve_qp",
      [](const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
         int maxIterations, double tolerance) {
        const QpSolution sol = solveQp({H, g, G, h}, {maxIterations, tolerance});
        py::dict out;
        out["z"] = sol.z;
        out["objective"] = sol.objective;
        out["status"] = sol.report.status;
        out["iterations"] = sol.report.iterations;
        out["kkt"] = sol.report.kktResiduals.max();
        return out;
      },
      py::arg("H"), py::arg("g"), py::arg("G"), py::arg("h"), py::arg("max_iterations") = 100,
      py::arg("tolerance") = 1e-8);

  py::class_<GraphView>(m, "VisibilityGraph")
      .def_readonly("nodes", &GraphView::nodes)
      .def_readonly("edges", &GraphView::edges)
      .def_readonly("start", &GraphView::start)
      .def_readonly("goal", &GraphView::goal);

  m.def(
      "build_visibility_graph",
      [](const std::vector<std::vector<std::array<double, 2>>>& obstacles, std::array<double, 4> bounds,
         std::array<double, 3> start, std::array<double, 3> goal, double inflation) {
        const PolygonalWorld world(toPolygons(obstacles), Box2{{bounds[0], bounds[1]}, {bounds[2], bounds[3]}});
        GraphView v;
        v.graph = buildVisibilityGraph(world, {start[0], start[1], start[2]}, {goal[0], goal[1], goal[2]}, inflation);
        v.nodes = fromPoints(v.graph.nodes);
        for (std::size_t a = 0; a < v.graph.adjacency.size(); ++a) {
          for (const auto& e : v.graph.adjacency[a]) {
            if (a < e.to) v.edges.emplace_back(a, e.to, e.length);
          }
        }
        v.start = v.graph.startNode;
        v.goal = v.graph.goalNode;
        return v;
      },
      py::arg("obstacles"), py::arg("bounds"), py::arg("start"), py::arg("goal"), py::arg("inflation") = 0.0);

  m.def(
      "shortest_heading_path",
      [](const GraphView& g, std::array<double, 3> start, std::array<double, 3> goal, double wStart, double wEnd) {
        const HeadingPath path =
            shortestHeadingPath(g.graph, {start[0], start[1], start[2]}, {goal[0], goal[1], goal[2]}, wStart, wEnd);
        return py::make_tuple(fromPoints(path.points), path.cost);
      },
      py::arg("graph"), py::arg("start"), py::arg("goal"), py::arg("w_start"), py::arg("w_end"));

  py::class_<ReferencePath>(m, "ReferencePath")
      .def_property_readonly("vertices", [](const ReferencePath& r) { return fromPoints(r.vertices()); })
      .def_property_readonly("arc_length", &ReferencePath::cumulativeArcLength)
      .def_property_readonly("headings", &ReferencePath::segmentHeadings)
      .def_property_readonly("length", &ReferencePath::length);
  m.def(
      "build_reference", [](const std::vector<std::array<double, 2>>& pts) { return buildReference(toPoints(pts)); },
      py::arg("points"));
  m.def(
      "project_to_frenet",
      [](const ReferencePath& path, std::array<double, 2> p) {
        const FrenetSample f = projectToFrenet(path, {p[0], p[1]});
        return py::make_tuple(f.s, f.e, f.headingRef);
      },
      py::arg("path"), py::arg("point"));

  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("collision", &RunSummary::collision)
      .def_readonly("planning_failed", &RunSummary::planningFailed)
      .def_readonly("diagnostic", &RunSummary::diagnostic)
      .def_readonly("final_position_error", &RunSummary::finalPositionError)
      .def_readonly("final_heading_error", &RunSummary::finalHeadingError)
      .def_readonly("infeasible_cycles", &RunSummary::infeasibleCycles)
      .def_readonly("emergency_stops", &RunSummary::emergencyStops)
      .def_readonly("relaxation_requests", &RunSummary::relaxationRequests)
      .def_readonly("cycles", &RunSummary::cycles)
      .def_readonly("plant_steps", &RunSummary::plantSteps)
      .def_readonly("max_slack", &RunSummary::maxSlack)
      .def_readonly("delta_f", &RunSummary::deltaF)
      .def_readonly("delta_r", &RunSummary::deltaR);

  m.def(
      "run_scenario",
      [](const std::filesystem::path& file, std::optional<std::uint64_t> seed,
         std::optional<std::filesystem::path> outDir) {
        const Scenario s = loadScenario(file);
        RunOptions opt;
        opt.seed = seed;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = runScenario(s, opt);
        }
        if (outDir) emitPlots(r, *outDir);
        RunSummary out;
        out.collision = r.collision;
        out.planningFailed = r.planningFailed;
        out.diagnostic = r.diagnostic;
        out.finalPositionError = r.finalPositionError;
        out.finalHeadingError = r.finalHeadingError;
        out.infeasibleCycles = r.infeasibleCycles;
        out.emergencyStops = r.emergencyStops;
        out.relaxationRequests = r.relaxationRequests;
        out.cycles = r.cycles.size();
        out.plantSteps = r.plant.size();
        out.maxSlack = r.maxSlack;
        for (const auto& c : r.cycles) {
          out.deltaF.push_back(c.command.deltaF);
          out.deltaR.push_back(c.command.deltaR);
        }
        return out;
      },
      py::arg("scenario_file"), py::arg("seed") = py::none(), py::arg("out_dir") = py::none());
}
