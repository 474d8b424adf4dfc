#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridfreq/mpc.hpp"
#include "gridfreq/scenario.hpp"
#include "gridfreq/sim.hpp"

namespace py = pybind11;
using namespace gridfreq;

namespace {

std::vector<int> to_ids(const std::vector<int>& zero_based) {
  std::vector<int> out;
  out.reserve(zero_based.size());
  for (int i : zero_based) out.push_back(i + 1);
  return out;
}

Partition scenario_partition(const NetworkModel& net, const Scenario& sc) {
  std::vector<std::vector<int>> ids = sc.region_node_ids;
  if (ids.empty()) {
    std::vector<int> all(net.node_count);
    for (int i = 0; i < net.node_count; ++i) all[i] = i + 1;
    ids = {all};
  }
  return validate_partition(net, ids);
}

py::dict solve_once(const LoadedScenario& loaded, double time, int region) {
  const NetworkModel& net = loaded.network;
  const Scenario& sc = loaded.scenario;
  const Partition part = scenario_partition(net, sc);
  if (region < 0 || region >= static_cast<int>(part.regions.size())) {
    throw std::invalid_argument("region index out of range");
  }
  SystemState state = sc.initial.flow.size() ? sc.initial : SystemState::zero(net);
  const Subnet sub = region_subnet(net, part.regions[region]);
  const Snapshot snap =
      regional_snapshot(net, part.regions[region], sub, state, sc.injection, time, sc.mpc);
  const MpcResult res = solve(sub, sc.mpc, snap);

  py::dict out;
  out["u_star"] = res.u_star;
  out["beta_star"] = res.beta_star;
  out["objective"] = res.qp.objective;
  out["iterations"] = res.qp.iterations;
  out["pred_omega"] = res.pred_omega;
  out["nodes"] = to_ids([&] {
    std::vector<int> g;
    for (int j = 0; j < sub.node_count(); ++j) g.push_back(sub.global_nodes[j]);
    return g;
  }());
  return out;
}

py::list check_partition(const NetworkModel& net,
                         const std::vector<std::vector<int>>& region_node_ids) {
  const Partition part = validate_partition(net, region_node_ids);
  py::list out;
  for (const Region& r : part.regions) {
    py::dict d;
    d["nodes"] = to_ids(r.nodes);
    d["controlled"] = to_ids(r.controlled);
    d["monitored"] = to_ids(r.monitored);
    py::list internal, boundary;
    for (int k : r.internal_edges) {
      internal.append(py::make_tuple(net.edges[k].from, net.edges[k].to));
    }
    for (int k : r.boundary_edges) {
      boundary.append(py::make_tuple(net.edges[k].from, net.edges[k].to));
    }
    d["internal_edges"] = internal;
    d["boundary_edges"] = boundary;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-layer transient frequency control on power networks";

  py::class_<NetworkModel>(m, "Network")
      .def_readonly("node_count", &NetworkModel::node_count)
      .def_property_readonly("edge_count", &NetworkModel::edge_count)
      .def_readonly("inertia", &NetworkModel::inertia)
      .def_readonly("damping", &NetworkModel::damping)
      .def_readonly("susceptance", &NetworkModel::susceptance)
      .def_readonly("incidence", &NetworkModel::incidence)
      .def_property_readonly(
          "controlled", [](const NetworkModel& n) { return to_ids(n.controlled); })
      .def_property_readonly(
          "monitored", [](const NetworkModel& n) { return to_ids(n.monitored); });

  py::class_<SimMonitors>(m, "Monitors")
      .def_readonly("omega_min", &SimMonitors::omega_min)
      .def_readonly("omega_max", &SimMonitors::omega_max)
      .def_readonly("cond9_violations", &SimMonitors::cond9_violations)
      .def_readonly("dissipativity_violations", &SimMonitors::dissipativity_violations)
      .def_readonly("max_dV", &SimMonitors::max_dV)
      .def_readonly("state_hash", &SimMonitors::state_hash)
      .def_readonly("weighted_cost", &SimMonitors::weighted_cost)
      .def_readonly("abs_alpha_int", &SimMonitors::abs_alpha_int)
      .def_readonly("abs_alpha_df_int", &SimMonitors::abs_alpha_df_int);

  py::class_<SimTrace>(m, "Trace")
      .def_readonly("time", &SimTrace::time)
      .def_readonly("omega", &SimTrace::omega)
      .def_readonly("flow", &SimTrace::flow)
      .def_readonly("alpha", &SimTrace::alpha)
      .def_readonly("alpha_mpc", &SimTrace::alpha_mpc)
      .def_readonly("alpha_df", &SimTrace::alpha_df)
      .def_readonly("u_mpc", &SimTrace::u_mpc)
      .def_readonly("u_hat", &SimTrace::u_hat)
      .def_readonly("lyapunov", &SimTrace::lyapunov)
      .def_readonly("sample_flag", &SimTrace::sample_flag)
      .def_readonly("monitors", &SimTrace::monitors)
      .def_property_readonly("rows", &SimTrace::rows);

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("horizon", &Scenario::horizon)
      .def_readwrite("step", &Scenario::step)
      .def_readwrite("enable_at", &Scenario::enable_at)
      .def_readwrite("controller_enabled", &Scenario::controller_enabled)
      .def_readwrite("bottom_layer_enabled", &Scenario::bottom_layer_enabled)
      .def_readwrite("top_layer_enabled", &Scenario::top_layer_enabled)
      .def_readwrite("record_stride", &Scenario::record_stride)
      .def_readwrite("parallel_regions", &Scenario::parallel_regions)
      .def_readwrite("max_threads", &Scenario::max_threads)
      .def_readwrite("region_penalty", &Scenario::region_penalty);

  py::class_<LoadedScenario>(m, "LoadedScenario")
      .def_readonly("network", &LoadedScenario::network)
      .def_readwrite("scenario", &LoadedScenario::scenario)
      .def_readonly("base_injection", &LoadedScenario::base_injection);

  py::class_<SafetyReportEntry>(m, "SafetyReportEntry")
      .def_readonly("entered", &SafetyReportEntry::entered)
      .def_readonly("entry_time", &SafetyReportEntry::entry_time)
      .def_readonly("post_entry_violations", &SafetyReportEntry::post_entry_violations)
      .def_readonly("invariance_held", &SafetyReportEntry::invariance_held);

  m.def("load_network", &load_network, py::arg("path"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("load_partition", &load_partition_file, py::arg("path"));
  m.def("check_partition", &check_partition, py::arg("network"), py::arg("regions"));
  m.def("simulate",
        [](const LoadedScenario& loaded) {
          return run_closed_loop(loaded.network, loaded.scenario);
        },
        py::arg("loaded"));
  m.def("control_cost", &control_cost, py::arg("trace"), py::arg("weight"), py::arg("t0"),
        py::arg("t1"));
  m.def("safety_report",
        [](const SimTrace& trace, const LoadedScenario& loaded, double t_start) {
          return safety_report(trace, loaded.network, loaded.scenario.safety, t_start);
        },
        py::arg("trace"), py::arg("loaded"), py::arg("t_start") = 0.0);
  m.def("solve_once", &solve_once, py::arg("loaded"), py::arg("time") = 0.0,
        py::arg("region") = 0);
  m.def("write_trace_csv",
        [](const SimTrace& trace, const LoadedScenario& loaded, const std::string& path) {
          write_trace_csv(trace, loaded.network, path);
        },
        py::arg("trace"), py::arg("loaded"), py::arg("path"));
}
