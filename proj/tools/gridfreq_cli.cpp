#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridfreq/scenario.hpp"
#include "gridfreq/sim.hpp"

namespace {

using nlohmann::json;
using namespace gridfreq;

int env_threads() {
  const char* v = std::getenv("GRIDFREQ_THREADS");
  if (!v) return 0;
  const int n = std::atoi(v);
  return n > 0 ? n : 0;
}

json metrics_json(const NetworkModel& net, const Scenario& sc, const SimTrace& trace,
                  double safety_start) {
  json m;
  m["cost"] = control_cost(trace, sc.mpc.weight, trace.time.front(), trace.time.back());
  json omin = json::object(), omax = json::object();
  for (int i = 0; i < net.node_count; ++i) {
    const std::string id = std::to_string(i + 1);
    omin[id] = trace.monitors.omega_min(i);
    omax[id] = trace.monitors.omega_max(i);
  }
  m["omega_min"] = omin;
  m["omega_max"] = omax;

  json safety = json::object();
  for (const auto& [id, entry] : safety_report(trace, net, sc.safety, safety_start)) {
    json e;
    e["entered"] = entry.entered;
    e["entry_time"] = entry.entry_time;
    e["post_entry_violations"] = entry.post_entry_violations;
    e["invariance_held"] = entry.invariance_held;
    safety[std::to_string(id)] = e;
  }
  m["safety"] = safety;

  json ratio = json::object();
  for (int i : net.controlled) {
    const double denom = trace.monitors.abs_alpha_int(i);
    ratio[std::to_string(i + 1)] =
        denom > 0.0 ? trace.monitors.abs_alpha_df_int(i) / denom : 0.0;
  }
  m["alpha_df_ratio"] = ratio;

  m["cond9_violations"] = trace.monitors.cond9_violations;
  m["dissipativity_violations"] = trace.monitors.dissipativity_violations;
  m["max_dV"] = trace.monitors.max_dV;
  m["state_hash"] = trace.monitors.state_hash;
  return m;
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

// reads a trace CSV back (columns as written by write_trace_csv)
SimTrace read_trace_csv(const std::string& path, const NetworkModel& net) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty trace: " + path);

  const int n = net.node_count;
  const int mm = net.edge_count();
  const int cols = 1 + n + mm + 4 * n + 1;
  {
    std::stringstream hs(line);
    std::string tok;
    int count = 0;
    while (std::getline(hs, tok, ',')) ++count;
    if (count != cols) throw std::invalid_argument("trace column count mismatch: " + path);
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(cols);
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
    if (static_cast<int>(row.size()) != cols) {
      throw std::invalid_argument("ragged trace row in " + path);
    }
    rows.push_back(std::move(row));
  }
  const int r = static_cast<int>(rows.size());
  SimTrace tr;
  tr.time.resize(r);
  tr.omega.resize(r, n);
  tr.flow.resize(r, mm);
  tr.alpha.resize(r, n);
  tr.alpha_mpc.resize(r, n);
  tr.alpha_df.resize(r, n);
  tr.u_mpc.resize(r, n);
  tr.u_hat.resize(r, n);
  tr.lyapunov.resize(r);
  tr.sample_flag.assign(r, 0);
  for (int k = 0; k < r; ++k) {
    int c = 0;
    tr.time[k] = rows[k][c++];
    for (int i = 0; i < n; ++i) tr.omega(k, i) = rows[k][c++];
    for (int e = 0; e < mm; ++e) tr.flow(k, e) = rows[k][c++];
    for (int i = 0; i < n; ++i) tr.alpha(k, i) = rows[k][c++];
    for (int i = 0; i < n; ++i) tr.alpha_mpc(k, i) = rows[k][c++];
    for (int i = 0; i < n; ++i) tr.alpha_df(k, i) = rows[k][c++];
    for (int i = 0; i < n; ++i) tr.u_mpc(k, i) = rows[k][c++];
    tr.lyapunov(k) = rows[k][c++];
  }
  // monitors derivable from the strided rows only
  tr.monitors.omega_min = tr.omega.colwise().minCoeff().transpose();
  tr.monitors.omega_max = tr.omega.colwise().maxCoeff().transpose();
  tr.monitors.abs_alpha_int = Eigen::VectorXd::Zero(n);
  tr.monitors.abs_alpha_df_int = Eigen::VectorXd::Zero(n);
  for (int k = 0; k + 1 < r; ++k) {
    const double h = tr.time[k + 1] - tr.time[k];
    for (int i = 0; i < n; ++i) {
      tr.monitors.abs_alpha_int(i) +=
          0.5 * h * (std::abs(tr.alpha(k, i)) + std::abs(tr.alpha(k + 1, i)));
      tr.monitors.abs_alpha_df_int(i) +=
          0.5 * h * (std::abs(tr.alpha_df(k, i)) + std::abs(tr.alpha_df(k + 1, i)));
    }
  }
  return tr;
}

json vec_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

int cmd_simulate(const std::string& scenario_path, const std::string& trace_path,
                 const std::string& metrics_path, bool disable_controller,
                 bool disable_bottom, bool disable_top, double enable_at, bool enable_at_set,
                 bool parallel) {
  LoadedScenario loaded = load_scenario(scenario_path);
  Scenario& sc = loaded.scenario;
  if (disable_controller) sc.controller_enabled = false;
  if (disable_bottom) sc.bottom_layer_enabled = false;
  if (disable_top) sc.top_layer_enabled = false;
  if (enable_at_set) sc.enable_at = enable_at;
  sc.parallel_regions = parallel;
  sc.max_threads = env_threads();

  const SimTrace trace = run_closed_loop(loaded.network, sc);
  if (!trace_path.empty()) write_trace_csv(trace, loaded.network, trace_path);
  write_json(metrics_json(loaded.network, sc, trace, sc.enable_at), metrics_path);
  return 0;
}

int cmd_check_partition(const std::string& network_path, const std::string& partition_path) {
  const NetworkModel net = load_network(network_path);
  const Partition part = validate_partition(net, load_partition_file(partition_path));
  for (size_t b = 0; b < part.regions.size(); ++b) {
    const Region& r = part.regions[b];
    auto ids = [](const std::vector<int>& xs) {
      std::string s;
      for (int x : xs) s += (s.empty() ? "" : ",") + std::to_string(x + 1);
      return s;
    };
    std::cout << "region " << b + 1 << ":\n";
    std::cout << "  nodes: " << ids(r.nodes) << "\n";
    std::cout << "  controlled: " << ids(r.controlled) << "\n";
    std::cout << "  monitored: " << ids(r.monitored) << "\n";
    auto edges = [&](const std::vector<int>& ks) {
      std::string s;
      for (int k : ks) {
        s += (s.empty() ? "" : ",") + std::string("(") + std::to_string(net.edges[k].from) +
             "," + std::to_string(net.edges[k].to) + ")";
      }
      return s;
    };
    std::cout << "  internal edges: " << edges(r.internal_edges) << "\n";
    std::cout << "  boundary edges: " << edges(r.boundary_edges) << "\n";
  }
  std::cout << "partition ok\n";
  return 0;
}

int cmd_solve_once(const std::string& scenario_path, double time, int region,
                   double penalty_override, bool penalty_set, const std::string& out_path) {
  LoadedScenario loaded = load_scenario(scenario_path);
  const NetworkModel& net = loaded.network;
  Scenario& sc = loaded.scenario;
  if (penalty_set) sc.mpc.penalty_d = penalty_override;

  std::vector<std::vector<int>> region_ids = sc.region_node_ids;
  if (region_ids.empty()) {
    std::vector<int> all(net.node_count);
    for (int i = 0; i < net.node_count; ++i) all[i] = i + 1;
    region_ids = {all};
  }
  const Partition part = validate_partition(net, region_ids);
  if (region < 0 || region >= static_cast<int>(part.regions.size())) {
    throw std::invalid_argument("region index out of range");
  }
  const std::vector<SamplingSchedule>& sch = sc.schedules;
  if (region < static_cast<int>(sch.size()) && !sch[region].due(time)) {
    throw std::invalid_argument("time is not a sampling instant for this region");
  }

  SystemState state = sc.initial.flow.size() ? sc.initial : SystemState::zero(net);
  if (state.flow.size() == 0) state = SystemState::zero(net);
  const Subnet sub = region_subnet(net, part.regions[region]);
  const Snapshot snap =
      regional_snapshot(net, part.regions[region], sub, state, sc.injection, time, sc.mpc);
  const QpProblem prob = build_problem(sub, sc.mpc, snap);
  const MpcResult res = solve(sub, sc.mpc, snap);

  json out;
  out["time"] = time;
  out["region"] = region;
  json sj;
  sj["flow"] = vec_json(snap.flow);
  sj["omega"] = vec_json(snap.omega);
  sj["alpha_mpc"] = vec_json(snap.alpha_mpc);
  sj["forecast"] = mat_json(snap.forecast);
  out["snapshot"] = sj;
  json qj;
  qj["K"] = mat_json(prob.K);
  qj["q"] = vec_json(prob.q);
  qj["G"] = mat_json(prob.G);
  qj["w"] = vec_json(prob.w);
  out["qp"] = qj;
  json rj;
  rj["u_star"] = vec_json(res.u_star);
  rj["beta_star"] = res.beta_star;
  rj["objective"] = res.qp.objective;
  rj["iterations"] = res.qp.iterations;
  rj["pred_omega"] = mat_json(res.pred_omega);
  out["result"] = rj;
  write_json(out, out_path);
  return 0;
}

int cmd_metrics(const std::string& scenario_path, const std::string& trace_path,
                const std::string& out_path) {
  LoadedScenario loaded = load_scenario(scenario_path);
  const SimTrace trace = read_trace_csv(trace_path, loaded.network);
  write_json(metrics_json(loaded.network, loaded.scenario, trace, loaded.scenario.enable_at),
             out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linearized power-network transient frequency control"};
  app.require_subcommand(1);

  std::string scenario_path, trace_path, metrics_path, out_path;
  std::string network_path, partition_path;
  bool disable_controller = false, disable_bottom = false, disable_top = false;
  bool parallel = false;
  double enable_at = 0.0;
  double solve_time = 0.0;
  int region = 0;
  double penalty = 0.0;

  CLI::App* sim = app.add_subcommand("simulate", "run a closed-loop scenario");
  sim->add_option("scenario", scenario_path, "scenario JSON")->required();
  sim->add_option("--trace", trace_path, "trace CSV output path");
  sim->add_option("--metrics", metrics_path, "metrics JSON output path (default stdout)");
  sim->add_flag("--disable-controller", disable_controller, "open-loop run");
  sim->add_flag("--disable-bottom-layer", disable_bottom, "direct feedback only");
  sim->add_flag("--disable-top-layer", disable_top, "MPC layer only");
  CLI::Option* ea = sim->add_option("--enable-at", enable_at, "controller start time [s]");
  sim->add_flag("--parallel-regions", parallel, "solve due regions concurrently");

  CLI::App* chk = app.add_subcommand("check-partition", "validate a partition file");
  chk->add_option("network", network_path, "network JSON")->required();
  chk->add_option("partition", partition_path, "partition JSON")->required();

  CLI::App* once = app.add_subcommand("solve-once", "dump one regional MPC solve");
  once->add_option("scenario", scenario_path, "scenario JSON")->required();
  once->add_option("--time", solve_time, "sampling instant [s]");
  once->add_option("--region", region, "region index (0-based)");
  CLI::Option* pd = once->add_option("--penalty-d", penalty, "override the beta penalty");
  once->add_option("-o,--output", out_path, "JSON output path (default stdout)");

  CLI::App* met = app.add_subcommand("metrics", "recompute metrics from a trace CSV");
  met->add_option("scenario", scenario_path, "scenario JSON")->required();
  met->add_option("--trace", trace_path, "trace CSV input")->required();
  met->add_option("-o,--output", out_path, "JSON output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(scenario_path, trace_path, metrics_path, disable_controller,
                          disable_bottom, disable_top, enable_at, ea->count() > 0, parallel);
    }
    if (chk->parsed()) return cmd_check_partition(network_path, partition_path);
    if (once->parsed()) {
      return cmd_solve_once(scenario_path, solve_time, region, penalty, pd->count() > 0,
                            out_path);
    }
    if (met->parsed()) return cmd_metrics(scenario_path, trace_path, out_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
