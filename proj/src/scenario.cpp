#include "gridfreq/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gridfreq {

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

// per-node vector from a scalar default plus an optional {"id": value} map
Eigen::VectorXd per_node(const json& section, const std::string& key, double fallback,
                         int n) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, fallback);
  if (!section.contains(key)) return out;
  const json& v = section.at(key);
  if (v.is_number()) {
    out.setConstant(v.get<double>());
  } else if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      const int id = std::stoi(it.key());
      if (id < 1 || id > n) throw std::invalid_argument("node id out of range: " + it.key());
      out(id - 1) = it.value().get<double>();
    }
  } else {
    throw std::invalid_argument("field '" + key + "' must be a number or an id map");
  }
  return out;
}

}  // namespace

NetworkModel load_network(const std::string& path) {
  const json j = read_json(path);
  std::vector<NodeParams> nodes;
  for (const json& nj : j.at("nodes")) {
    nodes.push_back({nj.at("id").get<int>(), nj.at("M").get<double>(),
                     nj.at("E").get<double>()});
  }
  std::vector<Edge> edges;
  for (const json& ej : j.at("edges")) {
    edges.push_back({ej.at("from").get<int>(), ej.at("to").get<int>(),
                     ej.at("b").get<double>()});
  }
  return build_network(nodes, edges, j.at("controlled").get<std::vector<int>>(),
                       j.at("monitored").get<std::vector<int>>());
}

Eigen::VectorXd load_base_injections(const std::string& path, const NetworkModel& net) {
  const json j = read_json(path);
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(net.node_count);
  if (!j.contains("injections")) return p0;
  for (auto it = j.at("injections").begin(); it != j.at("injections").end(); ++it) {
    const int id = std::stoi(it.key());
    if (id < 1 || id > net.node_count) {
      throw std::invalid_argument("injections: node id out of range: " + it.key());
    }
    p0(id - 1) = it.value().get<double>();
  }
  return p0;
}

std::vector<std::vector<int>> load_partition_file(const std::string& path) {
  const json j = read_json(path);
  return j.at("regions").get<std::vector<std::vector<int>>>();
}

namespace {

InjectionProfile make_injection(const json& j, const Eigen::VectorXd& p0) {
  const int n = static_cast<int>(p0.size());
  InjectionProfile prof;
  const std::string kind = j.value("kind", "none");

  std::vector<char> affected(n, 0);
  if (j.contains("nodes")) {
    for (int id : j.at("nodes").get<std::vector<int>>()) {
      if (id < 1 || id > n) throw std::invalid_argument("disturbance: node id out of range");
      affected[id - 1] = 1;
    }
  } else {
    for (int i = 0; i < n; ++i) affected[i] = 1;
  }

  if (kind == "none") {
    prof.evaluate = [p0](double) { return p0; };
    prof.t_bar = 0.0;
    prof.p_star = p0;
  } else if (kind == "ramp-hold") {
    const double amp = j.value("amplitude", 0.2);
    const double ramp = j.value("ramp", 25.0);
    const double hold_until = j.value("hold_until", 125.0);
    const double end = j.value("end", 150.0);
    auto delta = [=](double t) -> double {
      if (t < 0.0) return 0.0;
      if (t <= ramp) return amp * std::sin(M_PI * t / (2.0 * ramp));
      if (t <= hold_until) return amp;
      if (t <= end) return amp * std::sin(M_PI * (t - (hold_until - ramp)) / (2.0 * ramp));
      return 0.0;
    };
    prof.evaluate = [p0, affected, delta](double t) {
      Eigen::VectorXd p = p0;
      const double d = delta(t);
      if (d != 0.0) {
        for (int i = 0; i < p.size(); ++i) {
          if (affected[i]) p(i) += d * p0(i);
        }
      }
      return p;
    };
    prof.t_bar = end;
    prof.p_star = p0;
  } else if (kind == "piecewise") {
    const auto times = j.at("times").get<std::vector<double>>();
    const auto deltas = j.at("deltas").get<std::vector<double>>();
    if (times.size() != deltas.size() || times.empty()) {
      throw std::invalid_argument("disturbance: times/deltas size mismatch");
    }
    for (size_t i = 1; i < times.size(); ++i) {
      if (times[i] <= times[i - 1]) {
        throw std::invalid_argument("disturbance: times must be increasing");
      }
    }
    auto delta = [times, deltas](double t) -> double {
      if (t <= times.front()) return deltas.front();
      if (t >= times.back()) return deltas.back();
      size_t k = 1;
      while (times[k] < t) ++k;
      const double u = (t - times[k - 1]) / (times[k] - times[k - 1]);
      return deltas[k - 1] + u * (deltas[k] - deltas[k - 1]);
    };
    prof.evaluate = [p0, affected, delta](double t) {
      Eigen::VectorXd p = p0;
      const double d = delta(t);
      for (int i = 0; i < p.size(); ++i) {
        if (affected[i]) p(i) += d * p0(i);
      }
      return p;
    };
    prof.t_bar = times.back();
    Eigen::VectorXd ps = p0;
    for (int i = 0; i < n; ++i) {
      if (affected[i]) ps(i) += deltas.back() * p0(i);
    }
    prof.p_star = ps;
  } else {
    throw std::invalid_argument("disturbance: unknown kind '" + kind + "'");
  }
  return prof;
}

}  // namespace

LoadedScenario load_scenario(const std::string& path) {
  const json j = read_json(path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  LoadedScenario out;
  const std::string netpath = (base / j.at("network").get<std::string>()).string();
  out.network = load_network(netpath);
  out.base_injection = load_base_injections(netpath, out.network);
  const NetworkModel& net = out.network;
  const int n = net.node_count;

  Scenario& sc = out.scenario;
  sc.horizon = j.value("horizon", 200.0);
  sc.step = j.value("step", 1e-3);
  sc.enable_at = j.value("enable_at", 0.0);
  sc.record_stride = j.value("record_stride", 10);

  if (j.contains("partition")) {
    const json& pj = j.at("partition");
    if (pj.is_string()) {
      sc.region_node_ids = load_partition_file((base / pj.get<std::string>()).string());
    } else {
      sc.region_node_ids = pj.at("regions").get<std::vector<std::vector<int>>>();
    }
  }

  const size_t region_count = sc.region_node_ids.empty() ? 1 : sc.region_node_ids.size();
  if (j.contains("schedules")) {
    const json& sj = j.at("schedules");
    if (sj.is_array()) {
      for (const json& one : sj) {
        sc.schedules.push_back({one.value("period", 1.0), one.value("offset", 0.0)});
      }
    } else {
      sc.schedules.assign(region_count,
                          {sj.value("period", 1.0), sj.value("offset", 0.0)});
    }
  } else {
    sc.schedules.assign(region_count, SamplingSchedule{});
  }

  const json mj = j.value("mpc", json::object());
  sc.mpc.horizon = mj.value("horizon", 2.0);
  sc.mpc.step = mj.value("step", 0.02);
  sc.mpc.penalty_d = mj.value("penalty_d", 100.0);
  sc.mpc.epsilon = per_node(mj, "epsilon", 1.9, n);
  sc.mpc.filter_time = per_node(mj, "filter_time", 0.5, n);
  Eigen::VectorXd weight =
      Eigen::VectorXd::Constant(n, mj.value("weight_other", 1.0));
  for (int i : net.monitored) weight(i) = mj.value("weight_monitored", 4.0);
  if (mj.contains("weights")) {
    const Eigen::VectorXd w = per_node(mj, "weights", 1.0, n);
    weight = w;
  }
  sc.mpc.weight = weight;
  if (mj.contains("region_penalty")) {
    sc.region_penalty = mj.at("region_penalty").get<std::vector<double>>();
  }

  const json sj = j.value("safety", json::object());
  const double bound = sj.value("bound", 0.2);
  const double thr = sj.value("threshold", 0.1);
  const double gamma = sj.value("gamma", 1.0);
  sc.safety.omega_min = per_node(sj, "omega_min", -bound, n);
  sc.safety.omega_max = per_node(sj, "omega_max", bound, n);
  sc.safety.thr_min = per_node(sj, "thr_min", -thr, n);
  sc.safety.thr_max = per_node(sj, "thr_max", thr, n);
  sc.safety.gamma_lower = per_node(sj, "gamma_lower", gamma, n);
  sc.safety.gamma_upper = per_node(sj, "gamma_upper", gamma, n);
  sc.mpc.omega_min = sc.safety.omega_min;
  sc.mpc.omega_max = sc.safety.omega_max;

  sc.injection = make_injection(j.value("disturbance", json::object()), out.base_injection);

  if (j.contains("initial")) {
    const json& ij = j.at("initial");
    sc.initial.omega = per_node(ij, "omega", 0.0, n);
    sc.initial.alpha_mpc = per_node(ij, "alpha_mpc", 0.0, n);
    if (ij.contains("flow")) {
      const auto fv = ij.at("flow").get<std::vector<double>>();
      if (static_cast<int>(fv.size()) != net.edge_count()) {
        throw std::invalid_argument("initial flow: dimension mismatch");
      }
      sc.initial.flow = Eigen::Map<const Eigen::VectorXd>(fv.data(), fv.size());
    } else {
      const Eigen::VectorXd p0 = sc.injection.evaluate(0.0);
      sc.initial.flow =
          equilibrium_flow(net, Eigen::VectorXd::Zero(net.edge_count()),
                           p0 - Eigen::VectorXd::Constant(n, p0.sum() / n));
    }
  }

  sc.validate(net);
  return out;
}

}  // namespace gridfreq
