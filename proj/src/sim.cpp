#include "gridfreq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace gridfreq {

namespace {

constexpr double kTimeTol = 1e-9;

std::uint64_t fnv1a(std::uint64_t hash, const double* data, int count) {
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(data);
  const size_t len = sizeof(double) * static_cast<size_t>(count);
  for (size_t i = 0; i < len; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

bool divides(double small, double big) {
  const double k = std::round(big / small);
  return std::abs(big - k * small) <= kTimeTol * std::max(1.0, std::abs(big));
}

}  // namespace

void Scenario::validate(const NetworkModel& net) const {
  injection.validate(net);
  safety.validate(net);
  if (step <= 0.0 || horizon <= 0.0) {
    throw std::invalid_argument("scenario: nonpositive step or horizon");
  }
  if (enable_at < 0.0) throw std::invalid_argument("scenario: negative enable time");
  if (record_stride < 1) throw std::invalid_argument("scenario: record stride < 1");
  mpc.validate(net);
  if (region_node_ids.empty()) {
    if (!schedules.empty() && schedules.size() != 1) {
      throw std::invalid_argument("scenario: schedules given without matching regions");
    }
  } else if (!schedules.empty() && schedules.size() != region_node_ids.size()) {
    throw std::invalid_argument("scenario: one schedule per region required");
  }
  for (const SamplingSchedule& sched : schedules) {
    if (sched.period <= 0.0) throw std::invalid_argument("scenario: nonpositive period");
    if (!divides(step, sched.period) || !divides(step, std::max(sched.offset, step))) {
      throw std::invalid_argument("scenario: integrator step must divide sampling grid");
    }
  }
}

double lyapunov(const NetworkModel& net, const SystemState& s, const Eigen::VectorXd& f_inf) {
  const Eigen::VectorXd df = s.flow - f_inf;
  return 0.5 * df.dot(net.susceptance.cwiseInverse().cwiseProduct(df)) +
         0.5 * s.omega.dot(net.inertia.cwiseProduct(s.omega)) +
         0.5 * s.alpha_mpc.squaredNorm();
}

SimTrace run_closed_loop(const NetworkModel& net, const Scenario& sc) {
  sc.validate(net);

  const int n = net.node_count;
  const int m = net.edge_count();
  const double h = sc.step;
  const long steps = std::llround(sc.horizon / h);
  if (std::abs(steps * h - sc.horizon) > kTimeTol * std::max(1.0, sc.horizon)) {
    throw std::invalid_argument("scenario: step does not divide horizon");
  }

  SystemState state;
  if (sc.initial.flow.size() == 0) {
    const Eigen::VectorXd p0 = sc.injection.evaluate(0.0);
    if (std::abs(p0.sum()) > 1e-9) {
      throw std::invalid_argument(
          "scenario: p(0) unbalanced, explicit initial state required");
    }
    state.flow = equilibrium_flow(net, Eigen::VectorXd::Zero(m), p0);
    state.omega = Eigen::VectorXd::Zero(n);
    state.alpha_mpc = Eigen::VectorXd::Zero(n);
  } else {
    state = sc.initial;
    if (state.flow.size() != m || state.omega.size() != n || state.alpha_mpc.size() != n) {
      throw std::invalid_argument("scenario: initial state dimension mismatch");
    }
  }

  // regions: operator partition, or the whole network as a single region
  std::vector<std::vector<int>> region_ids = sc.region_node_ids;
  if (region_ids.empty()) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i + 1;
    region_ids.push_back(all);
  }
  const Partition partition = validate_partition(net, region_ids);
  std::vector<SamplingSchedule> schedules = sc.schedules;
  if (schedules.empty()) schedules.assign(partition.regions.size(), SamplingSchedule{});

  DistributedController controller(net, partition, schedules, sc.mpc, sc.region_penalty);

  const Eigen::VectorXd f_inf = equilibrium_flow(net, state.flow, sc.injection.p_star);
  const Eigen::MatrixXd wd = net.weighted_incidence();
  const Eigen::MatrixXd dt = net.incidence.transpose();

  // trace allocation (strided rows plus the final grid point)
  const long stride = sc.record_stride;
  long rows = steps / stride + 1 + (steps % stride != 0 ? 1 : 0);
  SimTrace trace;
  trace.time.reserve(rows);
  trace.omega.resize(rows, n);
  trace.flow.resize(rows, m);
  trace.alpha.resize(rows, n);
  trace.alpha_mpc.resize(rows, n);
  trace.alpha_df.resize(rows, n);
  trace.u_mpc.resize(rows, n);
  trace.u_hat.resize(rows, n);
  trace.lyapunov.resize(rows);
  trace.sample_flag.reserve(rows);
  trace.f_inf = f_inf;

  SimMonitors& mon = trace.monitors;
  mon.omega_min = Eigen::VectorXd::Constant(n, 1e300);
  mon.omega_max = Eigen::VectorXd::Constant(n, -1e300);
  mon.weighted_cost = Eigen::VectorXd::Zero(n);
  mon.abs_alpha_int = Eigen::VectorXd::Zero(n);
  mon.abs_alpha_df_int = Eigen::VectorXd::Zero(n);
  mon.state_hash = 1469598103934665603ull;

  Eigen::VectorXd prev_cost = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd prev_abs_a = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd prev_abs_df = Eigen::VectorXd::Zero(n);
  double prev_V = 0.0;

  // stage evaluation buffers
  Eigen::VectorXd u_hat(n), alpha_df(n), alpha_total(n), net_flow(n);
  Eigen::VectorXd kf[4], kw[4], ka[4];
  for (auto& v : kf) v.resize(m);
  for (auto& v : kw) v.resize(n);
  for (auto& v : ka) v.resize(n);
  Eigen::VectorXd fs(m), ws(n), as(n);

  auto eval_controls = [&](double t, const Eigen::VectorXd& f, const Eigen::VectorXd& w,
                           const Eigen::VectorXd& a, bool on, Eigen::VectorXd& uh,
                           Eigen::VectorXd& adf) {
    uh.setZero();
    adf.setZero();
    if (!on) return;
    if (sc.bottom_layer_enabled) {
      const Eigen::VectorXd& u_hold = controller.u_mpc();
      for (int i : net.controlled) {
        const double band = sc.mpc.epsilon(i) * std::abs(a(i));
        uh(i) = std::clamp(u_hold(i), -band, band);
      }
    }
    if (sc.top_layer_enabled) {
      net_flow.noalias() = dt * f;
      const Eigen::VectorXd p = sc.injection.evaluate(t);
      for (int i : net.monitored) {
        const double wi = w(i);
        if (wi >= sc.safety.thr_min(i) && wi <= sc.safety.thr_max(i)) continue;
        const double v = net.damping(i) * wi + net_flow(i) - p(i) - a(i);
        if (wi > sc.safety.thr_max(i)) {
          double barrier = sc.safety.gamma_upper(i) * (sc.safety.omega_max(i) - wi) /
                           (wi - sc.safety.thr_max(i));
          barrier = std::min(barrier, 1e12);
          adf(i) = std::min(0.0, barrier + v);
        } else {
          double barrier = sc.safety.gamma_lower(i) * (sc.safety.omega_min(i) - wi) /
                           (sc.safety.thr_min(i) - wi);
          barrier = std::max(barrier, -1e12);
          adf(i) = std::max(0.0, barrier + v);
        }
      }
    }
  };

  auto stage = [&](double t, const Eigen::VectorXd& f, const Eigen::VectorXd& w,
                   const Eigen::VectorXd& a, bool on, Eigen::VectorXd& df_out,
                   Eigen::VectorXd& dw_out, Eigen::VectorXd& da_out) {
    eval_controls(t, f, w, a, on, u_hat, alpha_df);
    const Eigen::VectorXd p = sc.injection.evaluate(t);
    alpha_total = a + alpha_df;
    df_out.noalias() = wd * w;
    net_flow.noalias() = dt * f;  // reuse buffer
    dw_out = (-net.damping.cwiseProduct(w) - net_flow + p + alpha_total)
                 .cwiseQuotient(net.inertia);
    da_out.setZero();
    if (on && sc.bottom_layer_enabled) {
      for (int i : net.controlled) {
        da_out(i) = -a(i) / sc.mpc.filter_time(i) - w(i) + u_hat(i);
      }
    }
  };

  long row = 0;
  for (long k = 0; k <= steps; ++k) {
    const double t = k * h;
    const bool on = sc.controller_enabled && t >= sc.enable_at - kTimeTol;

    int sampled = 0;
    if (on && sc.bottom_layer_enabled) {
      sampled = controller.update(t, state, sc.injection, sc.parallel_regions,
                                  sc.max_threads);
    }

    eval_controls(t, state.flow, state.omega, state.alpha_mpc, on, u_hat, alpha_df);
    alpha_total = state.alpha_mpc + alpha_df;
    const double V = lyapunov(net, state, f_inf);

    // full-resolution monitors
    mon.omega_min = mon.omega_min.cwiseMin(state.omega);
    mon.omega_max = mon.omega_max.cwiseMax(state.omega);
    for (int i : net.controlled) {
      const double band = sc.mpc.epsilon(i) * std::abs(state.alpha_mpc(i));
      if (state.alpha_mpc(i) * u_hat(i) > band * std::abs(state.alpha_mpc(i))) {
        ++mon.cond9_violations;
      }
    }
    for (int i : net.monitored) {
      if (state.omega(i) * alpha_df(i) > 0.0) ++mon.dissipativity_violations;
    }
    if (k > 0) mon.max_dV = std::max(mon.max_dV, V - prev_V);
    prev_V = V;
    mon.state_hash = fnv1a(mon.state_hash, state.flow.data(), m);
    mon.state_hash = fnv1a(mon.state_hash, state.omega.data(), n);
    mon.state_hash = fnv1a(mon.state_hash, state.alpha_mpc.data(), n);

    Eigen::VectorXd cost_now(n), abs_a_now(n), abs_df_now(n);
    for (int i = 0; i < n; ++i) {
      cost_now(i) = sc.mpc.weight(i) * alpha_total(i) * alpha_total(i);
      abs_a_now(i) = std::abs(alpha_total(i));
      abs_df_now(i) = std::abs(alpha_df(i));
    }
    if (k > 0) {
      mon.weighted_cost += 0.5 * h * (prev_cost + cost_now);
      mon.abs_alpha_int += 0.5 * h * (prev_abs_a + abs_a_now);
      mon.abs_alpha_df_int += 0.5 * h * (prev_abs_df + abs_df_now);
    }
    prev_cost = cost_now;
    prev_abs_a = abs_a_now;
    prev_abs_df = abs_df_now;

    if (k % stride == 0 || k == steps) {
      trace.time.push_back(t);
      trace.omega.row(row) = state.omega;
      trace.flow.row(row) = state.flow;
      trace.alpha.row(row) = alpha_total;
      trace.alpha_mpc.row(row) = state.alpha_mpc;
      trace.alpha_df.row(row) = alpha_df;
      trace.u_mpc.row(row) = controller.u_mpc();
      trace.u_hat.row(row) = u_hat;
      trace.lyapunov(row) = V;
      trace.sample_flag.push_back(sampled > 0 ? 1 : 0);
      ++row;
    }
    if (k == steps) break;

    // RK4 with the sampled MPC output held; filter and direct feedback
    // re-evaluated from stage states
    stage(t, state.flow, state.omega, state.alpha_mpc, on, kf[0], kw[0], ka[0]);
    fs = state.flow + 0.5 * h * kf[0];
    ws = state.omega + 0.5 * h * kw[0];
    as = state.alpha_mpc + 0.5 * h * ka[0];
    stage(t + 0.5 * h, fs, ws, as, on, kf[1], kw[1], ka[1]);
    fs = state.flow + 0.5 * h * kf[1];
    ws = state.omega + 0.5 * h * kw[1];
    as = state.alpha_mpc + 0.5 * h * ka[1];
    stage(t + 0.5 * h, fs, ws, as, on, kf[2], kw[2], ka[2]);
    fs = state.flow + h * kf[2];
    ws = state.omega + h * kw[2];
    as = state.alpha_mpc + h * ka[2];
    stage(t + h, fs, ws, as, on, kf[3], kw[3], ka[3]);

    state.flow += (h / 6.0) * (kf[0] + 2.0 * kf[1] + 2.0 * kf[2] + kf[3]);
    state.omega += (h / 6.0) * (kw[0] + 2.0 * kw[1] + 2.0 * kw[2] + kw[3]);
    state.alpha_mpc += (h / 6.0) * (ka[0] + 2.0 * ka[1] + 2.0 * ka[2] + ka[3]);

    if (!state.flow.allFinite() || !state.omega.allFinite() ||
        !state.alpha_mpc.allFinite()) {
      int bad = -1;
      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(state.omega(i))) {
          bad = i + 1;
          break;
        }
      }
      throw std::runtime_error("simulation: nonfinite state at t=" + std::to_string(t + h) +
                               (bad > 0 ? " node " + std::to_string(bad) : ""));
    }
  }
  return trace;
}

double control_cost(const SimTrace& trace, const Eigen::VectorXd& weight, double t0,
                    double t1) {
  if (trace.rows() < 2) throw std::invalid_argument("control_cost: trace too short");
  if (t1 <= t0) throw std::invalid_argument("control_cost: empty window");
  double J = 0.0;
  for (int r = 0; r + 1 < trace.rows(); ++r) {
    const double ta = trace.time[r];
    const double tb = trace.time[r + 1];
    if (tb <= t0 + kTimeTol || ta >= t1 - kTimeTol) continue;
    double ga = 0.0, gb = 0.0;
    for (int i = 0; i < trace.alpha.cols(); ++i) {
      ga += weight(i) * trace.alpha(r, i) * trace.alpha(r, i);
      gb += weight(i) * trace.alpha(r + 1, i) * trace.alpha(r + 1, i);
    }
    J += 0.5 * (tb - ta) * (ga + gb);
  }
  return J;
}

std::map<int, SafetyReportEntry> safety_report(const SimTrace& trace, const NetworkModel& net,
                                               const SafetySpec& spec, double t_start) {
  std::map<int, SafetyReportEntry> report;
  for (int i : net.monitored) {
    SafetyReportEntry entry;
    for (int r = 0; r < trace.rows(); ++r) {
      if (trace.time[r] < t_start - kTimeTol) continue;
      const double w = trace.omega(r, i);
      const bool inside = w >= spec.omega_min(i) && w <= spec.omega_max(i);
      if (!entry.entered) {
        if (inside) {
          entry.entered = true;
          entry.entry_time = trace.time[r];
        }
      } else if (!inside) {
        ++entry.post_entry_violations;
      }
    }
    entry.invariance_held = entry.entered && entry.post_entry_violations == 0;
    report[i + 1] = entry;
  }
  return report;
}

void write_trace_csv(const SimTrace& trace, const NetworkModel& net, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open trace file " + path);
  std::fprintf(f, "t");
  for (int i = 0; i < net.node_count; ++i) std::fprintf(f, ",omega_%d", i + 1);
  for (const Edge& e : net.edges) std::fprintf(f, ",f_%d_%d", e.from, e.to);
  for (int i = 0; i < net.node_count; ++i) std::fprintf(f, ",alpha_%d", i + 1);
  for (int i = 0; i < net.node_count; ++i) std::fprintf(f, ",alpha_mpc_%d", i + 1);
  for (int i = 0; i < net.node_count; ++i) std::fprintf(f, ",alpha_df_%d", i + 1);
  for (int i = 0; i < net.node_count; ++i) std::fprintf(f, ",u_mpc_%d", i + 1);
  std::fprintf(f, ",V\n");
  for (int r = 0; r < trace.rows(); ++r) {
    std::fprintf(f, "%.9g", trace.time[r]);
    for (int i = 0; i < trace.omega.cols(); ++i) std::fprintf(f, ",%.9g", trace.omega(r, i));
    for (int i = 0; i < trace.flow.cols(); ++i) std::fprintf(f, ",%.9g", trace.flow(r, i));
    for (int i = 0; i < trace.alpha.cols(); ++i) std::fprintf(f, ",%.9g", trace.alpha(r, i));
    for (int i = 0; i < trace.alpha_mpc.cols(); ++i) {
      std::fprintf(f, ",%.9g", trace.alpha_mpc(r, i));
    }
    for (int i = 0; i < trace.alpha_df.cols(); ++i) {
      std::fprintf(f, ",%.9g", trace.alpha_df(r, i));
    }
    for (int i = 0; i < trace.u_mpc.cols(); ++i) std::fprintf(f, ",%.9g", trace.u_mpc(r, i));
    std::fprintf(f, ",%.9g\n", trace.lyapunov(r));
  }
  std::fclose(f);
}

}  // namespace gridfreq
