#pragma once

#include "etfc/dynamics.hpp"
#include "etfc/metrics.hpp"
#include "etfc/trigger.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace etfc {

enum class TriggerMode { kEvent, kPeriodic };

// Who recomputes after a broadcast lands.
//
// kTriggeredAgents: only agents that triggered rebuild their input; everyone
// else holds theirs through neighbors' broadcasts. This is the per-agent
// zero-order hold the experiments use, and it reproduces the published
// trigger counts; the swarm centroid drifts slightly because stale holds
// break the pairwise cancellation of edge terms.
//
// kNeighborhood: a broadcast refreshes the input of every agent whose law
// references it, keeping the stacked control consistent with the broadcast
// table at all times. This is the closed loop the stability and
// centroid-invariance analysis covers; the centroid is conserved to
// floating-point. Inputs still change only at broadcast instants.
enum class ControlRefresh { kTriggeredAgents, kNeighborhood };

struct SimConfig {
  std::string name = "custom";
  FormationSpec spec;
  Eigen::MatrixXd initial_positions;     // n x D; handle points in unicycle mode
  std::vector<double> initial_headings;  // unicycle only; empty means all zero
  ControllerParams controller;
  PlantConfig plant;
  TriggerMode trigger_mode = TriggerMode::kEvent;
  int period = 1;  // periodic mode, in steps
  ControlRefresh control_refresh = ControlRefresh::kTriggeredAgents;
  double horizon = 100.0;
  int record_stride = 1;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(initial_positions.cols()); }

  // Integer step count; a trailing partial step is dropped.
  std::int64_t steps() const {
    return static_cast<std::int64_t>(std::floor(horizon / plant.dt + 1e-6));
  }
};

struct DivergenceError : std::runtime_error {
  DivergenceError(double t, const std::string& msg) : std::runtime_error(msg), time(t) {}
  double time;
};

// Everything one run produces. Series are sampled every record_stride steps
// plus one final sample; counters and scalars cover the whole run. Controls
// are piecewise constant: agent i's input changes only at steps where i or
// one of its neighbors broadcast, and is bit-identical in between.
struct SimTrace {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> positions;
  std::vector<Eigen::MatrixXd> controls;
  std::vector<Eigen::VectorXd> e_norms;
  std::vector<std::vector<int>> conditions;  // per sample, per agent; -1 = none
  std::vector<double> F_series;
  std::vector<double> V_series;

  std::vector<TriggerRecord> events;
  std::vector<std::int64_t> tau1;
  std::vector<std::int64_t> tau2;
  std::vector<std::int64_t> periodic;

  Eigen::MatrixXd final_positions;
  double f_initial = 0.0, f_final = 0.0;
  double v_initial = 0.0, v_final = 0.0;
  bool saturation = false;
  double centroid_drift = 0.0;  // max over the run (m)
  std::int64_t v_increase_steps = 0;
  std::int64_t total_steps = 0;
  double dt = 0.0;
  double horizon_simulated = 0.0;  // steps * dt
  Eigen::VectorXd displacement;    // per-agent path length (m)
  std::vector<std::string> warnings;
  double wall_time_s = 0.0;
};

inline int condition_code(TriggerCondition c) {
  switch (c) {
    case TriggerCondition::kInitial: return 0;
    case TriggerCondition::kCondition1: return 1;
    case TriggerCondition::kCondition2: return 2;
    case TriggerCondition::kPeriodic: return 3;
  }
  return -1;
}

inline void validate_config(const SimConfig& cfg) {
  const int n = cfg.spec.graph.node_count();
  if (cfg.initial_positions.rows() != n)
    throw std::invalid_argument("engine: initial position count does not match agent count");
  const int dim = cfg.dim();
  if (dim != 2 && dim != 3) throw std::invalid_argument("engine: dimension must be 2 or 3");
  if (!cfg.initial_positions.allFinite())
    throw std::invalid_argument("engine: initial positions must be finite");
  if (cfg.spec.graph.edge_count() == 0) throw std::invalid_argument("engine: graph has no edges");
  for (int i = 0; i < n; ++i)
    if (cfg.spec.graph.degree(i) == 0)
      throw std::invalid_argument("engine: agent without neighbors");
  cfg.plant.validate();
  if (cfg.plant.model == PlantModel::kUnicycle) {
    if (dim != 2) throw std::invalid_argument("engine: unicycle mode requires 2-D positions");
    if (!cfg.initial_headings.empty() &&
        static_cast<int>(cfg.initial_headings.size()) != n)
      throw std::invalid_argument("engine: heading count does not match agent count");
  }
  cfg.controller.validate(cfg.spec);
  if (cfg.controller.A.cols() != dim)
    throw std::invalid_argument("engine: A column count does not match dimension");
  if (!(cfg.horizon > 0.0)) throw std::invalid_argument("engine: horizon must be positive");
  if (cfg.record_stride < 1) throw std::invalid_argument("engine: record stride must be >= 1");
  if (cfg.trigger_mode == TriggerMode::kPeriodic && cfg.period < 1)
    throw std::invalid_argument("engine: period must be >= 1");
  if (cfg.steps() < 1) throw std::invalid_argument("engine: horizon shorter than one step");
}

// Deterministic closed-loop run. Per step: evaluate the trigger policy on a
// snapshot of true positions, let every flagged agent broadcast before any
// control is recomputed (so simultaneous triggers resolve order-free), then
// advance the plant under the held inputs. See ControlRefresh for who
// recomputes.
inline SimTrace run(const SimConfig& cfg) {
  validate_config(cfg);
  const auto t_start = std::chrono::steady_clock::now();

  const int n = cfg.spec.graph.node_count();
  const int dim = cfg.dim();
  const auto& spec = cfg.spec;
  const auto& params = cfg.controller;
  const double dt = cfg.plant.dt;
  const std::int64_t steps = cfg.steps();
  const bool unicycle = cfg.plant.model == PlantModel::kUnicycle;

  SimTrace tr;
  tr.dt = dt;
  tr.total_steps = steps;
  tr.horizon_simulated = static_cast<double>(steps) * dt;
  tr.displacement = Eigen::VectorXd::Zero(n);
  if (!spec.graph.is_connected())
    tr.warnings.push_back("communication graph is not connected");
  if (!is_rigid(spec.graph, cfg.initial_positions))
    tr.warnings.push_back(
        "communication graph is not rigid at the initial placement; "
        "convergence to the exact shape is not guaranteed");

  Eigen::MatrixXd pos = cfg.initial_positions;
  std::vector<UnicyclePose> poses;
  if (unicycle) {
    poses.resize(n);
    for (int i = 0; i < n; ++i) {
      const double theta =
          cfg.initial_headings.empty() ? 0.0 : wrap_angle(cfg.initial_headings[i]);
      poses[i] = {pos(i, 0) - cfg.plant.ell * std::cos(theta),
                  pos(i, 1) - cfg.plant.ell * std::sin(theta), theta};
    }
  }

  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, dim);
  BroadcastTable bt = BroadcastTable::init(pos, 0.0);
  TriggerState ts = TriggerState::init(n, dim);
  const Eigen::RowVectorXd centroid0 = centroid(pos);

  tr.f_initial = formation_error(spec, pos);
  tr.v_initial = lyapunov(spec, params, pos);
  double v_prev = tr.v_initial;

  const PeriodicPolicy policy = periodic_policy(cfg.period);

  auto record_sample = [&](double t, double f, double v, const std::vector<int>& conds) {
    tr.times.push_back(t);
    tr.positions.push_back(pos);
    tr.controls.push_back(u);
    tr.e_norms.push_back((bt.last_pos - pos).rowwise().norm());
    tr.conditions.push_back(conds);
    tr.F_series.push_back(f);
    tr.V_series.push_back(v);
  };

  for (std::int64_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;

    std::vector<EventHit> hits;
    if (cfg.trigger_mode == TriggerMode::kPeriodic) {
      if (policy.fires(k))
        for (int i = 0; i < n; ++i) hits.push_back({i, TriggerCondition::kPeriodic, 0.0, 0.0});
    } else if (k == 0) {
      for (int i = 0; i < n; ++i) hits.push_back({i, TriggerCondition::kInitial, 0.0, 0.0});
    } else {
      hits = check_events(spec, params, pos, bt);
    }

    // All broadcasts land before any control recomputation.
    for (const EventHit& h : hits) {
      bt.last_pos.row(h.agent) = pos.row(h.agent);
      bt.last_time(h.agent) = t;
      switch (h.condition) {
        case TriggerCondition::kCondition1: ++ts.tau1[h.agent]; break;
        case TriggerCondition::kCondition2: ++ts.tau2[h.agent]; break;
        case TriggerCondition::kPeriodic: ++ts.periodic[h.agent]; break;
        case TriggerCondition::kInitial: break;  // not counted
      }
      ts.log.push_back({h.agent, t, h.condition, h.lhs, h.threshold});
    }
    if (cfg.control_refresh == ControlRefresh::kTriggeredAgents) {
      for (const EventHit& h : hits) u.row(h.agent) = control_input(spec, params, h.agent, bt);
    } else if (!hits.empty()) {
      // Recomputing every row is bit-identical to refreshing only the
      // broadcasters' neighborhoods: rows without fresh inputs reproduce
      // their held bits.
      u = stacked_control(spec, params, bt);
    }
    ts.e = bt.last_pos - pos;

    if (!tr.saturation && exceeds_velocity_bound(u, cfg.plant.v_max)) tr.saturation = true;

    const double f_k = k == 0 ? tr.f_initial : formation_error(spec, pos);
    const double v_k = k == 0 ? tr.v_initial : lyapunov(spec, params, pos);
    if (k > 0) {
      if (v_k > v_prev) ++tr.v_increase_steps;
      v_prev = v_k;
    }

    if (k % cfg.record_stride == 0) {
      std::vector<int> conds(n, -1);
      for (const EventHit& h : hits) conds[h.agent] = condition_code(h.condition);
      record_sample(t, f_k, v_k, conds);
    }

    // Plant step under held inputs.
    if (!unicycle) {
      const Eigen::MatrixXd stepped = si_step(pos, u, dt);
      tr.displacement += (stepped - pos).rowwise().norm();
      pos = stepped;
    } else {
      for (int i = 0; i < n; ++i) {
        const UniCommand cmd = si_to_uni(u.row(i), poses[i], cfg.plant.ell);
        if (cmd.v == 0.0 && cmd.omega == 0.0) continue;  // exact rest stays put
        const UnicyclePose next = uni_step(poses[i], cmd.v, cmd.omega, dt);
        const Eigen::RowVector2d handle = ell_point(next, cfg.plant.ell);
        tr.displacement(i) += (handle - pos.row(i)).norm();
        poses[i] = next;
        pos.row(i) = handle;
      }
    }

    const double drift = (centroid(pos) - centroid0).norm();
    if (drift > tr.centroid_drift) tr.centroid_drift = drift;
    if (!pos.allFinite() || pos.cwiseAbs().maxCoeff() > 1e12)
      throw DivergenceError(t + dt, "engine: state diverged at t = " + std::to_string(t + dt));
  }

  const double t_end = static_cast<double>(steps) * dt;
  tr.f_final = formation_error(spec, pos);
  tr.v_final = lyapunov(spec, params, pos);
  if (tr.v_final > v_prev) ++tr.v_increase_steps;
  record_sample(t_end, tr.f_final, tr.v_final, std::vector<int>(n, -1));

  tr.final_positions = pos;
  tr.events = std::move(ts.log);
  tr.tau1 = std::move(ts.tau1);
  tr.tau2 = std::move(ts.tau2);
  tr.periodic = std::move(ts.periodic);
  tr.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return tr;
}

inline double tau_average(const SimTrace& tr, int k) {
  if (k != 1 && k != 2) throw std::invalid_argument("tau_average: k must be 1 or 2");
  return tau_average(k == 1 ? tr.tau1 : tr.tau2);
}

inline RunSummary summarize(const SimConfig& cfg, const SimTrace& tr) {
  RunSummary s;
  s.scenario = cfg.name;
  s.trigger = cfg.trigger_mode == TriggerMode::kEvent ? "event" : "periodic";
  s.n = cfg.spec.graph.node_count();
  s.dim = cfg.dim();
  s.dt = tr.dt;
  s.steps = tr.total_steps;
  s.horizon = tr.horizon_simulated;
  s.tau1_avg = tau_average(tr.tau1);
  s.tau2_avg = tau_average(tr.tau2);
  s.periodic_avg = tau_average(tr.periodic);
  s.total_updates_avg = cfg.trigger_mode == TriggerMode::kEvent
                            ? s.tau1_avg + s.tau2_avg
                            : s.periodic_avg;
  s.f_initial = tr.f_initial;
  s.f_final = tr.f_final;
  s.v_initial = tr.v_initial;
  s.v_final = tr.v_final;
  s.saturation = tr.saturation;
  s.centroid_drift = tr.centroid_drift;
  s.v_descent_fraction =
      tr.total_steps > 0
          ? 1.0 - static_cast<double>(tr.v_increase_steps) / static_cast<double>(tr.total_steps)
          : 1.0;
  s.wall_time_s = tr.wall_time_s;
  return s;
}

}  // namespace etfc
