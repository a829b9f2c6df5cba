#pragma once

#include "etfc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <vector>

namespace etfc {

enum class VTopology { kComplete, kCycle };

// Six agents leave a 0.9 m circle and form a vee: three slots per arm at
// 0.2 / 0.6 / 1.0 m from the (unoccupied) apex, arms opening 120 degrees.
// Slots walk one arm tip-to-apex then the other apex-to-tip, so cycle
// neighbors are also path neighbors in the vee. Runs the handle-point
// unicycle plant by default.
inline SimConfig scenario_v_formation(VTopology topology) {
  constexpr int n = 6;
  constexpr double pi = std::numbers::pi;
  const double arm_angle = pi / 3.0;  // each arm 60 degrees off the axis

  const double slot_dist[n] = {1.0, 0.6, 0.2, 0.2, 0.6, 1.0};
  const double slot_side[n] = {1.0, 1.0, 1.0, -1.0, -1.0, -1.0};
  Eigen::MatrixXd target(n, 2);
  for (int k = 0; k < n; ++k)
    target.row(k) << slot_dist[k] * std::cos(arm_angle),
        slot_side[k] * slot_dist[k] * std::sin(arm_angle);

  std::vector<std::pair<int, int>> pairs;
  if (topology == VTopology::kComplete) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    for (int k = 0; k < n; ++k) pairs.emplace_back(k, (k + 1) % n);
  }
  const Graph g = Graph::from_edges(n, pairs);

  SimConfig cfg;
  cfg.name = topology == VTopology::kComplete ? "v-complete" : "v-cycle";
  cfg.spec = FormationSpec::from_target_placement(g, target);

  const double radius = 0.9;
  cfg.initial_positions.resize(n, 2);
  cfg.initial_headings.resize(n);
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * pi * k / n;
    cfg.initial_positions.row(k) << radius * std::cos(phi), radius * std::sin(phi);
    cfg.initial_headings[k] = wrap_angle(phi + pi);  // face the circle center
  }

  cfg.controller.gain_mode = GainMode::kConstant;
  cfg.controller.alpha = topology == VTopology::kComplete ? 0.01 : 0.05;
  cfg.controller.A = ControllerParams::uniform_A(n, 2, 0.001);
  cfg.controller.sigma_scale = 0.5;
  cfg.controller.a_rule = {ARule::Kind::kScaled, 0.5};
  cfg.controller.b = 1.0;
  cfg.controller.c = 1.0;

  cfg.plant.model = PlantModel::kUnicycle;
  cfg.plant.dt = 100.0 / 3040.0;  // baseline cadence: 3040 updates over 100 s
  cfg.plant.ell = 0.05;
  cfg.plant.v_max = 0.2;

  cfg.trigger_mode = TriggerMode::kEvent;
  cfg.period = 1;
  cfg.horizon = 100.0;
  cfg.record_stride = 1;
  return cfg;
}

// Agents quasi-uniformly placed on a sphere; pairs within the communication
// radius are linked. Links that cross the equator plane want a 20 m
// separation, all other links keep their initial length. The placement is
// deterministic; the seed is carried through for provenance only.
inline SimConfig scenario_sphere(int n = 200, std::uint64_t seed = 0) {
  if (n < 2) throw std::invalid_argument("scenario_sphere: need at least two agents");
  constexpr double pi = std::numbers::pi;
  const double radius = 10.0;
  const double comm_radius = 5.0;
  const double split_distance = 20.0;

  Eigen::MatrixXd pos(n, 3);
  const double golden_angle = pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden_angle * k;
    pos.row(k) << radius * r * std::cos(a), radius * r * std::sin(a), radius * z;
  }

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((pos.row(j) - pos.row(i)).norm() <= comm_radius) pairs.emplace_back(i, j);
  const Graph g = Graph::from_edges(n, pairs);

  SimConfig cfg;
  cfg.name = "sphere";
  // Same-hemisphere links keep their exact initial squared length, so agents
  // untouched by the separation hold a bit-exact zero control; cross links
  // are overridden to the split distance.
  cfg.spec = FormationSpec::from_target_placement(g, pos);
  for (int k = 0; k < g.edge_count(); ++k) {
    const auto& e = g.edges()[k];
    if (pos(e.a, 2) * pos(e.b, 2) < 0.0) {
      cfg.spec.desired_dist[k] = split_distance;
      cfg.spec.desired_sq[k] = split_distance * split_distance;
    }
  }
  cfg.spec.delta_max = *std::max_element(cfg.spec.desired_dist.begin(),
                                         cfg.spec.desired_dist.end());
  cfg.initial_positions = pos;

  cfg.controller.gain_mode = GainMode::kConstant;
  cfg.controller.alpha = 0.00025;
  cfg.controller.A = ControllerParams::uniform_A(n, 3, 0.001);
  cfg.controller.sigma_scale = 0.5;
  cfg.controller.a_rule = {ARule::Kind::kScaled, 0.5};
  cfg.controller.b = 1.0;
  cfg.controller.c = 1.0;

  cfg.plant.model = PlantModel::kSingleIntegrator;
  cfg.plant.dt = 0.05;

  cfg.trigger_mode = TriggerMode::kEvent;
  cfg.period = 1;
  cfg.horizon = 25.0;
  cfg.record_stride = 1;
  cfg.seed = seed;
  return cfg;
}

struct SweepCell {
  double alpha = 0.0;
  double A = 0.0;
  double f_final = 0.0;
  double triggers_total = 0.0;  // average tau1 + tau2 per agent
  bool saturated = false;
};

// Event-triggered grid over (alpha, A), rows by A then alpha. Cells run in
// parallel and land by grid index, so the table is deterministic.
inline std::vector<SweepCell> sweep(const SimConfig& base, const std::vector<double>& alphas,
                                    const std::vector<double>& As) {
  const int n = base.spec.graph.node_count();
  const int dim = base.dim();
  std::vector<SweepCell> cells;
  for (const double a_val : As)
    for (const double alpha : alphas) cells.push_back({alpha, a_val, 0.0, 0.0, false});

  auto run_cell = [&](SweepCell cell) {
    SimConfig cfg = base;
    cfg.trigger_mode = TriggerMode::kEvent;
    cfg.controller.alpha = cell.alpha;
    cfg.controller.A = ControllerParams::uniform_A(n, dim, cell.A);
    const SimTrace tr = run(cfg);
    cell.f_final = tr.f_final;
    cell.triggers_total = tau_average(tr.tau1) + tau_average(tr.tau2);
    cell.saturated = tr.saturation;
    return cell;
  };

  std::vector<std::future<SweepCell>> futures;
  futures.reserve(cells.size());
  for (const SweepCell& cell : cells)
    futures.push_back(std::async(std::launch::async, run_cell, cell));
  for (size_t i = 0; i < cells.size(); ++i) cells[i] = futures[i].get();
  return cells;
}

}  // namespace etfc
