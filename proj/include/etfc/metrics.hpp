#pragma once

#include "etfc/controller.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace etfc {

// Average normalized distance error over each agent's neighborhood, then over
// agents. Zero exactly at the desired formation; invariant to rigid motions.
inline double formation_error(const FormationSpec& spec, const Eigen::MatrixXd& pos) {
  const int n = spec.graph.node_count();
  const double d2 = spec.delta_max * spec.delta_max;
  if (!(d2 > 0.0)) throw std::invalid_argument("formation_error: delta_max must be positive");
  Eigen::VectorXd per_agent = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < spec.graph.edge_count(); ++k) {
    const auto& e = spec.graph.edges()[k];
    const double err =
        std::abs(((pos.row(e.b) - pos.row(e.a)).squaredNorm() - spec.desired_sq[k]) / d2);
    per_agent(e.a) += err;
    per_agent(e.b) += err;
  }
  double f = 0.0;
  for (int i = 0; i < n; ++i) {
    const int deg = spec.graph.degree(i);
    if (deg == 0) throw std::domain_error("formation_error: agent without neighbors");
    f += per_agent(i) / deg;
  }
  return f / n;
}

inline double tau_average(const std::vector<std::int64_t>& counts) {
  if (counts.empty()) throw std::invalid_argument("tau_average: no agents");
  double sum = 0.0;
  for (const auto c : counts) sum += static_cast<double>(c);
  return sum / static_cast<double>(counts.size());
}

// Flat per-run result record; serialized as key=value lines.
struct RunSummary {
  std::string scenario;
  std::string trigger;  // "event" or "periodic"
  int n = 0;
  int dim = 0;
  double dt = 0.0;
  std::int64_t steps = 0;
  double horizon = 0.0;
  double tau1_avg = 0.0;
  double tau2_avg = 0.0;
  double periodic_avg = 0.0;
  double total_updates_avg = 0.0;
  double f_initial = 0.0;
  double f_final = 0.0;
  double v_initial = 0.0;
  double v_final = 0.0;
  bool saturation = false;
  double centroid_drift = 0.0;
  double v_descent_fraction = 0.0;
  double wall_time_s = 0.0;
};

struct ComparisonReport {
  double et_updates = 0.0;
  double pt_updates = 0.0;
  double update_reduction = 0.0;  // 1 - ET/PT
  double et_f_final = 0.0;
  double pt_f_final = 0.0;
};

// Event-triggered vs periodic side-by-side for one scenario.
inline ComparisonReport compare(const RunSummary& et, const RunSummary& pt) {
  if (et.scenario != pt.scenario || et.n != pt.n || et.dt != pt.dt || et.steps != pt.steps)
    throw std::invalid_argument("compare: runs come from different scenarios");
  if (et.trigger != "event" || pt.trigger != "periodic")
    throw std::invalid_argument("compare: expected one event and one periodic run");
  ComparisonReport r;
  r.et_updates = et.total_updates_avg;
  r.pt_updates = pt.total_updates_avg;
  r.update_reduction = pt.total_updates_avg > 0.0
                           ? 1.0 - et.total_updates_avg / pt.total_updates_avg
                           : 0.0;
  r.et_f_final = et.f_final;
  r.pt_f_final = pt.f_final;
  return r;
}

}  // namespace etfc
