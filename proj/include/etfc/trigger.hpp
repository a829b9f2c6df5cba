#pragma once

#include "etfc/controller.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace etfc {

// Floor below which the relative-error threshold denominator counts as
// degenerate, and the stand-in value assigned then. The degenerate case is an
// agent sitting at the origin with all desired distances met; it must not
// trigger on the relative-error condition.
inline constexpr double kDenominatorFloor = 1e-12;
inline constexpr double kBetaLarge = 1e9;

enum class TriggerCondition { kCondition1, kCondition2, kPeriodic, kInitial };

struct TriggerRecord {
  int agent = 0;
  double time = 0.0;
  TriggerCondition condition = TriggerCondition::kInitial;
  double lhs = 0.0;
  double threshold = 0.0;
};

// Per-agent measurement errors, event counters and the full event log.
// e_i is broadcast position minus true position; it is exactly zero right
// after agent i triggers. Counters only grow.
struct TriggerState {
  Eigen::MatrixXd e;
  std::vector<std::int64_t> tau1;
  std::vector<std::int64_t> tau2;
  std::vector<std::int64_t> periodic;
  std::vector<TriggerRecord> log;

  static TriggerState init(int n, int dim) {
    TriggerState ts;
    ts.e = Eigen::MatrixXd::Zero(n, dim);
    ts.tau1.assign(n, 0);
    ts.tau2.assign(n, 0);
    ts.periodic.assign(n, 0);
    return ts;
  }
};

// a_i * sum_j |D_ij| for the current state. Throws when a fixed rule violates
// the admissible range 0 < a_i < 1 / sum_j |D_ij|; with a zero sum the term
// vanishes and a_i is unconstrained.
inline double a_times_sum(const ARule& rule, double abs_D_sum) {
  if (!(abs_D_sum > 0.0)) return 0.0;
  if (rule.kind == ARule::Kind::kScaled) return rule.value;
  const double prod = rule.value * abs_D_sum;
  if (!(rule.value > 0.0) || !(prod < 1.0))
    throw std::domain_error("trigger: a_i outside (0, 1/sum|D_ij|)");
  return prod;
}

// Relative-error threshold scale for agent i. Degenerate denominators return
// kBetaLarge so the relative-error condition cannot fire.
inline double beta_i(const FormationSpec& spec, const ControllerParams& p, int i,
                     const NormalizedState& ns) {
  (void)spec;
  const double s = ns.abs_D_sum(i);
  const double z2 = ns.z.row(i).squaredNorm();
  const double x2 = ns.xbar.row(i).squaredNorm();
  const double num = (1.0 - a_times_sum(p.a_rule, s)) * z2 + p.sum_A(i);
  const double den = ns.dbar2_sum(i) * ((p.b + p.c) * z2 + x2 / p.b);
  if (den < kDenominatorFloor) return kBetaLarge;
  return std::sqrt(num / den + 1.0) - 1.0;
}

// Absolute-error threshold scale for agent i. With the default scaled a-rule
// the first term equals sum^2 / value (value = 1/2 gives 2 * sum^2).
inline double big_b_i(const FormationSpec& spec, const ControllerParams& p, int i,
                      const NormalizedState& ns, double beta) {
  (void)spec;
  const double s = ns.abs_D_sum(i);
  double first = 0.0;
  if (s > 0.0) {
    if (p.a_rule.kind == ARule::Kind::kScaled) {
      first = s * s / p.a_rule.value;
    } else {
      if (!(p.a_rule.value > 0.0) || !(p.a_rule.value * s < 1.0))
        throw std::domain_error("trigger: a_i outside (0, 1/sum|D_ij|)");
      first = s / p.a_rule.value;
    }
  }
  return first + (beta * beta + 2.0 * beta) * ns.dbar2_sum(i) / p.c;
}

struct EventHit {
  int agent = 0;
  TriggerCondition condition = TriggerCondition::kCondition1;
  double lhs = 0.0;
  double threshold = 0.0;
};

// Evaluate both event conditions for every agent on one snapshot of true
// positions. Measurement errors derive from the broadcast table. Condition 1
// (relative error against any neighbor) takes precedence when both fire.
// A zero error never fires. Pure: identical inputs give identical hits.
inline std::vector<EventHit> check_events(const FormationSpec& spec, const ControllerParams& p,
                                          const Eigen::MatrixXd& pos_true,
                                          const BroadcastTable& bt) {
  const int n = spec.graph.node_count();
  const NormalizedState ns = normalized_quantities(spec, pos_true);
  const Eigen::MatrixXd e = bt.last_pos - pos_true;
  std::vector<EventHit> hits;
  for (int i = 0; i < n; ++i) {
    if (spec.graph.degree(i) == 0) continue;
    const double beta = beta_i(spec, p, i, ns);
    bool fired = false;
    double worst_gap = 0.0, worst_lhs = 0.0, worst_thr = 0.0;
    for (const auto& [j, k] : spec.graph.neighbors(i)) {
      const double lhs = (e.row(j) - e.row(i)).norm();
      if (!(lhs > 0.0)) continue;
      const double dist = p.cond1_broadcast_distance
                              ? (bt.last_pos.row(j) - bt.last_pos.row(i)).norm()
                              : (pos_true.row(j) - pos_true.row(i)).norm();
      const double thr = beta * dist;
      if (lhs >= thr) {
        const double gap = lhs - thr;
        if (!fired || gap > worst_gap) {
          worst_gap = gap;
          worst_lhs = lhs;
          worst_thr = thr;
        }
        fired = true;
      }
    }
    if (fired) {
      hits.push_back({i, TriggerCondition::kCondition1, worst_lhs, worst_thr});
      continue;
    }
    const double lhs2 = e.row(i).squaredNorm();
    if (!(lhs2 > 0.0)) continue;
    const double bigb = big_b_i(spec, p, i, ns, beta);
    const double thr2 = p.sigma_for(i, spec.delta_max) * p.sum_A(i) / bigb;
    if (lhs2 >= thr2) hits.push_back({i, TriggerCondition::kCondition2, lhs2, thr2});
  }
  return hits;
}

// Fixed-cadence baseline: every agent updates whenever step % period == 0.
struct PeriodicPolicy {
  int period_steps = 1;
  bool fires(std::int64_t step) const { return step % period_steps == 0; }
  std::int64_t count(std::int64_t steps) const {
    return steps <= 0 ? 0 : (steps - 1) / period_steps + 1;
  }
};

inline PeriodicPolicy periodic_policy(int period_steps) {
  if (period_steps < 1) throw std::invalid_argument("trigger: period must be >= 1");
  return {period_steps};
}

}  // namespace etfc
