#pragma once

#include "etfc/formation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace etfc {

// Latest broadcast position and broadcast instant per agent. The control law
// only ever sees these, never the true states.
struct BroadcastTable {
  Eigen::MatrixXd last_pos;   // n x D (m)
  Eigen::VectorXd last_time;  // s

  static BroadcastTable init(const Eigen::MatrixXd& pos, double t = 0.0) {
    return {pos, Eigen::VectorXd::Constant(pos.rows(), t)};
  }
};

enum class GainMode { kConstant, kStateDependent };

// Rule producing the per-agent weight a_i used in the event thresholds.
// kScaled sets a_i = value / sum_j |D_ij| with value in (0,1), which keeps
// a_i inside its admissible range for any state. kFixed uses an absolute
// value that must be re-checked against the state-dependent bound
// 1 / sum_j |D_ij| at every evaluation.
struct ARule {
  enum class Kind { kScaled, kFixed };
  Kind kind = Kind::kScaled;
  double value = 0.5;
};

struct ControllerParams {
  GainMode gain_mode = GainMode::kConstant;
  double alpha = 0.01;  // velocity gain, constant mode (1/(m^2*s))
  double v_max = 0.2;   // state-dependent mode: velocity bound (m/s)
  double k_vel = 1.0;   // state-dependent mode: shaping constant (1/m)
  Eigen::MatrixXd A;    // n x D positive threshold offsets (dimensionless)
  Eigen::VectorXd sigma;     // per-agent absolute values (m^2); empty -> scaled
  double sigma_scale = 0.5;  // sigma_i = sigma_scale * delta_max^2 when sigma empty
  ARule a_rule;
  double b = 1.0;
  double c = 1.0;
  // Distance entering the relative-error threshold: true inter-agent
  // distance (the form the stability argument bounds) or the broadcast
  // distance the control law itself uses.
  bool cond1_broadcast_distance = false;

  double sigma_for(int i, double delta_max) const {
    return sigma.size() > 0 ? sigma(i) : sigma_scale * delta_max * delta_max;
  }

  double sum_A(int i) const { return A.row(i).sum(); }

  // Prefactor of the Lyapunov diagnostic: the constant gain, or a nominal
  // stand-in when the state-dependent gain is active (descent is only
  // claimed for the constant gain).
  double lyapunov_gain() const {
    return gain_mode == GainMode::kConstant ? alpha : v_max * k_vel;
  }

  static Eigen::MatrixXd uniform_A(int n, int dim, double value) {
    return Eigen::MatrixXd::Constant(n, dim, value);
  }

  void validate(const FormationSpec& spec) const {
    const int n = spec.graph.node_count();
    if (gain_mode == GainMode::kConstant && !(alpha > 0.0))
      throw std::invalid_argument("controller: alpha must be positive");
    if (gain_mode == GainMode::kStateDependent && (!(v_max > 0.0) || !(k_vel > 0.0)))
      throw std::invalid_argument("controller: v_max and k_vel must be positive");
    if (A.rows() != n) throw std::invalid_argument("controller: A row count mismatch");
    if ((A.array() <= 0.0).any())
      throw std::invalid_argument("controller: A entries must be positive");
    const double d2 = spec.delta_max * spec.delta_max;
    if (sigma.size() > 0) {
      if (sigma.size() != n) throw std::invalid_argument("controller: sigma length mismatch");
      for (int i = 0; i < n; ++i)
        if (!(sigma(i) > 0.0 && sigma(i) < d2))
          throw std::invalid_argument("controller: sigma_i must lie in (0, delta_max^2)");
    } else if (!(sigma_scale > 0.0 && sigma_scale < 1.0)) {
      throw std::invalid_argument("controller: sigma_scale must lie in (0,1)");
    }
    if (a_rule.kind == ARule::Kind::kScaled) {
      if (!(a_rule.value > 0.0 && a_rule.value < 1.0))
        throw std::invalid_argument("controller: scaled a-rule value must lie in (0,1)");
    } else if (!(a_rule.value > 0.0)) {
      throw std::invalid_argument("controller: fixed a-rule value must be positive");
    }
    if (!(b > 0.0) || !(c > 0.0))
      throw std::invalid_argument("controller: b and c must be positive");
  }
};

// Shared normalized quantities entering the event thresholds, computed from
// one position snapshot.
struct NormalizedState {
  double delta_max = 0.0;
  Eigen::MatrixXd xbar;       // pos / delta_max
  Eigen::MatrixXd z;          // weighted-Laplacian image of xbar / delta_max^2
  Eigen::VectorXd edge_D;     // (dist^2 - desired^2) / delta_max^2 per edge
  Eigen::VectorXd edge_dbar;  // dist / delta_max per edge
  Eigen::VectorXd abs_D_sum;  // per-agent sum_j |D_ij|
  Eigen::VectorXd dbar2_sum;  // per-agent sum_j dbar_ij^2
};

inline NormalizedState normalized_quantities(const FormationSpec& spec,
                                             const Eigen::MatrixXd& pos) {
  if (!(spec.delta_max > 0.0))
    throw std::invalid_argument("normalized_quantities: delta_max must be positive");
  const int n = spec.graph.node_count();
  const int m = spec.graph.edge_count();
  const double d = spec.delta_max;
  const double d2 = d * d;
  const double d3 = d2 * d;

  NormalizedState ns;
  ns.delta_max = d;
  ns.xbar = pos / d;
  ns.z = Eigen::MatrixXd::Zero(n, pos.cols());
  ns.edge_D.resize(m);
  ns.edge_dbar.resize(m);
  ns.abs_D_sum = Eigen::VectorXd::Zero(n);
  ns.dbar2_sum = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < m; ++k) {
    const auto& e = spec.graph.edges()[k];
    const Eigen::RowVectorXd diff = pos.row(e.a) - pos.row(e.b);
    const double dist2 = diff.squaredNorm();
    const double w = dist2 - spec.desired_sq[k];
    ns.edge_D(k) = w / d2;
    ns.edge_dbar(k) = std::sqrt(dist2) / d;
    ns.z.row(e.a) += (w / d3) * diff;
    ns.z.row(e.b) -= (w / d3) * diff;
    const double abs_d = std::abs(ns.edge_D(k));
    ns.abs_D_sum(e.a) += abs_d;
    ns.abs_D_sum(e.b) += abs_d;
    ns.dbar2_sum(e.a) += dist2 / d2;
    ns.dbar2_sum(e.b) += dist2 / d2;
  }
  return ns;
}

// Formation-weighted Laplacian: incidence * (W(x) - Wtilde) * incidence^T,
// edge weights dist^2 - desired^2. Zero exactly at the desired formation.
// The D-dimensional operator is this matrix applied to each coordinate
// column; the Kronecker lift is never materialized.
inline Eigen::MatrixXd weighted_laplacian(const FormationSpec& spec, const Eigen::MatrixXd& pos) {
  const Eigen::MatrixXd b = spec.graph.incidence();
  Eigen::VectorXd w(spec.graph.edge_count());
  for (int k = 0; k < spec.graph.edge_count(); ++k) {
    const auto& e = spec.graph.edges()[k];
    w(k) = (pos.row(e.b) - pos.row(e.a)).squaredNorm() - spec.desired_sq[k];
  }
  return b * w.asDiagonal() * b.transpose();
}

// State-dependent velocity gain: saturates at v_max for large consensus
// offsets and approaches v_max * k_vel near zero.
inline double state_dependent_gain(const FormationSpec& spec, const ControllerParams& p, int i,
                                   const BroadcastTable& bt) {
  Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(bt.last_pos.cols());
  for (const auto& [j, k] : spec.graph.neighbors(i)) s += bt.last_pos.row(j) - bt.last_pos.row(i);
  const double nrm = s.norm();
  if (nrm < 1e-12) return p.v_max * p.k_vel;
  return p.v_max * (1.0 - std::exp(-p.k_vel * nrm)) / nrm;
}

// Distance-error control input for agent i, evaluated on broadcast positions
// only (both the weights and the relative displacements).
inline Eigen::RowVectorXd control_input(const FormationSpec& spec, const ControllerParams& p,
                                        int i, const BroadcastTable& bt) {
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(bt.last_pos.cols());
  for (const auto& [j, k] : spec.graph.neighbors(i)) {
    const Eigen::RowVectorXd diff = bt.last_pos.row(i) - bt.last_pos.row(j);
    const double w = diff.squaredNorm() - spec.desired_sq[k];
    acc += w * diff;
  }
  const double gain =
      p.gain_mode == GainMode::kConstant ? p.alpha : state_dependent_gain(spec, p, i, bt);
  return -gain * acc;
}

inline Eigen::MatrixXd stacked_control(const FormationSpec& spec, const ControllerParams& p,
                                       const BroadcastTable& bt) {
  Eigen::MatrixXd u(bt.last_pos.rows(), bt.last_pos.cols());
  for (int i = 0; i < bt.last_pos.rows(); ++i) u.row(i) = control_input(spec, p, i, bt);
  return u;
}

// Lyapunov diagnostic: sum of squared distance errors over ordered neighbor
// pairs (each edge twice), scaled by 1 / (8 * gain * delta_max^6).
inline double lyapunov(const FormationSpec& spec, const ControllerParams& p,
                       const Eigen::MatrixXd& pos) {
  const double gain = p.lyapunov_gain();
  if (!(gain > 0.0)) throw std::invalid_argument("lyapunov: gain must be positive");
  if (!(spec.delta_max > 0.0)) throw std::invalid_argument("lyapunov: delta_max must be positive");
  double sum = 0.0;
  for (int k = 0; k < spec.graph.edge_count(); ++k) {
    const auto& e = spec.graph.edges()[k];
    const double w = (pos.row(e.b) - pos.row(e.a)).squaredNorm() - spec.desired_sq[k];
    sum += w * w;
  }
  const double d2 = spec.delta_max * spec.delta_max;
  return 2.0 * sum / (8.0 * gain * d2 * d2 * d2);
}

inline Eigen::RowVectorXd centroid(const Eigen::MatrixXd& pos) {
  if (pos.rows() < 1) throw std::invalid_argument("centroid: need at least one agent");
  return pos.colwise().mean();
}

}  // namespace etfc
