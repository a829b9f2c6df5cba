#pragma once

#include "etfc/graph.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace etfc {

// Desired inter-agent distances over the graph edges plus the normalization
// constants derived from them.
//
// Squared distances are first-class: when the spec comes from a target
// placement, desired_sq holds the exact squared norms, so evaluating the
// controller at that placement gives exact zeros instead of sqrt round-off.
struct FormationSpec {
  Graph graph;
  std::vector<double> desired_dist;  // per canonical edge (m)
  std::vector<double> desired_sq;    // per canonical edge (m^2)
  double delta_max = 0.0;            // largest desired distance (m)

  // Diagonal of the desired-distance weight matrix, squared distances in
  // canonical edge order.
  Eigen::VectorXd wtilde_diag() const {
    Eigen::VectorXd w(static_cast<Eigen::Index>(desired_sq.size()));
    for (size_t k = 0; k < desired_sq.size(); ++k) w(static_cast<Eigen::Index>(k)) = desired_sq[k];
    return w;
  }

  // Distances measured off an explicit target placement; always realizable.
  static FormationSpec from_target_placement(const Graph& g, const Eigen::MatrixXd& target) {
    if (target.rows() != g.node_count())
      throw std::invalid_argument("formation: target row count does not match node count");
    FormationSpec s;
    s.graph = g;
    s.desired_dist.resize(g.edge_count());
    s.desired_sq.resize(g.edge_count());
    for (int k = 0; k < g.edge_count(); ++k) {
      const auto& e = g.edges()[k];
      const double sq = (target.row(e.b) - target.row(e.a)).squaredNorm();
      if (sq == 0.0) throw std::invalid_argument("formation: adjacent targets coincide");
      s.desired_sq[k] = sq;
      s.desired_dist[k] = std::sqrt(sq);
      s.delta_max = std::max(s.delta_max, s.desired_dist[k]);
    }
    return s;
  }

  // Distances given directly. Realizability is the caller's concern.
  static FormationSpec from_distances(const Graph& g, std::vector<double> dists) {
    if (static_cast<int>(dists.size()) != g.edge_count())
      throw std::invalid_argument("formation: distance count does not match edge count");
    FormationSpec s;
    s.graph = g;
    s.desired_sq.resize(dists.size());
    for (size_t k = 0; k < dists.size(); ++k) {
      if (!(dists[k] > 0.0)) throw std::invalid_argument("formation: distances must be positive");
      s.desired_sq[k] = dists[k] * dists[k];
      s.delta_max = std::max(s.delta_max, dists[k]);
    }
    s.desired_dist = std::move(dists);
    return s;
  }
};

}  // namespace etfc
