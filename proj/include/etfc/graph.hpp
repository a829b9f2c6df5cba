#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace etfc {

// Undirected communication graph over agents 0..n-1.
//
// Edges are canonicalized on construction: each pair is stored smaller index
// first and the list is sorted lexicographically. That order is THE edge
// ordering; every edge-indexed quantity downstream (incidence columns,
// desired distances, edge weights) follows it.
class Graph {
 public:
  struct Edge {
    int a;  // smaller endpoint
    int b;  // larger endpoint
  };

  Graph() = default;  // empty graph; build real ones with from_edges

  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& pairs) {
    if (n <= 0) throw std::invalid_argument("graph: node count must be positive");
    Graph g;
    g.n_ = n;
    g.edges_.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
      if (i < 0 || j < 0 || i >= n || j >= n)
        throw std::invalid_argument("graph: edge index out of range");
      if (i == j) throw std::invalid_argument("graph: self-loop");
      g.edges_.push_back({std::min(i, j), std::max(i, j)});
    }
    std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& x, const Edge& y) {
      return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    const auto dup =
        std::adjacent_find(g.edges_.begin(), g.edges_.end(), [](const Edge& x, const Edge& y) {
          return x.a == y.a && x.b == y.b;
        });
    if (dup != g.edges_.end()) throw std::invalid_argument("graph: duplicate edge");
    g.adj_.resize(n);
    for (int k = 0; k < static_cast<int>(g.edges_.size()); ++k) {
      g.adj_[g.edges_[k].a].push_back({g.edges_[k].b, k});
      g.adj_[g.edges_[k].b].push_back({g.edges_[k].a, k});
    }
    return g;
  }

  int node_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  // Neighbors of i as (neighbor, edge index) pairs, ascending by neighbor.
  const std::vector<std::pair<int, int>>& neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

  Eigen::MatrixXd adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (const Edge& e : edges_) {
      a(e.a, e.b) = 1.0;
      a(e.b, e.a) = 1.0;
    }
    return a;
  }

  Eigen::MatrixXd degree_matrix() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < n_; ++i) d(i, i) = degree(i);
    return d;
  }

  // Combinatorial Laplacian: degree matrix minus adjacency.
  Eigen::MatrixXd laplacian() const {
    Eigen::MatrixXd l = degree_matrix();
    for (const Edge& e : edges_) {
      l(e.a, e.b) = -1.0;
      l(e.b, e.a) = -1.0;
    }
    return l;
  }

  // Incidence matrix, one column per canonical edge: +1 at the smaller
  // endpoint, -1 at the larger. laplacian() == incidence() * incidence()^T
  // regardless of the sign convention.
  Eigen::MatrixXd incidence() const {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n_, edge_count());
    for (int k = 0; k < edge_count(); ++k) {
      b(edges_[k].a, k) = 1.0;
      b(edges_[k].b, k) = -1.0;
    }
    return b;
  }

  bool is_connected() const {
    std::vector<char> seen(n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, k] : adj_[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == n_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
};

// Infinitesimal rigidity of a placement (rows of `placement` are node
// coordinates in 2 or 3 dimensions). Builds the M x (D*n) rigidity matrix and
// compares its rank, taken as the count of singular values above
// tol * s_max, against D*n - D*(D+1)/2. A fully degenerate placement reports
// not rigid.
inline bool is_rigid(const Graph& g, const Eigen::MatrixXd& placement, double tol = 1e-8) {
  const int n = g.node_count();
  const int dim = static_cast<int>(placement.cols());
  if (dim != 2 && dim != 3) throw std::invalid_argument("is_rigid: dimension must be 2 or 3");
  if (placement.rows() != n) throw std::invalid_argument("is_rigid: placement row count mismatch");
  if (n < dim) throw std::invalid_argument("is_rigid: need at least D nodes");
  const int m = g.edge_count();
  const int full_rank = dim * n - dim * (dim + 1) / 2;
  if (m == 0) return full_rank == 0;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, dim * n);
  for (int k = 0; k < m; ++k) {
    const auto& e = g.edges()[k];
    const Eigen::RowVectorXd d = placement.row(e.a) - placement.row(e.b);
    r.block(k, dim * e.a, 1, dim) = d;
    r.block(k, dim * e.b, 1, dim) = -d;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(r);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) return false;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++rank;
  return rank == full_rank;
}

}  // namespace etfc
