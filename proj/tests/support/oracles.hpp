#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "pushplan/sdp_relaxation.hpp"

namespace test_support {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Exact disk-to-polygon distance: min over edges of point-segment distance,
// minus the disk radius (negative inside).
inline double disk_polygon_distance(const std::vector<Eigen::Vector2d>& poly,
                                    const Eigen::Vector2d& p, double radius) {
  const int n = static_cast<int>(poly.size());
  double best = std::numeric_limits<double>::infinity();
  bool inside = false;
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) inside = !inside;
    }
    const Eigen::Vector2d ab = b - a;
    const double t = std::clamp(ab.dot(p - a) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (p - (a + t * ab)).norm());
  }
  return (inside ? -best : best) - radius;
}

// Closest polygon feature for p: true when the nearest point lies strictly
// inside an edge (not at a vertex).
inline bool closest_point_on_edge_interior(const std::vector<Eigen::Vector2d>& poly,
                                           const Eigen::Vector2d& p, double tol = 1e-9) {
  const int n = static_cast<int>(poly.size());
  double best = std::numeric_limits<double>::infinity();
  double best_t = 0.0;
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const Eigen::Vector2d ab = poly[i] - poly[j];
    const double t = std::clamp(ab.dot(p - poly[j]) / ab.squaredNorm(), 0.0, 1.0);
    const double d = (p - (poly[j] + t * ab)).norm();
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  return best_t > tol && best_t < 1.0 - tol;
}

// Dijkstra over vertex costs: cost of a path = sum of its vertex costs.
struct PointGraph {
  int num_vertices = 0;
  std::vector<double> vertex_cost;
  std::vector<std::pair<int, int>> edges;  // directed
  int source = 0, target = 0;
};

inline double dijkstra_vertex_cost(const PointGraph& g, std::vector<int>* path_out = nullptr) {
  std::vector<std::vector<int>> out(g.num_vertices);
  for (const auto& [u, v] : g.edges) out[u].push_back(v);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.num_vertices, inf);
  std::vector<int> prev(g.num_vertices, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[g.source] = g.vertex_cost[g.source];
  pq.push({dist[g.source], g.source});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (int v : out[u]) {
      const double nd = d + g.vertex_cost[v];
      if (nd < dist[v]) {
        dist[v] = nd;
        prev[v] = u;
        pq.push({nd, v});
      }
    }
  }
  if (path_out != nullptr && dist[g.target] < inf) {
    path_out->clear();
    for (int v = g.target; v != -1; v = prev[v]) path_out->push_back(v);
    std::reverse(path_out->begin(), path_out->end());
  }
  return dist[g.target];
}

// Random band-sparse QCQP with a feasible point built in: affine rows and
// quadratic constraints get their constants adjusted to hold at y_seed.
struct RandomQcqp {
  pushplan::sdp::QcqpProblem problem;
  std::vector<double> feasible_point;
};

inline RandomQcqp random_band_qcqp(std::mt19937_64& rng, int max_vars = 8) {
  using pushplan::sdp::HomogeneousQuadratic;
  RandomQcqp out;
  const int n = 2 + static_cast<int>(uniform01(rng) * (max_vars - 1));
  out.problem.num_vars = n;

  // Two overlapping groups when possible, one otherwise.
  if (n >= 4) {
    const int split = n / 2 + 1;
    std::vector<int> g1, g2;
    for (int i = 0; i < split; ++i) g1.push_back(i);
    for (int i = split - 2; i < n; ++i) g2.push_back(i);
    out.problem.band_groups = {g1, g2};
  } else {
    std::vector<int> g;
    for (int i = 0; i < n; ++i) g.push_back(i);
    out.problem.band_groups = {g};
  }

  out.feasible_point.resize(n);
  for (double& v : out.feasible_point) v = uniform(rng, -1.0, 1.0);

  // Box rows keep everything compact and give the RLT pairs substance.
  for (int i = 0; i < n; ++i) {
    pushplan::conic::AffineRow lo, hi;
    lo.add_term(i, 1.0);
    lo.constant = 2.0;
    hi.add_term(i, -1.0);
    hi.constant = 2.0;
    out.problem.affine_rows.push_back(lo);
    out.problem.affine_rows.push_back(hi);
  }
  // A few random inequality rows, feasible at the seed point by margin.
  const int extra = 2 + static_cast<int>(uniform01(rng) * 3);
  for (int e = 0; e < extra; ++e) {
    pushplan::conic::AffineRow row;
    double value = 0.0;
    for (int i = 0; i < n; ++i) {
      if (uniform01(rng) < 0.5) continue;
      const double c = uniform(rng, -1.0, 1.0);
      row.add_term(i, c);
      value += c * out.feasible_point[i];
    }
    row.constant = -value + uniform(rng, 0.0, 1.0);
    out.problem.affine_rows.push_back(std::move(row));
  }

  // Random quadratic constraints inside a random group; equality or
  // inequality, anchored at the seed point.
  const int nq = 1 + static_cast<int>(uniform01(rng) * 3);
  for (int q = 0; q < nq; ++q) {
    const auto& g =
        out.problem.band_groups[static_cast<size_t>(uniform01(rng) * 0.999 *
                                                    out.problem.band_groups.size())];
    HomogeneousQuadratic hq;
    hq.sense = uniform01(rng) < 0.5 ? pushplan::modes::Sense::kEq
                                    : pushplan::modes::Sense::kGe;
    double value = 0.0;
    for (size_t a = 0; a < g.size(); ++a)
      for (size_t b = a; b < g.size(); ++b) {
        if (uniform01(rng) < 0.6) continue;
        const double c = uniform(rng, -1.0, 1.0);
        hq.add(g[a] + 1, g[b] + 1, c);
        value += c * out.feasible_point[g[a]] * out.feasible_point[g[b]];
      }
    for (size_t a = 0; a < g.size(); ++a) {
      if (uniform01(rng) < 0.5) continue;
      const double c = uniform(rng, -1.0, 1.0);
      hq.add(0, g[a] + 1, c);
      value += c * out.feasible_point[g[a]];
    }
    const double slack = hq.sense == pushplan::modes::Sense::kEq ? 0.0 : uniform(rng, 0.0, 0.5);
    hq.add(0, 0, -value + slack);
    out.problem.quadratic_constraints.push_back(std::move(hq));
  }

  // Random quadratic cost with entries inside groups.
  for (const auto& g : out.problem.band_groups) {
    for (size_t a = 0; a < g.size(); ++a) {
      for (size_t b = a; b < g.size(); ++b)
        if (uniform01(rng) < 0.3)
          out.problem.cost.add(g[a] + 1, g[b] + 1, uniform(rng, -1.0, 1.0));
      if (uniform01(rng) < 0.3) out.problem.cost.add(0, g[a] + 1, uniform(rng, -1.0, 1.0));
    }
  }
  return out;
}

}  // namespace test_support
