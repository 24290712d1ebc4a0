#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushplan/conic_program.hpp"
#include "pushplan/conic_solve.hpp"

namespace pushplan::gcs {

struct DisconnectedGraph : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoPathFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleRestriction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A vertex's convex set and cost in homogeneous (conic) form. The scaling
// coordinate x0 is implicit: inside every AffineRow here, `constant` is the
// coefficient of x0. Pinning x0 = 1 recovers the vertex set; substituting a
// flow variable yields its perspective. Singleton vertices have no
// variables and constant boundary rows.
struct VertexProgram {
  int num_vars = 0;
  std::vector<conic::ConeConstraint> atoms;
  std::vector<conic::LinearTerm> cost;  // over local variables
  double cost_x0 = 0.0;                 // constant cost, scaled by x0
  std::vector<conic::AffineRow> entry_state;
  std::vector<conic::AffineRow> exit_state;
};

struct GcsVertex {
  std::string name;
  VertexProgram program;
};

struct GcsEdge {
  int u = -1, v = -1;
};

// Directed graph of convex sets with vertex costs and continuity edge
// couplings (exit state of u equals entry state of v).
class GcsGraph {
 public:
  int add_vertex(GcsVertex vertex);
  int add_edge(int u, int v);  // returns edge index
  void set_source(int v);
  void set_target(int t);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const GcsVertex& vertex(int i) const { return vertices_.at(i); }
  const GcsEdge& edge(int i) const { return edges_.at(i); }
  const std::vector<int>& out_edges(int v) const { return out_edges_.at(v); }
  const std::vector<int>& in_edges(int v) const { return in_edges_.at(v); }
  int source() const { return source_; }
  int target() const { return target_; }

  // No self-edges, source without in-edges, target without out-edges,
  // matching continuity dimensions; throws on violation.
  void validate() const;
  bool source_connects_to_target() const;

 private:
  std::vector<GcsVertex> vertices_;
  std::vector<GcsEdge> edges_;
  std::vector<std::vector<int>> out_edges_, in_edges_;
  int source_ = -1, target_ = -1;
};

// Flow relaxation of the shortest-path problem: per-edge flows in [0, 1],
// per-edge perspective copies of both endpoint programs, flow and spatial
// conservation, and unit degree constraints.
class FlowRelaxation {
 public:
  static FlowRelaxation build(const GcsGraph& graph);

  const conic::ConicProgram& program() const { return program_; }
  int flow_var(int edge) const { return flow_vars_.at(edge); }
  int head_copy_start(int edge) const { return head_copy_.at(edge); }
  int tail_copy_start(int edge) const { return tail_copy_.at(edge); }

  struct Solution {
    conic::SolverOutcome outcome;
    std::vector<double> edge_flows;
    double cost = 0.0;  // C_relax
  };
  Solution solve(const GcsGraph& graph, const conic::SolveOptions& options = {}) const;

 private:
  conic::ConicProgram program_;
  std::vector<int> flow_vars_;
  std::vector<int> tail_copy_;  // copy of u's variables per edge
  std::vector<int> head_copy_;  // copy of v's variables per edge
};

inline FlowRelaxation build_relaxation(const GcsGraph& graph) {
  return FlowRelaxation::build(graph);
}

struct PathCandidate {
  std::vector<int> vertices;  // s .. t, distinct
};

// Flow-guided randomized depth-first rounding: K attempts, next edge drawn
// with probability proportional to flow (flows below 1e-4 pruned),
// duplicates removed, deterministic under a fixed seed.
std::vector<PathCandidate> round_paths(const GcsGraph& graph,
                                       const std::vector<double>& edge_flows, int attempts,
                                       uint64_t seed);

struct RestrictionSolution {
  conic::SolverOutcome outcome;
  double cost = 0.0;
  // Values per path vertex, sized like the vertex program.
  std::vector<std::vector<double>> vertex_values;
};

// Convex restriction of the graph problem to one path (x0 = 1 on its
// vertices, continuity on its edges). Throws InfeasibleRestriction when the
// couplings cannot be met.
RestrictionSolution solve_restriction(const GcsGraph& graph, const PathCandidate& path,
                                      const conic::SolveOptions& options = {});

// JSON debug dump: vertex ids/names, edges, and per-edge flows.
std::string dump_graph_json(const GcsGraph& graph, const std::vector<double>& edge_flows);

}  // namespace pushplan::gcs
