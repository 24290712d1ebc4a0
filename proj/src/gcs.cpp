#include "pushplan/gcs.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pushplan::gcs {

using conic::AffineRow;
using conic::ConeConstraint;
using conic::ConeKind;

int GcsGraph::add_vertex(GcsVertex vertex) {
  vertices_.push_back(std::move(vertex));
  out_edges_.emplace_back();
  in_edges_.emplace_back();
  return num_vertices() - 1;
}

int GcsGraph::add_edge(int u, int v) {
  if (u == v) throw DisconnectedGraph("self-edges are not allowed");
  if (u < 0 || v < 0 || u >= num_vertices() || v >= num_vertices())
    throw DisconnectedGraph("edge endpoint out of range");
  if (vertices_[u].program.exit_state.size() != vertices_[v].program.entry_state.size())
    throw DisconnectedGraph("continuity dimensions disagree on edge " + std::to_string(u) +
                            " -> " + std::to_string(v));
  edges_.push_back({u, v});
  out_edges_[u].push_back(num_edges() - 1);
  in_edges_[v].push_back(num_edges() - 1);
  return num_edges() - 1;
}

void GcsGraph::set_source(int v) { source_ = v; }
void GcsGraph::set_target(int t) { target_ = t; }

void GcsGraph::validate() const {
  if (source_ < 0 || target_ < 0) throw DisconnectedGraph("source/target not set");
  if (!in_edges_[source_].empty()) throw DisconnectedGraph("source must have no in-edges");
  if (!out_edges_[target_].empty()) throw DisconnectedGraph("target must have no out-edges");
}

bool GcsGraph::source_connects_to_target() const {
  std::vector<bool> seen(num_vertices(), false);
  std::queue<int> frontier;
  frontier.push(source_);
  seen[source_] = true;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    if (v == target_) return true;
    for (int e : out_edges_[v]) {
      const int w = edges_[e].v;
      if (!seen[w]) {
        seen[w] = true;
        frontier.push(w);
      }
    }
  }
  return false;
}

namespace {

// Instantiates a vertex program copy whose scaling coordinate is `x0_var`
// (a flow variable, or -1 for a literal x0 = 1 restriction).
void instantiate_atoms(const VertexProgram& vp, int var_base, int x0_var,
                       conic::ConicProgram* program) {
  auto remap = [&](const AffineRow& row) {
    AffineRow out;
    for (const auto& t : row.terms) out.add_term(var_base + t.var, t.coef);
    if (x0_var >= 0)
      out.add_term(x0_var, row.constant);
    else
      out.constant = row.constant;
    return out;
  };
  for (const auto& atom : vp.atoms) {
    ConeConstraint c;
    c.kind = atom.kind;
    c.psd_side = atom.psd_side;
    c.label = atom.label;
    c.rows.reserve(atom.rows.size());
    for (const auto& row : atom.rows) c.rows.push_back(remap(row));
    program->add_constraint(std::move(c));
  }
}

AffineRow remap_boundary(const AffineRow& row, int var_base, int x0_var) {
  AffineRow out;
  for (const auto& t : row.terms) out.add_term(var_base + t.var, t.coef);
  if (x0_var >= 0)
    out.add_term(x0_var, row.constant);
  else
    out.constant = row.constant;
  return out;
}

}  // namespace

FlowRelaxation FlowRelaxation::build(const GcsGraph& graph) {
  graph.validate();
  if (!graph.source_connects_to_target())
    throw DisconnectedGraph("no directed path from source to target");

  FlowRelaxation rel;
  conic::ConicProgram& p = rel.program_;
  const int ne = graph.num_edges();
  rel.flow_vars_.resize(ne);
  rel.tail_copy_.resize(ne);
  rel.head_copy_.resize(ne);

  for (int e = 0; e < ne; ++e) {
    const auto& edge = graph.edge(e);
    rel.flow_vars_[e] = p.add_variable();
    rel.tail_copy_[e] = p.add_variables(graph.vertex(edge.u).program.num_vars);
    rel.head_copy_[e] = p.add_variables(graph.vertex(edge.v).program.num_vars);
  }

  for (int e = 0; e < ne; ++e) {
    const auto& edge = graph.edge(e);
    const VertexProgram& up = graph.vertex(edge.u).program;
    const VertexProgram& vp = graph.vertex(edge.v).program;
    const int phi = rel.flow_vars_[e];

    ConeConstraint box;
    box.kind = ConeKind::kNonnegative;
    box.label = "flow box";
    box.rows.push_back(AffineRow({{phi, 1.0}}, 0.0));
    box.rows.push_back(AffineRow({{phi, -1.0}}, 1.0));
    p.add_constraint(std::move(box));

    instantiate_atoms(up, rel.tail_copy_[e], phi, &p);
    instantiate_atoms(vp, rel.head_copy_[e], phi, &p);

    ConeConstraint continuity;
    continuity.kind = ConeKind::kZero;
    continuity.label = "continuity";
    for (size_t i = 0; i < up.exit_state.size(); ++i) {
      AffineRow row = remap_boundary(up.exit_state[i], rel.tail_copy_[e], phi) -
                      remap_boundary(vp.entry_state[i], rel.head_copy_[e], phi);
      continuity.rows.push_back(std::move(row));
    }
    if (!continuity.rows.empty()) p.add_constraint(std::move(continuity));

    // Vertex cost of the tail in perspective, charged on its outgoing copy.
    for (const auto& t : graph.vertex(edge.u).program.cost)
      p.add_objective_term(rel.tail_copy_[e] + t.var, t.coef);
    if (up.cost_x0 != 0.0) p.add_objective_term(phi, up.cost_x0);
    // The target never leaves; charge its cost on incoming copies.
    if (edge.v == graph.target()) {
      for (const auto& t : vp.cost) p.add_objective_term(rel.head_copy_[e] + t.var, t.coef);
      if (vp.cost_x0 != 0.0) p.add_objective_term(phi, vp.cost_x0);
    }
  }

  // Flow conservation, spatial conservation, and unit degree bounds.
  for (int v = 0; v < graph.num_vertices(); ++v) {
    const auto& in = graph.in_edges(v);
    const auto& out = graph.out_edges(v);
    if (v == graph.source()) {
      ConeConstraint c;
      c.kind = ConeKind::kZero;
      c.label = "source flow";
      AffineRow row;
      for (int e : out) row.add_term(rel.flow_vars_[e], 1.0);
      row.constant = -1.0;
      c.rows.push_back(std::move(row));
      p.add_constraint(std::move(c));
      continue;
    }
    if (v == graph.target()) {
      ConeConstraint c;
      c.kind = ConeKind::kZero;
      c.label = "target flow";
      AffineRow row;
      for (int e : in) row.add_term(rel.flow_vars_[e], 1.0);
      row.constant = -1.0;
      c.rows.push_back(std::move(row));
      p.add_constraint(std::move(c));
      continue;
    }

    ConeConstraint conserve;
    conserve.kind = ConeKind::kZero;
    conserve.label = "conservation";
    AffineRow flow_row;
    for (int e : in) flow_row.add_term(rel.flow_vars_[e], 1.0);
    for (int e : out) flow_row.add_term(rel.flow_vars_[e], -1.0);
    conserve.rows.push_back(std::move(flow_row));
    const int nv = graph.vertex(v).program.num_vars;
    for (int i = 0; i < nv; ++i) {
      AffineRow row;
      for (int e : in) row.add_term(rel.head_copy_[e] + i, 1.0);
      for (int e : out) row.add_term(rel.tail_copy_[e] + i, -1.0);
      conserve.rows.push_back(std::move(row));
    }
    p.add_constraint(std::move(conserve));

    ConeConstraint degree;
    degree.kind = ConeKind::kNonnegative;
    degree.label = "degree";
    AffineRow in_deg;
    for (int e : in) in_deg.add_term(rel.flow_vars_[e], -1.0);
    in_deg.constant = 1.0;
    degree.rows.push_back(std::move(in_deg));
    p.add_constraint(std::move(degree));
  }
  return rel;
}

FlowRelaxation::Solution FlowRelaxation::solve(const GcsGraph& graph,
                                               const conic::SolveOptions& options) const {
  Solution sol;
  sol.outcome = conic::solve(program_, options);
  if (sol.outcome.optimal()) {
    sol.cost = sol.outcome.objective;
    sol.edge_flows.resize(graph.num_edges());
    for (int e = 0; e < graph.num_edges(); ++e)
      sol.edge_flows[e] = sol.outcome.primal[flow_vars_[e]];
  }
  return sol;
}

std::vector<PathCandidate> round_paths(const GcsGraph& graph,
                                       const std::vector<double>& edge_flows, int attempts,
                                       uint64_t seed) {
  constexpr double kFlowPrune = 1e-4;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };

  std::vector<PathCandidate> found;
  std::set<std::vector<int>> dedupe;

  for (int attempt = 0; attempt < attempts; ++attempt) {
    // Randomized DFS from the source, next edge drawn with probability
    // proportional to flow among unvisited heads.
    std::vector<int> path = {graph.source()};
    std::vector<bool> visited(graph.num_vertices(), false);
    visited[graph.source()] = true;
    // Per path vertex, the out-edges not yet tried.
    std::vector<std::vector<int>> pending = {graph.out_edges(graph.source())};

    while (!path.empty()) {
      if (path.back() == graph.target()) break;
      auto& options_here = pending.back();
      // Drop pruned or visited candidates.
      std::vector<int> live;
      double total = 0.0;
      for (int e : options_here) {
        if (edge_flows[e] < kFlowPrune) continue;
        if (visited[graph.edge(e).v]) continue;
        live.push_back(e);
        total += edge_flows[e];
      }
      if (live.empty()) {
        // Dead end: backtrack.
        visited[path.back()] = false;
        path.pop_back();
        pending.pop_back();
        continue;
      }
      double pick = uniform() * total;
      int chosen = live.back();
      for (int e : live) {
        pick -= edge_flows[e];
        if (pick <= 0.0) {
          chosen = e;
          break;
        }
      }
      options_here.erase(std::find(options_here.begin(), options_here.end(), chosen));
      const int next = graph.edge(chosen).v;
      visited[next] = true;
      path.push_back(next);
      pending.push_back(graph.out_edges(next));
    }

    if (!path.empty() && path.back() == graph.target() && dedupe.insert(path).second)
      found.push_back({path});
  }
  if (found.empty())
    throw NoPathFound("all rounding traversals dead-ended; relaxation flows unusable");
  return found;
}

RestrictionSolution solve_restriction(const GcsGraph& graph, const PathCandidate& path,
                                      const conic::SolveOptions& options) {
  if (path.vertices.size() < 2) throw InfeasibleRestriction("path too short");
  std::set<int> distinct(path.vertices.begin(), path.vertices.end());
  if (distinct.size() != path.vertices.size())
    throw InfeasibleRestriction("path visits a vertex twice");

  conic::ConicProgram program;
  std::vector<int> base(path.vertices.size());
  for (size_t i = 0; i < path.vertices.size(); ++i) {
    const VertexProgram& vp = graph.vertex(path.vertices[i]).program;
    base[i] = program.add_variables(vp.num_vars);
    instantiate_atoms(vp, base[i], /*x0_var=*/-1, &program);
    for (const auto& t : vp.cost) program.add_objective_term(base[i] + t.var, t.coef);
    program.add_objective_constant(vp.cost_x0);
  }
  for (size_t i = 0; i + 1 < path.vertices.size(); ++i) {
    const int u = path.vertices[i], v = path.vertices[i + 1];
    bool edge_exists = false;
    for (int e : graph.out_edges(u))
      if (graph.edge(e).v == v) edge_exists = true;
    if (!edge_exists)
      throw InfeasibleRestriction("path uses a nonexistent edge " + std::to_string(u) +
                                  " -> " + std::to_string(v));
    const VertexProgram& up = graph.vertex(u).program;
    const VertexProgram& vp = graph.vertex(v).program;
    ConeConstraint continuity;
    continuity.kind = ConeKind::kZero;
    continuity.label = "continuity";
    for (size_t r = 0; r < up.exit_state.size(); ++r) {
      AffineRow row = remap_boundary(up.exit_state[r], base[i], -1) -
                      remap_boundary(vp.entry_state[r], base[i + 1], -1);
      continuity.rows.push_back(std::move(row));
    }
    if (!continuity.rows.empty()) program.add_constraint(std::move(continuity));
  }

  RestrictionSolution sol;
  sol.outcome = conic::solve(program, options);
  if (sol.outcome.status == conic::SolveStatus::kInfeasible)
    throw InfeasibleRestriction("path restriction is infeasible");
  if (sol.outcome.optimal()) {
    sol.cost = sol.outcome.objective;
    sol.vertex_values.resize(path.vertices.size());
    for (size_t i = 0; i < path.vertices.size(); ++i) {
      const int nv = graph.vertex(path.vertices[i]).program.num_vars;
      sol.vertex_values[i].assign(sol.outcome.primal.begin() + base[i],
                                  sol.outcome.primal.begin() + base[i] + nv);
    }
  }
  return sol;
}

std::string dump_graph_json(const GcsGraph& graph, const std::vector<double>& edge_flows) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (int v = 0; v < graph.num_vertices(); ++v)
    j["vertices"].push_back({{"id", v}, {"name", graph.vertex(v).name}});
  j["source"] = graph.source();
  j["target"] = graph.target();
  j["edges"] = nlohmann::json::array();
  for (int e = 0; e < graph.num_edges(); ++e) {
    nlohmann::json je = {{"u", graph.edge(e).u}, {"v", graph.edge(e).v}};
    if (e < static_cast<int>(edge_flows.size())) je["flow"] = edge_flows[e];
    j["edges"].push_back(std::move(je));
  }
  return j.dump(2);
}

}  // namespace pushplan::gcs
