#include "autost/hetero_graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <json.hpp>

#include "autost/errors.hpp"

namespace autost {

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::Poi: return "POI";
    case Relation::Mobility: return "MOBILITY";
    case Relation::Distance: return "DISTANCE";
    case Relation::TemporalSelf: return "TEMPORAL_SELF";
  }
  return "?";
}

Relation parse_relation(std::string_view name) {
  for (Relation r : kRelations) {
    if (relation_name(r) == name) return r;
  }
  throw ParseError("unknown relation '" + std::string(name) + "'");
}

std::vector<Edge> canonical_edges(std::vector<Edge> edges) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (Edge e : edges) {
    if (e.u == e.v) continue;
    if (e.u > e.v) std::swap(e.u, e.v);
    out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void ViewGraph::add_edge(NodeRef a, NodeRef b) {
  if (a == b) return;
  if (b < a) std::swap(a, b);
  edges.emplace_back(a, b);
}

void ViewGraph::finalize() {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
}

namespace {

ViewGraph base_view(std::size_t regions) {
  ViewGraph g;
  g.nodes.reserve(regions);
  for (std::size_t i = 0; i < regions; ++i) g.nodes.push_back(NodeRef::base(i));
  return g;
}

}  // namespace

ViewGraph build_poi_graph(const Tensor& e, double eps_p) {
  if (!e.all_finite()) throw ValidationError("build_poi_graph: non-finite embeddings");
  ViewGraph g = base_view(e.rows());
  std::vector<double> norms(e.rows());
  for (std::size_t i = 0; i < e.rows(); ++i) {
    double s = 0.0;
    for (double v : e.row(i)) s += v * v;
    norms[i] = std::sqrt(s);
  }
  for (std::size_t i = 0; i < e.rows(); ++i) {
    if (norms[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < e.rows(); ++j) {
      if (norms[j] == 0.0) continue;
      double dot = 0.0;
      auto a = e.row(i), b = e.row(j);
      for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
      if (dot / (norms[i] * norms[j]) > eps_p) g.add_edge(NodeRef::base(i), NodeRef::base(j));
    }
  }
  g.finalize();
  return g;
}

ViewGraph build_mobility_graph(const std::vector<TrajectoryRecord>& trajectories,
                               std::size_t regions, std::size_t slots) {
  ViewGraph g;
  g.nodes.reserve(regions * slots);
  for (std::size_t i = 0; i < regions; ++i)
    for (std::size_t t = 0; t < slots; ++t) g.nodes.push_back(NodeRef::at_slot(i, t));
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    const auto& r = trajectories[k];
    if (r.source >= regions || r.dest >= regions) {
      throw ValidationError("trajectory " + std::to_string(k) + ": region index out of range (" +
                            std::to_string(std::max(r.source, r.dest)) + " vs " +
                            std::to_string(regions) + ")");
    }
    if (r.t_start >= slots || r.t_end >= slots) {
      throw ValidationError("trajectory " + std::to_string(k) + ": time slot out of range (" +
                            std::to_string(std::max(r.t_start, r.t_end)) + " vs " +
                            std::to_string(slots) + ")");
    }
    g.add_edge(NodeRef::at_slot(r.source, r.t_start), NodeRef::at_slot(r.dest, r.t_end));
  }
  g.finalize();
  return g;
}

ViewGraph build_distance_graph(const DistanceMatrix& dist, double eps_d_km) {
  if (!(eps_d_km > 0.0)) {
    throw ConfigError("graph.eps_d must be > 0 (got " + std::to_string(eps_d_km) + ")");
  }
  const std::size_t n = dist.km.rows();
  ViewGraph g = base_view(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (dist.km(i, j) < eps_d_km) g.add_edge(NodeRef::base(i), NodeRef::base(j));
  g.finalize();
  return g;
}

std::shared_ptr<const SparseMatrix> normalized_adjacency(std::size_t nodes,
                                                         const std::vector<Edge>& edges) {
  std::vector<double> degree(nodes, 1.0);
  for (const Edge& e : edges) {
    degree[e.u] += 1.0;
    degree[e.v] += 1.0;
  }
  std::vector<double> inv_sqrt(nodes);
  for (std::size_t i = 0; i < nodes; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);
  std::vector<Triplet> triplets;
  triplets.reserve(nodes + 2 * edges.size());
  for (std::size_t i = 0; i < nodes; ++i) triplets.push_back({i, i, inv_sqrt[i] * inv_sqrt[i]});
  for (const Edge& e : edges) {
    const double w = inv_sqrt[e.u] * inv_sqrt[e.v];
    triplets.push_back({e.u, e.v, w});
    triplets.push_back({e.v, e.u, w});
  }
  return std::make_shared<const SparseMatrix>(sparse_from_triplets(nodes, nodes, std::move(triplets)));
}

HeteroGraph::HeteroGraph(std::size_t regions, std::size_t slots) : regions_(regions), slots_(slots) {
  for (Relation r : kRelations) adjacency_[slot_of(r)] = normalized_adjacency(num_nodes(), {});
}

std::size_t HeteroGraph::index(const NodeRef& n) const {
  if (n.region >= regions_ || (n.kind == NodeRef::Kind::Slot && n.slot >= slots_)) {
    throw ContractError("node (" + std::to_string(n.region) + ", " + std::to_string(n.slot) +
                        ") outside graph with " + std::to_string(regions_) + " regions and " +
                        std::to_string(slots_) + " slots");
  }
  return n.kind == NodeRef::Kind::Base ? n.region : regions_ + n.region * slots_ + n.slot;
}

NodeRef HeteroGraph::node(std::size_t index) const {
  if (index >= num_nodes()) {
    throw ContractError("node index " + std::to_string(index) + " out of range (" +
                        std::to_string(num_nodes()) + " nodes)");
  }
  if (index < regions_) return NodeRef::base(index);
  const std::size_t k = index - regions_;
  return NodeRef::at_slot(k / slots_, k % slots_);
}

void HeteroGraph::set_edges(Relation r, std::vector<Edge> edges) {
  for (const Edge& e : edges) {
    if (e.u >= num_nodes() || e.v >= num_nodes()) {
      throw ContractError(std::string(relation_name(r)) + " edge endpoint out of range (" +
                          std::to_string(std::max(e.u, e.v)) + " vs " +
                          std::to_string(num_nodes()) + ")");
    }
  }
  edges_[slot_of(r)] = canonical_edges(std::move(edges));
  adjacency_[slot_of(r)] = normalized_adjacency(num_nodes(), edges_[slot_of(r)]);
}

std::vector<Edge> HeteroGraph::union_edges() const {
  std::vector<Edge> all;
  for (const auto& list : edges_) all.insert(all.end(), list.begin(), list.end());
  return canonical_edges(std::move(all));
}

HeteroGraph fuse(const ViewGraph& poi, const ViewGraph& mobility, const ViewGraph& distance,
                 std::size_t regions, std::size_t slots) {
  HeteroGraph g(regions, slots);
  auto convert = [&](const ViewGraph& view) {
    std::vector<Edge> out;
    out.reserve(view.edges.size());
    for (const auto& [a, b] : view.edges) out.push_back({g.index(a), g.index(b)});
    return out;
  };
  g.set_edges(Relation::Poi, convert(poi));
  g.set_edges(Relation::Mobility, convert(mobility));
  g.set_edges(Relation::Distance, convert(distance));
  std::vector<Edge> temporal;
  temporal.reserve(regions * slots);
  for (std::size_t i = 0; i < regions; ++i)
    for (std::size_t t = 0; t < slots; ++t)
      temporal.push_back({i, g.index(NodeRef::at_slot(i, t))});
  g.set_edges(Relation::TemporalSelf, std::move(temporal));
  return g;
}

HeteroGraph build_hetero_graph(const Dataset& ds, const Tensor& poi_embeddings,
                               const GraphConfig& config) {
  if (poi_embeddings.rows() != ds.regions()) {
    throw ShapeError("build_hetero_graph: embeddings " + shape_string(poi_embeddings) + " vs " +
                     std::to_string(ds.regions()) + " regions");
  }
  const std::size_t n = ds.regions();
  ViewGraph gp = config.use_poi ? build_poi_graph(poi_embeddings, config.eps_p) : ViewGraph{};
  ViewGraph gd = config.use_distance ? build_distance_graph(ds.dist, config.eps_d_km) : ViewGraph{};
  ViewGraph gm = build_mobility_graph(ds.trajectories, n, ds.slots);
  return fuse(gp, gm, gd, n, ds.slots);
}

void write_graph_jsonl(const HeteroGraph& graph, std::ostream& out) {
  auto put = [&](nlohmann::ordered_json& j, const char* prefix, const NodeRef& n) {
    const std::string p(prefix);
    j[p + "_kind"] = n.kind == NodeRef::Kind::Base ? "base" : "slot";
    j[p + "_region"] = n.region;
    if (n.kind == NodeRef::Kind::Base) {
      j[p + "_slot"] = nullptr;
    } else {
      j[p + "_slot"] = n.slot;
    }
  };
  for (Relation r : kRelations) {
    for (const Edge& e : graph.edges(r)) {
      nlohmann::ordered_json j;
      j["relation"] = relation_name(r);
      put(j, "u", graph.node(e.u));
      put(j, "v", graph.node(e.v));
      out << j.dump() << '\n';
    }
  }
}

}  // namespace autost
