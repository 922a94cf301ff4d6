#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string_view>
#include <vector>

#include "autost/region_data.hpp"
#include "autost/sparse.hpp"
#include "autost/tensor.hpp"

namespace autost {

enum class Relation { Poi, Mobility, Distance, TemporalSelf };
inline constexpr std::array<Relation, 4> kRelations{Relation::Poi, Relation::Mobility,
                                                    Relation::Distance, Relation::TemporalSelf};

std::string_view relation_name(Relation r);
Relation parse_relation(std::string_view name);

struct NodeRef {
  enum class Kind { Base, Slot };
  Kind kind = Kind::Base;
  std::size_t region = 0;
  std::size_t slot = 0;  // 0 for Base nodes

  static NodeRef base(std::size_t region) { return {Kind::Base, region, 0}; }
  static NodeRef at_slot(std::size_t region, std::size_t slot) { return {Kind::Slot, region, slot}; }
  auto operator<=>(const NodeRef&) const = default;
};

/// Undirected edge with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Sorts endpoints, drops self-edges, and removes duplicates.
std::vector<Edge> canonical_edges(std::vector<Edge> edges);

/// One view: a node set and an undirected edge set without self-edges or duplicates.
struct ViewGraph {
  std::vector<NodeRef> nodes;
  std::vector<std::pair<NodeRef, NodeRef>> edges;

  /// Canonicalizes (first < second), drops self-edges and duplicates.
  void add_edge(NodeRef a, NodeRef b);
  void finalize();
};

/// Base-node edge (i, j) iff cos(e_i, e_j) > eps_p.
ViewGraph build_poi_graph(const Tensor& embeddings, double eps_p);

/// Slot(src, t_start) -- Slot(dst, t_end) per record. Throws ValidationError on
/// out-of-range regions or slots.
ViewGraph build_mobility_graph(const std::vector<TrajectoryRecord>& trajectories,
                               std::size_t regions, std::size_t slots);

/// Base-node edge (i, j) iff km(i, j) < eps_d. Throws ConfigError if eps_d <= 0.
ViewGraph build_distance_graph(const DistanceMatrix& dist, double eps_d_km);

/// D^-1/2 (A + I) D^-1/2 as CSR.
std::shared_ptr<const SparseMatrix> normalized_adjacency(std::size_t nodes,
                                                         const std::vector<Edge>& edges);

/// Unified node index: Base(i) -> i, Slot(i, t) -> I + i*T + t.
class HeteroGraph {
 public:
  HeteroGraph(std::size_t regions, std::size_t slots);

  std::size_t regions() const { return regions_; }
  std::size_t slots() const { return slots_; }
  std::size_t num_nodes() const { return regions_ + regions_ * slots_; }
  std::size_t index(const NodeRef& n) const;
  NodeRef node(std::size_t index) const;

  const std::vector<Edge>& edges(Relation r) const { return edges_[slot_of(r)]; }
  /// Replaces a relation's edges and recomputes its normalized adjacency.
  void set_edges(Relation r, std::vector<Edge> edges);
  const std::shared_ptr<const SparseMatrix>& adjacency(Relation r) const {
    return adjacency_[slot_of(r)];
  }
  /// Relation-agnostic union of all edge sets.
  std::vector<Edge> union_edges() const;

 private:
  static std::size_t slot_of(Relation r) { return static_cast<std::size_t>(r); }

  std::size_t regions_;
  std::size_t slots_;
  std::array<std::vector<Edge>, 4> edges_;
  std::array<std::shared_ptr<const SparseMatrix>, 4> adjacency_;
};

/// Tags the three views, adds Base(i)--Slot(i, t) TEMPORAL_SELF edges, and
/// normalizes each relation on the unified index.
HeteroGraph fuse(const ViewGraph& poi, const ViewGraph& mobility, const ViewGraph& distance,
                 std::size_t regions, std::size_t slots);

struct GraphConfig {
  double eps_p = 0.5;
  double eps_d_km = 2.5;
  bool use_poi = true;
  bool use_distance = true;
};

/// Builds all views from the dataset and fuses them. The POI view is built
/// from `poi_embeddings` (one row per region).
HeteroGraph build_hetero_graph(const Dataset& ds, const Tensor& poi_embeddings,
                               const GraphConfig& config);

/// One JSON object per edge:
/// {relation, u_kind, u_region, u_slot, v_kind, v_region, v_slot}; u_slot is null for Base.
void write_graph_jsonl(const HeteroGraph& graph, std::ostream& out);

}  // namespace autost
