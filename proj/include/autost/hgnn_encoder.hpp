#pragma once

#include <array>
#include <memory>
#include <vector>

#include "autost/hetero_graph.hpp"
#include "autost/random.hpp"
#include "autost/tape.hpp"

namespace autost {

/// One d x d weight per relation per layer.
struct EncoderParams {
  std::vector<std::array<Parameter, 4>> weights;

  static EncoderParams glorot(std::size_t dim, std::size_t layers, Rng& rng);
  std::size_t layers() const { return weights.size(); }
  Parameter& weight(std::size_t layer, Relation r) {
    return weights.at(layer)[static_cast<std::size_t>(r)];
  }
  std::vector<Parameter*> parameters();
};

/// A normalized adjacency paired with the relation whose weight bank it uses.
struct RelationInput {
  Relation bank;
  std::shared_ptr<const SparseMatrix> adjacency;
};

/// All four relations of the fused graph, each with its own bank.
std::vector<RelationInput> relation_inputs(const HeteroGraph& graph);

/// Row map for H^(0): Base(i) and every Slot(i, t) copy e_i.
std::vector<std::size_t> feature_rows(std::size_t regions, std::size_t slots);
Var init_features(Tape& tape, Var region_embeddings, const HeteroGraph& graph);

/// H^(l) = relu( sum_r A_r H^(l-1) W_r^(l-1)^T ), l = 1..L; returns sum_{l=0..L} H^(l).
Var encode(Tape& tape, const std::vector<RelationInput>& relations, Var h0, EncoderParams& params);
Var encode(Tape& tape, const HeteroGraph& graph, Var h0, EncoderParams& params);

}  // namespace autost
