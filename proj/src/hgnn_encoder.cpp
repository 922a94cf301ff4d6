#include "autost/hgnn_encoder.hpp"

#include <string>

#include "autost/errors.hpp"
#include "autost/ops.hpp"

namespace autost {

EncoderParams EncoderParams::glorot(std::size_t dim, std::size_t layers, Rng& rng) {
  EncoderParams p;
  p.weights.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    for (Relation r : kRelations) {
      p.weights[l][static_cast<std::size_t>(r)] = {
          "encoder." + std::to_string(l) + "." + std::string(relation_name(r)),
          glorot_uniform(dim, dim, rng)};
    }
  }
  return p;
}

std::vector<Parameter*> EncoderParams::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : weights)
    for (auto& w : layer) out.push_back(&w);
  return out;
}

std::vector<RelationInput> relation_inputs(const HeteroGraph& graph) {
  std::vector<RelationInput> out;
  for (Relation r : kRelations) out.push_back({r, graph.adjacency(r)});
  return out;
}

std::vector<std::size_t> feature_rows(std::size_t regions, std::size_t slots) {
  std::vector<std::size_t> rows;
  rows.reserve(regions + regions * slots);
  for (std::size_t i = 0; i < regions; ++i) rows.push_back(i);
  for (std::size_t i = 0; i < regions; ++i)
    for (std::size_t t = 0; t < slots; ++t) rows.push_back(i);
  return rows;
}

Var init_features(Tape&, Var region_embeddings, const HeteroGraph& graph) {
  if (region_embeddings.rows() != graph.regions()) {
    throw ShapeError("init_features: embeddings " + shape_string(region_embeddings.value()) +
                     " vs " + std::to_string(graph.regions()) + " regions");
  }
  return gather_rows(region_embeddings, feature_rows(graph.regions(), graph.slots()));
}

Var encode(Tape& tape, const std::vector<RelationInput>& relations, Var h0, EncoderParams& params) {
  for (const auto& rel : relations) {
    if (rel.adjacency->cols != h0.rows()) {
      throw ShapeError("encode: adjacency [" + std::to_string(rel.adjacency->rows) + "x" +
                       std::to_string(rel.adjacency->cols) + "] vs features " +
                       shape_string(h0.value()));
    }
  }
  Var total = h0;
  Var h = h0;
  for (std::size_t l = 0; l < params.layers(); ++l) {
    Var acc;
    for (const auto& rel : relations) {
      Var term = matmul_nt(spmm(rel.adjacency, h), tape.param(params.weight(l, rel.bank)));
      acc = acc.valid() ? add(acc, term) : term;
    }
    if (!acc.valid()) throw ContractError("encode: no relations supplied");
    h = relu(acc);
    total = add(total, h);
  }
  return total;
}

Var encode(Tape& tape, const HeteroGraph& graph, Var h0, EncoderParams& params) {
  return encode(tape, relation_inputs(graph), h0, params);
}

}  // namespace autost
