#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "autost/nn.hpp"
#include "autost/region_data.hpp"
#include "autost/tape.hpp"

namespace autost {

struct SkipGramConfig {
  std::size_t dim = 96;
  /// Each category token is repeated min(count, window_cap) times per region sentence.
  std::size_t window_cap = 20;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  /// Contexts drawn uniformly from the rest of the sentence per center token.
  std::size_t contexts_per_token = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

/// Negative-sampling skip-gram over per-region category "sentences"; two
/// categories co-occur when they appear in the same region. Returns the
/// [C x dim] input-embedding table. Throws ValidationError("empty POI corpus")
/// when every count is zero.
Tensor train_skipgram(const PoiMatrix& poi, const SkipGramConfig& config);

/// Count-weighted mean of each region's category rows, [I x dim]. Regions
/// without POIs pool to the zero vector.
Tensor pool_regions(const Tensor& table, const PoiMatrix& poi);

/// MLP(pooled table rows): the POI-aware region embeddings before attention.
Var project_regions(Tape& tape, const Tensor& table, const PoiMatrix& poi, Mlp& mlp);

/// Per-head query/key/value maps, each [(d/H) x d].
struct AttentionParams {
  std::size_t heads = 0;
  std::vector<Parameter> query;
  std::vector<Parameter> key;
  std::vector<Parameter> value;

  /// Throws ConfigError unless dim % heads == 0.
  static AttentionParams glorot(std::size_t dim, std::size_t heads, Rng& rng);
  std::size_t dim() const { return query.front().value.cols(); }
  std::vector<Parameter*> parameters();
};

/// Region-wise multi-head self-attention followed by a residual add:
/// out_i = concat_h( sum_j alpha^h_ij V^h e_j ) + e_i,
/// alpha^h_i. = softmax_j( (Q^h e_i) . (K^h e_j) / sqrt(d/H) ).
Var self_attention(Tape& tape, Var embeddings, AttentionParams& params);

/// The attention matrices alpha^h ([I x I] per head) for inspection.
std::vector<Tensor> attention_weights(const Tensor& embeddings, AttentionParams& params);

/// Trainable POI stack: frozen skip-gram table -> projection MLP -> attention.
struct PoiEncoder {
  Tensor table;
  Mlp projection;
  AttentionParams attention;

  static PoiEncoder create(const PoiMatrix& poi, const SkipGramConfig& skipgram, std::size_t dim,
                           std::size_t heads, Rng& rng);
  Var forward(Tape& tape, const PoiMatrix& poi);
  std::vector<Parameter*> parameters();
};

}  // namespace autost
