#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "autost/hetero_graph.hpp"
#include "autost/hgnn_encoder.hpp"
#include "autost/nn.hpp"
#include "autost/random.hpp"
#include "autost/tape.hpp"

namespace autost {

/// One learnable view sampler. Storage is never shared between the two samplers.
struct VgaeParams {
  Mlp mean;   // d -> d -> d
  Mlp std;    // d -> d -> d
  Mlp score;  // d -> d -> 1

  static VgaeParams glorot(const std::string& name, std::size_t dim, Rng& rng);
  std::vector<Parameter*> parameters();
};

struct NoiseConfig {
  double mu = 0.0;
  double sigma = 1.0;
};

/// I.i.d. Gaussian(mu, sigma) matrix. Throws ConfigError if sigma < 0.
Tensor draw_noise(std::size_t rows, std::size_t cols, const NoiseConfig& noise, Rng& rng);

/// H~ = noise * std_mlp(H) + mean_mlp(H), elementwise.
Var vgae_encode(Tape& tape, Var h, VgaeParams& params, const Tensor& noise);

/// Pairs to score, with positives first-class: positive[k] marks pairs that are edges of G.
struct CandidateSet {
  std::vector<Edge> pairs;
  std::vector<std::uint8_t> positive;
};

/// All edges of G plus up to `neg_per_node` uniformly drawn non-edges per node.
CandidateSet candidate_pairs(std::size_t nodes, const std::vector<Edge>& edges,
                             std::size_t neg_per_node, Rng& rng);

/// p_ij = score_mlp(h~_i * h~_j) per pair, as an [m x 1] column.
Var score_edges(Tape& tape, Var h_tilde, VgaeParams& params, const std::vector<Edge>& pairs);

/// Pairs with sigmoid(p) >= eps. Throws ConfigError unless 0 < eps < 1.
std::vector<Edge> sparsify(const Tensor& scores, const std::vector<Edge>& pairs, double eps);

struct WalkConfig {
  std::size_t walk_length = 8;
  std::size_t walks_per_seed = 4;
};

/// A sampled subgraph. `nodes` are sorted global ids; `edges` use local row
/// indices into `nodes`.
struct ContrastiveView {
  std::vector<std::size_t> nodes;
  std::vector<Edge> edges;
  std::vector<std::size_t> seeds;

  /// Local row of a global node id, or nodes.size() if absent.
  std::size_t local(std::size_t global) const;
};

/// Union of the nodes visited by `walks_per_seed` walks of `walk_length` steps
/// from each seed plus the induced edges. Each step moves to
/// sorted_neighbours[uniform_int(0, degree - 1)]; a walk stops early at a node
/// without neighbours. Throws ContractError on an empty or out-of-range seed list.
ContrastiveView random_walk_sample(std::size_t nodes, const std::vector<Edge>& edges,
                                   const std::vector<std::size_t>& seeds, const WalkConfig& config,
                                   Rng& rng);

/// Removes exactly round(rate * |edges|) edges chosen uniformly; survivors keep
/// their order. Throws ConfigError unless 0 <= rate < 1.
std::vector<Edge> drop_edges(const std::vector<Edge>& edges, double rate, Rng& rng);

/// sum_pos softplus(-p) + sum_neg softplus(p), the binary cross-entropy on sigmoid(p).
Var reconstruction_loss(Var scores, const std::vector<std::uint8_t>& positive);

struct ViewConfig {
  double eps = 0.5;
  WalkConfig walk;
  double seed_frac = 0.25;
  std::size_t neg_per_node = 5;
  NoiseConfig noise;
};

/// Everything needed to replay one sampler's reconstruction loss.
struct ViewSample {
  ContrastiveView view;
  std::vector<Edge> decoded;  // graph the walks ran on, global ids
  CandidateSet candidates;
  Tensor noise;
};

struct GeneratedViews {
  std::vector<std::size_t> seeds;
  std::array<ViewSample, 2> samples;
};

/// Uniform sample of max(2, round(frac * nodes)) distinct nodes, capped at `nodes`, sorted.
std::vector<std::size_t> sample_seeds(std::size_t nodes, double frac, Rng& rng);

/// Learned views: each sampler encodes H, scores one shared candidate set and
/// sparsifies it; both decoded graphs are then walked from one seed set.
/// Randomness comes from streams of (master_seed, counter).
GeneratedViews generate_views(std::size_t nodes, const std::vector<Edge>& graph_edges,
                              const Tensor& h, VgaeParams& first, VgaeParams& second,
                              const ViewConfig& config, std::uint64_t master_seed,
                              std::uint64_t counter);

/// Heuristic views: each view walks its own uniform edge-drop of G at `drop_rate`.
GeneratedViews generate_random_views(std::size_t nodes, const std::vector<Edge>& graph_edges,
                                     double drop_rate, const ViewConfig& config,
                                     std::uint64_t master_seed, std::uint64_t counter);

/// Replays a sampler's decode on stored noise and candidates.
Var sampler_reconstruction(Tape& tape, const Tensor& h, VgaeParams& params, const ViewSample& sample);

/// Rows of the full feature matrix for the view's nodes.
Var view_features(Var h0, const ContrastiveView& view);

/// The view as a single relation backed by the MOBILITY weight bank.
std::vector<RelationInput> view_relations(const ContrastiveView& view,
                                          const std::vector<Edge>& local_edges);

}  // namespace autost
