#include "autost/view_generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "autost/errors.hpp"
#include "autost/ops.hpp"

namespace autost {

VgaeParams VgaeParams::glorot(const std::string& name, std::size_t dim, Rng& rng) {
  VgaeParams p;
  p.mean = Mlp::glorot(name + ".mean", dim, dim, dim, rng);
  p.std = Mlp::glorot(name + ".std", dim, dim, dim, rng);
  p.score = Mlp::glorot(name + ".score", dim, dim, 1, rng);
  return p;
}

std::vector<Parameter*> VgaeParams::parameters() {
  std::vector<Parameter*> out;
  for (Mlp* m : {&mean, &std, &score})
    for (Parameter* p : m->parameters()) out.push_back(p);
  return out;
}

Tensor draw_noise(std::size_t rows, std::size_t cols, const NoiseConfig& noise, Rng& rng) {
  if (!(noise.sigma >= 0.0)) {
    throw ConfigError("view.noise_sigma must be >= 0 (got " + std::to_string(noise.sigma) + ")");
  }
  if (noise.sigma == 0.0) return Tensor(rows, cols, noise.mu);
  return gaussian(rows, cols, noise.mu, noise.sigma, rng);
}

Var vgae_encode(Tape& tape, Var h, VgaeParams& params, const Tensor& noise) {
  require_same_shape(h.value(), noise, "vgae_encode");
  Var spread = params.std.forward(tape, h);
  Var centre = params.mean.forward(tape, h);
  return add(mul(tape.constant(noise), spread), centre);
}

CandidateSet candidate_pairs(std::size_t nodes, const std::vector<Edge>& edges,
                             std::size_t neg_per_node, Rng& rng) {
  CandidateSet out;
  std::set<Edge> taken(edges.begin(), edges.end());
  for (const Edge& e : edges) {
    if (e.u >= nodes || e.v >= nodes) {
      throw ContractError("candidate_pairs: edge endpoint out of range (" +
                          std::to_string(std::max(e.u, e.v)) + " vs " + std::to_string(nodes) + ")");
    }
    out.pairs.push_back(e);
    out.positive.push_back(1);
  }
  if (nodes < 2) return out;
  std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t k = 0; k < neg_per_node; ++k) {
      // Bounded retries keep dense graphs from looping.
      for (int attempt = 0; attempt < 8; ++attempt) {
        const std::size_t j = pick(rng);
        if (j == i) continue;
        const Edge e{std::min(i, j), std::max(i, j)};
        if (!taken.insert(e).second) continue;
        out.pairs.push_back(e);
        out.positive.push_back(0);
        break;
      }
    }
  }
  return out;
}

Var score_edges(Tape& tape, Var h_tilde, VgaeParams& params, const std::vector<Edge>& pairs) {
  std::vector<std::size_t> us, vs;
  us.reserve(pairs.size());
  vs.reserve(pairs.size());
  for (const Edge& e : pairs) {
    if (e.u >= h_tilde.rows() || e.v >= h_tilde.rows()) {
      throw ContractError("score_edges: pair endpoint out of range (" +
                          std::to_string(std::max(e.u, e.v)) + " vs " +
                          std::to_string(h_tilde.rows()) + ")");
    }
    us.push_back(e.u);
    vs.push_back(e.v);
  }
  Var product = mul(gather_rows(h_tilde, std::move(us)), gather_rows(h_tilde, std::move(vs)));
  return params.score.forward(tape, product);
}

std::vector<Edge> sparsify(const Tensor& scores, const std::vector<Edge>& pairs, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw ConfigError("view.eps must lie in (0, 1) (got " + std::to_string(eps) + ")");
  }
  if (scores.rows() != pairs.size() || scores.cols() != 1) {
    throw ShapeError("sparsify: scores " + shape_string(scores) + " vs " +
                     std::to_string(pairs.size()) + " pairs");
  }
  std::vector<Edge> kept;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (1.0 / (1.0 + std::exp(-scores(k, 0))) >= eps) kept.push_back(pairs[k]);
  }
  return canonical_edges(std::move(kept));
}

std::size_t ContrastiveView::local(std::size_t global) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), global);
  return it != nodes.end() && *it == global ? static_cast<std::size_t>(it - nodes.begin()) : nodes.size();
}

ContrastiveView random_walk_sample(std::size_t nodes, const std::vector<Edge>& edges,
                                   const std::vector<std::size_t>& seeds, const WalkConfig& config,
                                   Rng& rng) {
  if (seeds.empty()) throw ContractError("random_walk_sample: empty seed list");
  std::vector<std::vector<std::size_t>> adjacency(nodes);
  for (const Edge& e : edges) {
    if (e.u >= nodes || e.v >= nodes) {
      throw ContractError("random_walk_sample: edge endpoint out of range");
    }
    adjacency[e.u].push_back(e.v);
    adjacency[e.v].push_back(e.u);
  }
  for (auto& list : adjacency) std::sort(list.begin(), list.end());

  std::vector<bool> visited(nodes, false);
  for (std::size_t seed : seeds) {
    if (seed >= nodes) {
      throw ContractError("random_walk_sample: seed " + std::to_string(seed) + " out of range (" +
                          std::to_string(nodes) + " nodes)");
    }
    visited[seed] = true;
    for (std::size_t w = 0; w < config.walks_per_seed; ++w) {
      std::size_t cur = seed;
      for (std::size_t step = 0; step < config.walk_length; ++step) {
        const auto& nbrs = adjacency[cur];
        if (nbrs.empty()) break;
        cur = nbrs[std::uniform_int_distribution<std::size_t>(0, nbrs.size() - 1)(rng)];
        visited[cur] = true;
      }
    }
  }

  ContrastiveView view;
  for (std::size_t i = 0; i < nodes; ++i)
    if (visited[i]) view.nodes.push_back(i);
  view.seeds = seeds;
  std::sort(view.seeds.begin(), view.seeds.end());
  view.seeds.erase(std::unique(view.seeds.begin(), view.seeds.end()), view.seeds.end());
  for (const Edge& e : canonical_edges(edges)) {
    if (visited[e.u] && visited[e.v]) view.edges.push_back({view.local(e.u), view.local(e.v)});
  }
  return view;
}

std::vector<Edge> drop_edges(const std::vector<Edge>& edges, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("edge drop rate must lie in [0, 1) (got " + std::to_string(rate) + ")");
  }
  const auto drop = static_cast<std::size_t>(std::llround(rate * static_cast<double>(edges.size())));
  if (drop == 0) return edges;
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first `drop` slots are the removed edges.
  for (std::size_t k = 0; k < drop; ++k) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(k, order.size() - 1)(rng);
    std::swap(order[k], order[j]);
  }
  std::vector<bool> removed(edges.size(), false);
  for (std::size_t k = 0; k < drop; ++k) removed[order[k]] = true;
  std::vector<Edge> out;
  out.reserve(edges.size() - drop);
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (!removed[k]) out.push_back(edges[k]);
  return out;
}

Var reconstruction_loss(Var scores, const std::vector<std::uint8_t>& positive) {
  if (scores.cols() != 1 || scores.rows() != positive.size()) {
    throw ShapeError("reconstruction_loss: scores " + shape_string(scores.value()) + " vs " +
                     std::to_string(positive.size()) + " labels");
  }
  Tensor sign(positive.size(), 1);
  for (std::size_t k = 0; k < positive.size(); ++k) sign(k, 0) = positive[k] ? -1.0 : 1.0;
  return sum(softplus(mul(scores, scores.tape().constant(std::move(sign)))));
}

std::vector<std::size_t> sample_seeds(std::size_t nodes, double frac, Rng& rng) {
  if (!(frac > 0.0 && frac <= 1.0)) {
    throw ConfigError("view.seed_frac must lie in (0, 1] (got " + std::to_string(frac) + ")");
  }
  if (nodes == 0) throw ContractError("sample_seeds: graph has no nodes");
  std::size_t count = static_cast<std::size_t>(std::llround(frac * static_cast<double>(nodes)));
  count = std::min(nodes, std::max<std::size_t>(2, count));
  std::vector<std::size_t> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(k, nodes - 1)(rng);
    std::swap(order[k], order[j]);
  }
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

void check_walk_config(const ViewConfig& config) {
  if (config.walk.walks_per_seed == 0) throw ConfigError("view.walks_per_seed must be >= 1");
}

}  // namespace

GeneratedViews generate_views(std::size_t nodes, const std::vector<Edge>& graph_edges,
                              const Tensor& h, VgaeParams& first, VgaeParams& second,
                              const ViewConfig& config, std::uint64_t master_seed,
                              std::uint64_t counter) {
  check_walk_config(config);
  if (h.rows() != nodes) {
    throw ShapeError("generate_views: embeddings " + shape_string(h) + " vs " +
                     std::to_string(nodes) + " nodes");
  }
  GeneratedViews out;
  Rng seed_rng = make_rng(master_seed, "view.seeds", counter);
  out.seeds = sample_seeds(nodes, config.seed_frac, seed_rng);

  Rng cand_rng = make_rng(master_seed, "view.candidates", counter);
  const CandidateSet candidates = candidate_pairs(nodes, graph_edges, config.neg_per_node, cand_rng);

  std::array<VgaeParams*, 2> samplers{&first, &second};
  for (std::size_t v = 0; v < 2; ++v) {
    const std::string tag = std::to_string(v + 1);
    Rng noise_rng = make_rng(master_seed, "view.noise." + tag, counter);
    Rng walk_rng = make_rng(master_seed, "view.walk." + tag, counter);
    ViewSample& s = out.samples[v];
    s.noise = draw_noise(h.rows(), h.cols(), config.noise, noise_rng);
    s.candidates = candidates;
    Tape tape;
    Var h_tilde = vgae_encode(tape, tape.constant(h), *samplers[v], s.noise);
    const Tensor scores = score_edges(tape, h_tilde, *samplers[v], s.candidates.pairs).value();
    s.decoded = sparsify(scores, s.candidates.pairs, config.eps);
    s.view = random_walk_sample(nodes, s.decoded, out.seeds, config.walk, walk_rng);
  }
  return out;
}

GeneratedViews generate_random_views(std::size_t nodes, const std::vector<Edge>& graph_edges,
                                     double drop_rate, const ViewConfig& config,
                                     std::uint64_t master_seed, std::uint64_t counter) {
  check_walk_config(config);
  GeneratedViews out;
  Rng seed_rng = make_rng(master_seed, "view.seeds", counter);
  out.seeds = sample_seeds(nodes, config.seed_frac, seed_rng);
  for (std::size_t v = 0; v < 2; ++v) {
    const std::string tag = std::to_string(v + 1);
    Rng drop_rng = make_rng(master_seed, "view.random_drop." + tag, counter);
    Rng walk_rng = make_rng(master_seed, "view.walk." + tag, counter);
    ViewSample& s = out.samples[v];
    s.decoded = drop_edges(graph_edges, drop_rate, drop_rng);
    s.view = random_walk_sample(nodes, s.decoded, out.seeds, config.walk, walk_rng);
  }
  return out;
}

Var sampler_reconstruction(Tape& tape, const Tensor& h, VgaeParams& params, const ViewSample& sample) {
  Var h_tilde = vgae_encode(tape, tape.constant(h), params, sample.noise);
  return reconstruction_loss(score_edges(tape, h_tilde, params, sample.candidates.pairs),
                             sample.candidates.positive);
}

Var view_features(Var h0, const ContrastiveView& view) { return gather_rows(h0, view.nodes); }

std::vector<RelationInput> view_relations(const ContrastiveView& view,
                                          const std::vector<Edge>& local_edges) {
  return {{Relation::Mobility, normalized_adjacency(view.nodes.size(), local_edges)}};
}

}  // namespace autost
