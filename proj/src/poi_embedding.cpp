#include "autost/poi_embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autost/errors.hpp"
#include "autost/ops.hpp"

namespace autost {
namespace {

double sigmoid_clamped(double x) {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

Tensor train_skipgram(const PoiMatrix& poi, const SkipGramConfig& cfg) {
  if (cfg.dim == 0) throw ConfigError("skip-gram dimension must be >= 1");
  if (cfg.window_cap == 0) throw ConfigError("poi.window_cap must be >= 1");
  const std::size_t c = poi.categories;

  std::vector<std::vector<std::size_t>> sentences;
  std::vector<double> frequency(c, 0.0);
  for (std::size_t i = 0; i < poi.regions; ++i) {
    std::vector<std::size_t> s;
    for (std::size_t cat = 0; cat < c; ++cat) {
      const auto reps = std::min<std::int64_t>(poi(i, cat), static_cast<std::int64_t>(cfg.window_cap));
      for (std::int64_t k = 0; k < reps; ++k) s.push_back(cat);
      frequency[cat] += static_cast<double>(std::max<std::int64_t>(reps, 0));
    }
    if (!s.empty()) sentences.push_back(std::move(s));
  }
  if (sentences.empty()) throw ValidationError("empty POI corpus");

  // Unigram^0.75 negative-sampling table.
  std::vector<double> noise_cum(c);
  double acc = 0.0;
  for (std::size_t cat = 0; cat < c; ++cat) noise_cum[cat] = acc += std::pow(frequency[cat], 0.75);

  Rng rng = make_rng(cfg.seed, "skipgram");
  const std::size_t d = cfg.dim;
  Tensor input(c, d), output(c, d);
  {
    std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d),
                                                0.5 / static_cast<double>(d));
    for (double& v : input.data()) v = init(rng);
  }

  std::size_t total_tokens = 0;
  for (const auto& s : sentences) total_tokens += s.size();
  const double total_steps = static_cast<double>(cfg.epochs * total_tokens);
  std::size_t step = 0;
  std::uniform_real_distribution<double> unit(0.0, acc);
  std::vector<double> grad_in(d);

  auto update = [&](std::size_t center, std::size_t target, double label, double lr) {
    auto in = input.row(center);
    auto out = output.row(target);
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += in[k] * out[k];
    const double g = lr * (label - sigmoid_clamped(dot));
    for (std::size_t k = 0; k < d; ++k) {
      grad_in[k] += g * out[k];
      out[k] += g * in[k];
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& s : sentences) {
      if (s.size() < 2) {
        step += s.size();
        continue;
      }
      std::uniform_int_distribution<std::size_t> other(0, s.size() - 2);
      for (std::size_t pos = 0; pos < s.size(); ++pos, ++step) {
        const double lr = cfg.learning_rate *
                          std::max(1e-4, 1.0 - static_cast<double>(step) / std::max(1.0, total_steps));
        const std::size_t center = s[pos];
        for (std::size_t n = 0; n < cfg.contexts_per_token; ++n) {
          std::size_t q = other(rng);
          if (q >= pos) ++q;  // skip the center position itself
          std::fill(grad_in.begin(), grad_in.end(), 0.0);
          update(center, s[q], 1.0, lr);
          for (std::size_t neg = 0; neg < cfg.negatives; ++neg) {
            const auto it = std::upper_bound(noise_cum.begin(), noise_cum.end(), unit(rng));
            const auto target = static_cast<std::size_t>(
                std::min<std::ptrdiff_t>(it - noise_cum.begin(), static_cast<std::ptrdiff_t>(c) - 1));
            update(center, target, 0.0, lr);
          }
          auto in = input.row(center);
          for (std::size_t k = 0; k < d; ++k) in[k] += grad_in[k];
        }
      }
    }
  }
  return input;
}

Tensor pool_regions(const Tensor& table, const PoiMatrix& poi) {
  if (table.rows() != poi.categories) {
    throw ShapeError("pool_regions: table " + shape_string(table) + " vs " +
                     std::to_string(poi.categories) + " categories");
  }
  Tensor pooled(poi.regions, table.cols());
  for (std::size_t i = 0; i < poi.regions; ++i) {
    double total = 0.0;
    auto out = pooled.row(i);
    for (std::size_t cat = 0; cat < poi.categories; ++cat) {
      const double w = static_cast<double>(poi(i, cat));
      if (w == 0.0) continue;
      total += w;
      auto row = table.row(cat);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * row[k];
    }
    if (total > 0.0) {
      for (double& v : out) v /= total;
    }
  }
  return pooled;
}

Var project_regions(Tape& tape, const Tensor& table, const PoiMatrix& poi, Mlp& mlp) {
  if (mlp.first.in_features() != table.cols()) {
    throw ShapeError("project_regions: table " + shape_string(table) + " vs MLP input " +
                     shape_string(mlp.first.weight.value));
  }
  return mlp.forward(tape, tape.constant(pool_regions(table, poi)));
}

AttentionParams AttentionParams::glorot(std::size_t dim, std::size_t heads, Rng& rng) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("attention: dimension " + std::to_string(dim) +
                      " is not divisible by head count " + std::to_string(heads));
  }
  AttentionParams p;
  p.heads = heads;
  const std::size_t width = dim / heads;
  for (std::size_t h = 0; h < heads; ++h) {
    const std::string tag = std::to_string(h);
    p.query.push_back({"attention.query." + tag, glorot_uniform(width, dim, rng)});
    p.key.push_back({"attention.key." + tag, glorot_uniform(width, dim, rng)});
    p.value.push_back({"attention.value." + tag, glorot_uniform(width, dim, rng)});
  }
  return p;
}

std::vector<Parameter*> AttentionParams::parameters() {
  std::vector<Parameter*> out;
  for (std::size_t h = 0; h < heads; ++h) {
    out.push_back(&query[h]);
    out.push_back(&key[h]);
    out.push_back(&value[h]);
  }
  return out;
}

namespace {

void check_attention_shapes(const Tensor& e, const AttentionParams& p) {
  if (p.heads == 0 || p.query.size() != p.heads) throw ConfigError("attention: no heads");
  const std::size_t d = p.query.front().value.cols();
  if (d % p.heads != 0) {
    throw ConfigError("attention: dimension " + std::to_string(d) +
                      " is not divisible by head count " + std::to_string(p.heads));
  }
  if (e.cols() != d) {
    throw ShapeError("self_attention: embeddings " + shape_string(e) + " vs query " +
                     shape_string(p.query.front().value));
  }
}

Var head_scores(Tape& tape, Var e, AttentionParams& p, std::size_t h) {
  const double width = static_cast<double>(p.query[h].value.rows());
  Var q = matmul_nt(e, tape.param(p.query[h]));
  Var k = matmul_nt(e, tape.param(p.key[h]));
  return softmax_rows(scale(matmul_nt(q, k), 1.0 / std::sqrt(width)));
}

}  // namespace

Var self_attention(Tape& tape, Var e, AttentionParams& p) {
  check_attention_shapes(e.value(), p);
  std::vector<Var> heads;
  heads.reserve(p.heads);
  for (std::size_t h = 0; h < p.heads; ++h) {
    Var alpha = head_scores(tape, e, p, h);
    heads.push_back(matmul(alpha, matmul_nt(e, tape.param(p.value[h]))));
  }
  return add(concat_cols(heads), e);
}

std::vector<Tensor> attention_weights(const Tensor& embeddings, AttentionParams& p) {
  check_attention_shapes(embeddings, p);
  Tape tape;
  Var e = tape.constant(embeddings);
  std::vector<Tensor> out;
  for (std::size_t h = 0; h < p.heads; ++h) out.push_back(head_scores(tape, e, p, h).value());
  return out;
}

PoiEncoder PoiEncoder::create(const PoiMatrix& poi, const SkipGramConfig& skipgram,
                              std::size_t dim, std::size_t heads, Rng& rng) {
  PoiEncoder enc;
  enc.table = train_skipgram(poi, skipgram);
  enc.projection = Mlp::glorot("poi.mlp", skipgram.dim, dim, dim, rng);
  enc.attention = AttentionParams::glorot(dim, heads, rng);
  return enc;
}

Var PoiEncoder::forward(Tape& tape, const PoiMatrix& poi) {
  return self_attention(tape, project_regions(tape, table, poi, projection), attention);
}

std::vector<Parameter*> PoiEncoder::parameters() {
  auto out = projection.parameters();
  for (Parameter* p : attention.parameters()) out.push_back(p);
  return out;
}

}  // namespace autost
