#include "autost/gradcheck_suite.hpp"

#include <algorithm>
#include <functional>

#include "autost/gradcheck.hpp"
#include "autost/hgnn_encoder.hpp"
#include "autost/losses.hpp"
#include "autost/ops.hpp"
#include "autost/poi_embedding.hpp"
#include "autost/view_generator.hpp"

namespace autost {
namespace {

// A random linear readout keeps the scalar loss free of accidental symmetries.
Var readout(Tape& tape, Var x, Rng& rng) {
  return sum(mul(x, tape.constant(gaussian(x.rows(), x.cols(), 0.0, 1.0, rng))));
}

// Random biases keep ReLU pre-activations away from the kink at 0.
void jitter_biases(Mlp& m, Rng& rng) {
  for (Linear* l : {&m.first, &m.second}) l->bias.value = gaussian(1, l->out_features(), 0.0, 0.5, rng);
}

std::vector<Parameter*> with(std::vector<Parameter*> params, std::initializer_list<Parameter*> more) {
  params.insert(params.end(), more.begin(), more.end());
  return params;
}

GradCheckResult attention_point(Rng& rng) {
  AttentionParams att = AttentionParams::glorot(6, 2, rng);
  Parameter e{"e", gaussian(5, 6, 0.0, 1.0, rng)};
  Rng readout_rng(rng());
  const auto seed = readout_rng();
  return check_parameter_gradients(
      [&](Tape& tape) {
        Rng r(seed);
        return readout(tape, self_attention(tape, tape.param(e), att), r);
      },
      with(att.parameters(), {&e}));
}

GradCheckResult encoder_point(Rng& rng) {
  const std::size_t n = 6;
  std::vector<Edge> a, b;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) {
      const auto coin = rng() % 3;
      if (coin == 0) a.push_back({u, v});
      if (coin == 1) b.push_back({u, v});
    }
  const std::vector<RelationInput> rel{{Relation::Mobility, normalized_adjacency(n, a)},
                                       {Relation::Poi, normalized_adjacency(n, b)}};
  EncoderParams params = EncoderParams::glorot(4, 2, rng);
  Parameter h0{"h0", gaussian(n, 4, 0.0, 1.0, rng)};
  const auto seed = rng();
  std::vector<Parameter*> ps = {&h0};
  for (std::size_t l = 0; l < params.layers(); ++l) {
    ps.push_back(&params.weight(l, Relation::Mobility));
    ps.push_back(&params.weight(l, Relation::Poi));
  }
  return check_parameter_gradients(
      [&](Tape& tape) {
        Rng r(seed);
        return readout(tape, encode(tape, rel, tape.param(h0), params), r);
      },
      ps);
}

GradCheckResult vgae_point(Rng& rng) {
  VgaeParams p = VgaeParams::glorot("s", 4, rng);
  jitter_biases(p.mean, rng);
  jitter_biases(p.std, rng);
  Parameter h{"h", gaussian(5, 4, 0.0, 1.0, rng)};
  const Tensor noise = gaussian(5, 4, 0.0, 1.0, rng);
  const auto seed = rng();
  auto ps = with(p.mean.parameters(), {&h});
  for (Parameter* q : p.std.parameters()) ps.push_back(q);
  return check_parameter_gradients(
      [&](Tape& tape) {
        Rng r(seed);
        return readout(tape, vgae_encode(tape, tape.param(h), p, noise), r);
      },
      ps);
}

GradCheckResult reconstruction_point(Rng& rng) {
  VgaeParams p = VgaeParams::glorot("s", 4, rng);
  jitter_biases(p.score, rng);
  Parameter ht{"h_tilde", gaussian(6, 4, 0.0, 1.0, rng)};
  const CandidateSet cand = candidate_pairs(6, {{0, 1}, {1, 2}, {2, 3}, {4, 5}}, 2, rng);
  return check_parameter_gradients(
      [&](Tape& tape) {
        return reconstruction_loss(score_edges(tape, tape.param(ht), p, cand.pairs), cand.positive);
      },
      with(p.score.parameters(), {&ht}));
}

struct LossInputs {
  Parameter a, b, c, d;
};

LossInputs loss_inputs(Rng& rng) {
  return {{"a", gaussian(5, 4, 0.0, 1.0, rng)},
          {"b", gaussian(5, 4, 0.0, 1.0, rng)},
          {"c", gaussian(4, 4, 0.0, 1.0, rng)},
          {"d", gaussian(4, 4, 0.0, 1.0, rng)}};
}

GradCheckResult nce_point(Rng& rng) {
  LossInputs in = loss_inputs(rng);
  return check_parameter_gradients(
      [&](Tape& tape) { return info_nce(tape.param(in.a), tape.param(in.b), 0.5); }, {&in.a, &in.b});
}

GradCheckResult bn_point(Rng& rng) {
  LossInputs in = loss_inputs(rng);
  return check_parameter_gradients(
      [&](Tape& tape) {
        return info_bn(tape.param(in.a), tape.param(in.b), tape.param(in.c), tape.param(in.d), 0.5);
      },
      {&in.a, &in.b, &in.c, &in.d});
}

GradCheckResult overall_point(Rng& rng) {
  LossInputs in = loss_inputs(rng);
  return check_parameter_gradients(
      [&](Tape& tape) {
        Var a = tape.param(in.a), b = tape.param(in.b);
        return overall_loss(info_nce(a, b, 0.5),
                            info_bn(a, b, tape.param(in.c), tape.param(in.d), 0.5), 0.1);
      },
      {&in.a, &in.b, &in.c, &in.d});
}

}  // namespace

std::vector<SuiteEntry> run_gradcheck_suite(std::size_t points, std::uint64_t seed) {
  const std::vector<std::pair<std::string, std::function<GradCheckResult(Rng&)>>> checks = {
      {"attention", attention_point},       {"encoder", encoder_point},
      {"vgae_encode", vgae_point},          {"reconstruction", reconstruction_point},
      {"info_nce", nce_point},              {"info_bn", bn_point},
      {"overall_loss", overall_point},
  };
  std::vector<SuiteEntry> out;
  for (const auto& [name, check] : checks) {
    SuiteEntry entry{name, 0.0, points, 0};
    Rng rng = make_rng(seed, "gradcheck." + name);
    for (std::size_t k = 0; k < points; ++k) {
      const GradCheckResult r = check(rng);
      entry.max_relative_error = std::max(entry.max_relative_error, r.max_relative_error);
      entry.entries += r.entries_checked;
    }
    out.push_back(entry);
  }
  return out;
}

}  // namespace autost
