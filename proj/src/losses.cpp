#include "autost/losses.hpp"

#include <cmath>
#include <string>

#include "autost/errors.hpp"
#include "autost/ops.hpp"

namespace autost {

void LossConfig::validate() const {
  auto fail = [](const std::string& key, double v, const std::string& range) {
    throw ConfigError(key + " must lie in " + range + " (got " + std::to_string(v) + ")");
  };
  if (!(beta >= 0.0 && beta <= 1.0)) fail("loss.beta", beta, "[0, 1]");
  if (!(tau > 0.0)) fail("loss.tau", tau, "(0, inf)");
  if (!(xi > 0.0 && xi < 1.0)) fail("loss.xi", xi, "(0, 1)");
  if (!(w1 >= 0.0 && w1 <= 1.0)) fail("loss.w1", w1, "[0, 1]");
  if (!(infobn_drop >= 0.0 && infobn_drop < 1.0)) fail("loss.infobn_drop", infobn_drop, "[0, 1)");
  if (!std::isfinite(eps_prime)) fail("loss.eps_prime", eps_prime, "the finite reals");
}

SharedNodes shared_nodes(const ContrastiveView& a, const ContrastiveView& b) {
  SharedNodes out;
  std::size_t i = 0, j = 0;
  while (i < a.nodes.size() && j < b.nodes.size()) {
    if (a.nodes[i] < b.nodes[j]) {
      ++i;
    } else if (b.nodes[j] < a.nodes[i]) {
      ++j;
    } else {
      out.first.push_back(i++);
      out.second.push_back(j++);
    }
  }
  return out;
}

namespace {

Var contrast(Var a, Var b, double tau) {
  require_same_shape(a.value(), b.value(), "contrastive loss");
  Var logp = log_softmax_rows(scale(cosine_matrix(a, b), 1.0 / tau));
  return scale(sum(diag(logp)), -1.0);
}

}  // namespace

Var info_nce(Var a, Var b, double tau) {
  if (a.rows() < 2) {
    throw DegenerateBatchError("InfoNCE needs at least 2 shared nodes (got " +
                               std::to_string(a.rows()) + ")");
  }
  return contrast(a, b, tau);
}

Var info_bn(Var h1, Var h1_aug, Var h2, Var h2_aug, double tau) {
  if (h1.rows() == 0 || h2.rows() == 0) throw DegenerateBatchError("InfoBN on an empty view");
  return add(contrast(h1, h1_aug, tau), contrast(h2, h2_aug, tau));
}

Var overall_loss(Var nce, Var bn, double beta) {
  return add(scale(nce, beta), scale(bn, 1.0 - beta));
}

double overall_loss(double nce, double bn, double beta) { return beta * nce + (1.0 - beta) * bn; }

double reward_r1(double loss, double eps_prime, double xi) { return loss > eps_prime ? 1.0 : xi; }

double reward_r2(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "reward_r2");
  if (a.rows() == 0) throw DegenerateBatchError("alignment reward needs at least 1 shared node");
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) total += cosine(a.row(i), b.row(i));
  return 1.0 - total / static_cast<double>(a.rows());
}

double combined_reward(double r1, double r2, double w1) { return w1 * r1 + (1.0 - w1) * r2; }

Var sampler_objective(double reward, Var lrec1, Var lrec2) {
  return scale(add(lrec1, lrec2), reward);
}

Var infobn_augment(Tape& tape, Var view_features, const ContrastiveView& view, double drop_rate,
                   Rng& rng, EncoderParams& params) {
  const auto kept = drop_edges(view.edges, drop_rate, rng);
  return encode(tape, view_relations(view, kept), view_features, params);
}

}  // namespace autost
