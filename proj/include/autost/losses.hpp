#pragma once

#include <vector>

#include "autost/hgnn_encoder.hpp"
#include "autost/random.hpp"
#include "autost/tape.hpp"
#include "autost/view_generator.hpp"

namespace autost {

struct LossConfig {
  double beta = 0.1;        // weight of InfoNCE against InfoBN
  double tau = 0.5;         // cosine temperature
  double eps_prime = 1.2;   // InfoMin reward threshold
  double xi = 0.1;          // reward when the loss is at or below eps_prime
  double w1 = 0.5;          // weight of R1 against R2
  double infobn_drop = 0.2; // edge-drop rate for the InfoBN augmentation

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Local rows of the nodes present in both views, ordered by global id.
struct SharedNodes {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  std::size_t size() const { return first.size(); }
};
SharedNodes shared_nodes(const ContrastiveView& a, const ContrastiveView& b);

/// sum_i -log softmax_j( cos(a_i, b_j) / tau )_i over aligned rows.
/// Throws DegenerateBatchError with fewer than 2 rows.
Var info_nce(Var a, Var b, double tau);

/// InfoNCE-shaped term of each view against its own augmentation, summed.
/// Throws DegenerateBatchError if either view is empty.
Var info_bn(Var h1, Var h1_aug, Var h2, Var h2_aug, double tau);

/// beta * nce + (1 - beta) * bn
Var overall_loss(Var nce, Var bn, double beta);
double overall_loss(double nce, double bn, double beta);

/// 1 if loss > eps_prime, else xi.
double reward_r1(double loss, double eps_prime, double xi);

/// 1 - mean row cosine of aligned rows. Throws DegenerateBatchError on no rows.
double reward_r2(const Tensor& a, const Tensor& b);

/// w1 * r1 + (1 - w1) * r2
double combined_reward(double r1, double r2, double w1);

/// reward * (lrec1 + lrec2) with the reward held constant.
Var sampler_objective(double reward, Var lrec1, Var lrec2);

/// Re-encodes a view after dropping a `drop_rate` fraction of its edges.
Var infobn_augment(Tape& tape, Var view_features, const ContrastiveView& view, double drop_rate,
                   Rng& rng, EncoderParams& params);

}  // namespace autost
