#include <cmath>
#include <set>

#include "autost/errors.hpp"
#include "autost/gradcheck.hpp"
#include "autost/losses.hpp"
#include "autost/ops.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace autost {
namespace {

using testing::nce_oracle;

Tensor repeated_row(std::size_t n, const std::vector<double>& row) {
  Tensor t(n, row.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < row.size(); ++j) t(i, j) = row[j];
  return t;
}

double value(Var v) { return v.value().item(); }

TEST(InfoNce, IdenticalEmbeddingsGiveNLogN) {
  for (std::size_t n : {2u, 5u, 9u}) {
    Tape tape;
    Var a = tape.constant(repeated_row(n, {0.3, -1.0, 2.0}));
    EXPECT_NEAR(value(info_nce(a, a, 0.5)), static_cast<double>(n) * std::log(static_cast<double>(n)), 1e-12);
  }
}

TEST(InfoNce, ThreeNodeDoubleLoopOracle) {
  Rng rng(1);
  Tensor a = gaussian(3, 4, 0.0, 1.0, rng), b = gaussian(3, 4, 0.0, 1.0, rng);
  Tape tape;
  EXPECT_NEAR(value(info_nce(tape.constant(a), tape.constant(b), 0.5)), nce_oracle(a, b, 0.5), 1e-10);
}

TEST(InfoNce, FewerThanTwoRowsIsDegenerate) {
  Tape tape;
  Var one = tape.constant(Tensor(1, 3, 1.0));
  EXPECT_THROW(info_nce(one, one, 0.5), DegenerateBatchError);
}

TEST(InfoNceProperty, PerNodeTermsNonNegative) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Tensor a = gaussian(4, 3, 0.0, 1.0, rng), b = gaussian(4, 3, 0.0, 1.0, rng);
    for (std::size_t i = 0; i < 4; ++i) {
      // Term i of the sum, evaluated directly.
      double denom = 0.0;
      for (std::size_t j = 0; j < 4; ++j) denom += std::exp(cosine(a.row(i), b.row(j)) / 0.5);
      EXPECT_GE(-std::log(std::exp(cosine(a.row(i), b.row(i)) / 0.5) / denom), 0.0);
    }
    Tape tape;
    EXPECT_GE(value(info_nce(tape.constant(a), tape.constant(b), 0.5)), 0.0);
  }
}

TEST(InfoBn, IdenticalAugmentationGivesTwoNLogN) {
  Tape tape;
  Var h = tape.constant(repeated_row(4, {1.0, 2.0}));
  EXPECT_NEAR(value(info_bn(h, h, h, h, 0.5)), 2.0 * 4.0 * std::log(4.0), 1e-12);
}

TEST(InfoBn, TwoNodeOrthogonalClosedForm) {
  Tape tape;
  Var h1 = tape.constant(Tensor::from_rows({{1, 0}, {0, 1}}));
  Var h2 = tape.constant(Tensor::from_rows({{3, 4}}));  // a single node contributes -log 1 = 0
  const double tau = 0.5;
  const double per_node = -std::log(std::exp(1.0 / tau) / (std::exp(1.0 / tau) + 1.0));
  EXPECT_NEAR(value(info_bn(h1, h1, h2, h2, tau)), 2.0 * per_node, 1e-12);
}

TEST(InfoBn, EmptyViewIsDegenerate) {
  Tape tape;
  Var h = tape.constant(Tensor(2, 3, 1.0));
  Var empty = tape.constant(Tensor(0, 3));
  EXPECT_THROW(info_bn(h, h, empty, empty, 0.5), DegenerateBatchError);
}

TEST(InfoBnProperty, NonNegativeOnRandomInputs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Tape tape;
    auto g = [&](std::size_t n) { return tape.constant(gaussian(n, 3, 0.0, 1.0, rng)); };
    EXPECT_GE(value(info_bn(g(5), g(5), g(3), g(3), 0.5)), 0.0);
  }
}

TEST(OverallLoss, Examples) {
  EXPECT_EQ(overall_loss(2.0, 10.0, 1.0), 2.0);
  EXPECT_EQ(overall_loss(2.0, 10.0, 0.0), 10.0);
  EXPECT_NEAR(overall_loss(2.0, 10.0, 0.1), 9.2, 1e-12);
  Tape tape;
  EXPECT_NEAR(value(overall_loss(tape.constant(Tensor::scalar(2.0)), tape.constant(Tensor::scalar(10.0)), 0.1)),
              9.2, 1e-12);
}

TEST(RewardR1, StrictThreshold) {
  EXPECT_EQ(reward_r1(1.2, 1.2, 0.1), 0.1);
  EXPECT_EQ(reward_r1(1.21, 1.2, 0.1), 1.0);
  EXPECT_EQ(reward_r1(0.0, 1.2, 0.1), 0.1);
}

TEST(RewardR1Property, TakesExactlyTwoValues) {
  std::set<double> seen;
  for (int k = -100; k <= 100; ++k) seen.insert(reward_r1(k * 0.05, 1.2, 0.1));
  EXPECT_EQ(seen, (std::set<double>{0.1, 1.0}));
}

TEST(RewardR2, Examples) {
  Tensor a = Tensor::from_rows({{1, 2}, {3, -1}});
  EXPECT_NEAR(reward_r2(a, a), 0.0, 1e-15);
  EXPECT_NEAR(reward_r2(Tensor::from_rows({{1, 0}, {0, 2}}), Tensor::from_rows({{0, 5}, {-3, 0}})), 1.0, 1e-15);
  EXPECT_NEAR(reward_r2(Tensor::from_rows({{1, 0}, {1, 0}}), Tensor::from_rows({{2, 0}, {0, 1}})), 0.5, 1e-15);
  EXPECT_THROW(reward_r2(Tensor(0, 2), Tensor(0, 2)), DegenerateBatchError);
}

TEST(CombinedReward, Examples) {
  EXPECT_EQ(combined_reward(0.7, 0.2, 1.0), 0.7);
  EXPECT_EQ(combined_reward(1.0, 0.0, 0.5), 0.5);
  EXPECT_NEAR(combined_reward(0.1, 0.3, 0.5), 0.2, 1e-15);
}

TEST(CombinedRewardProperty, ExactBounds) {
  const double xi = 0.1, w1 = 0.5;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    Tensor a = gaussian(6, 3, 0.0, 1.0, rng), b = gaussian(6, 3, 0.0, 1.0, rng);
    const double r2 = reward_r2(a, b);
    EXPECT_GE(r2, 0.0);
    EXPECT_LE(r2, 2.0);
    for (double loss : {0.0, 5.0}) {
      const double r = combined_reward(reward_r1(loss, 1.2, xi), r2, w1);
      EXPECT_GE(r, w1 * xi);
      EXPECT_LE(r, w1 + (1.0 - w1) * 2.0);
    }
  }
}

TEST(SamplerObjective, GradientScalesWithReward) {
  Rng rng(3);
  Tensor x = gaussian(3, 2, 0.0, 1.0, rng);
  auto grads = [&](double reward) {
    Tape tape;
    Var v = tape.variable(x);
    Var l1 = sum(mul(v, v));
    Var l2 = sum(exp(v));
    Var obj = sampler_objective(reward, l1, l2);
    tape.backward(obj);
    return std::make_pair(obj.value().item(), tape.grad(v));
  };
  auto [zero_obj, zero_grad] = grads(0.0);
  EXPECT_EQ(zero_obj, 0.0);
  for (double g : zero_grad.data()) EXPECT_EQ(g, 0.0);
  auto [one_obj, one_grad] = grads(1.0);
  auto [half_obj, half_grad] = grads(0.5);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double direct = 2.0 * x.data()[k] + std::exp(x.data()[k]);
    EXPECT_NEAR(one_grad.data()[k], direct, 1e-12);
    EXPECT_EQ(half_grad.data()[k], 0.5 * one_grad.data()[k]);
  }
  EXPECT_EQ(half_obj, 0.5 * one_obj);
}

TEST(LossProperty, CosineLossesAreScaleInvariant) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Tensor a = gaussian(5, 3, 0.0, 1.0, rng), b = gaussian(5, 3, 0.0, 1.0, rng);
    Tensor c = gaussian(4, 3, 0.0, 1.0, rng), d = gaussian(4, 3, 0.0, 1.0, rng);
    Tape tape;
    auto k = [&](const Tensor& t) { return tape.constant(t); };
    const double nce = value(info_nce(k(a), k(b), 0.5));
    const double bn = value(info_bn(k(a), k(b), k(c), k(d), 0.5));
    for (double s : {0.5, 3.0}) {
      auto sc = [&](const Tensor& t) {
        Tensor out = t;
        for (double& v : out.data()) v *= s;
        return tape.constant(out);
      };
      EXPECT_NEAR(value(info_nce(sc(a), sc(b), 0.5)), nce, 1e-9);
      EXPECT_NEAR(value(info_bn(sc(a), sc(b), sc(c), sc(d), 0.5)), bn, 1e-9);
    }
  }
}

TEST(LossProperty, GradientChecks) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<Tensor> in{gaussian(4, 3, 0.0, 1.0, rng), gaussian(4, 3, 0.0, 1.0, rng),
                           gaussian(3, 3, 0.0, 1.0, rng), gaussian(3, 3, 0.0, 1.0, rng)};
    auto nce = [](Tape&, const std::vector<Var>& v) { return info_nce(v[0], v[1], 0.5); };
    auto bn = [](Tape&, const std::vector<Var>& v) { return info_bn(v[0], v[1], v[2], v[3], 0.5); };
    auto total = [](Tape&, const std::vector<Var>& v) {
      return overall_loss(info_nce(v[0], v[1], 0.5), info_bn(v[0], v[1], v[2], v[3], 0.5), 0.1);
    };
    EXPECT_LT(check_gradients(nce, in).max_relative_error, 1e-4);
    EXPECT_LT(check_gradients(bn, in).max_relative_error, 1e-4);
    EXPECT_LT(check_gradients(total, in).max_relative_error, 1e-4);
  }
}

TEST(SharedNodes, IntersectsSortedViews) {
  ContrastiveView a{{1, 3, 4, 8}, {}, {}}, b{{0, 3, 8, 9}, {}, {}};
  SharedNodes s = shared_nodes(a, b);
  EXPECT_EQ(s.first, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(s.second, (std::vector<std::size_t>{1, 2}));
}

TEST(InfobnAugment, ZeroDropEqualsPlainEncode) {
  Rng rng(2);
  EncoderParams params = EncoderParams::glorot(3, 2, rng);
  ContrastiveView view{{0, 1, 2, 3}, {{0, 1}, {1, 2}, {2, 3}}, {0}};
  Tensor h = gaussian(4, 3, 0.0, 1.0, rng);
  Tape tape;
  Var hv = tape.constant(h);
  Tensor plain = encode(tape, view_relations(view, view.edges), hv, params).value();
  Rng drop_rng(5);
  EXPECT_EQ(infobn_augment(tape, hv, view, 0.0, drop_rng, params).value(), plain);
  ContrastiveView bare{{0, 1, 2, 3}, {}, {0}};
  Tensor bare_plain = encode(tape, view_relations(bare, {}), hv, params).value();
  EXPECT_EQ(infobn_augment(tape, hv, bare, 0.5, drop_rng, params).value(), bare_plain);
}

TEST(InfobnAugment, HalfDropMatchesReplayedSurvivors) {
  Rng rng(3);
  EncoderParams params = EncoderParams::glorot(3, 2, rng);
  ContrastiveView view;
  for (std::size_t i = 0; i < 9; ++i) view.nodes.push_back(i);
  for (std::size_t i = 0; i < 8; ++i) view.edges.push_back({i, i + 1});
  Tensor h = gaussian(9, 3, 0.0, 1.0, rng);
  Rng a(21), b(21);
  Tape tape;
  Var hv = tape.constant(h);
  Tensor aug = infobn_augment(tape, hv, view, 0.5, a, params).value();
  auto survivors = drop_edges(view.edges, 0.5, b);
  EXPECT_EQ(survivors.size(), 4u);
  EXPECT_EQ(aug, encode(tape, view_relations(view, survivors), hv, params).value());
}

TEST(LossConfig, ValidateRejectsOutOfRange) {
  EXPECT_NO_THROW(LossConfig{}.validate());
  EXPECT_THROW((LossConfig{.beta = 1.5}).validate(), ConfigError);
  EXPECT_THROW((LossConfig{.tau = 0.0}).validate(), ConfigError);
  EXPECT_THROW((LossConfig{.xi = 1.0}).validate(), ConfigError);
  EXPECT_THROW((LossConfig{.w1 = -0.1}).validate(), ConfigError);
  EXPECT_THROW((LossConfig{.infobn_drop = 1.0}).validate(), ConfigError);
}

}  // namespace
}  // namespace autost
