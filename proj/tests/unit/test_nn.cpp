#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "alforge/error.hpp"
#include "alforge/nn.hpp"
#include "alforge/oracles.hpp"
#include "alforge/rng.hpp"

using namespace alforge;
using nn::Activation;
using nn::Shape;

namespace {

nn::ModelParams random_params(std::uint64_t seed, Shape s, Activation a = Activation::relu) {
  return nn::init_params(seed, s, 0.8, a);
}

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// W2 set so that logits are exactly `target` for any input: zero W1, b1, W2
// and b2 = target.
nn::ModelParams constant_logits(std::vector<double> target, std::size_t in = 2) {
  nn::ModelParams p(Shape{in, 3, target.size()}, Activation::relu);
  std::copy(target.begin(), target.end(), p.b2().begin());
  return p;
}

}  // namespace

TEST(Forward, ZeroParamsGiveUniform) {
  for (std::size_t j : {2u, 3u, 10u}) {
    nn::ModelParams p(Shape{4, 5, j}, Activation::tanh);
    const std::vector<double> x{0.3, -1.0, 2.0, 7.5};
    const auto pr = nn::forward(p, x);
    for (double v : pr.probs) EXPECT_DOUBLE_EQ(v, 1.0 / static_cast<double>(j));
  }
}

TEST(Forward, SymmetricLogitsHalfHalf) {
  const auto pr = nn::softmax(std::vector<double>{0.0, 0.0});
  EXPECT_DOUBLE_EQ(pr[0], 0.5);
  EXPECT_DOUBLE_EQ(pr[1], 0.5);
}

TEST(Forward, MatchesIndependentImplementation) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Activation act = trial % 2 ? Activation::tanh : Activation::relu;
    const Shape s{1 + static_cast<std::size_t>(trial % 5), 2 + static_cast<std::size_t>(trial % 7),
                  2 + static_cast<std::size_t>(trial % 4)};
    const auto p = random_params(100 + trial, s, act);
    const auto x = random_vec(rng, s.input_dim, 2.0);
    const auto got = nn::forward(p, x);
    const auto want = oracle::reference_probs(p, x);
    const auto hid = oracle::reference_hidden(p, x);
    for (std::size_t c = 0; c < s.classes; ++c) EXPECT_NEAR(got.probs[c], want[c], 1e-12);
    for (std::size_t h = 0; h < s.hidden_dim; ++h) EXPECT_NEAR(got.hidden[h], hid[h], 1e-12);
  }
}

TEST(Forward, DimensionMismatchThrows) {
  const auto p = random_params(1, Shape{3, 4, 2});
  const std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(nn::forward(p, x), ContractError);
}

TEST(Softmax, StableAtLargeMagnitude) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> logits(1 + t % 9);
    for (auto& l : logits) l = u(rng);
    if (t % 3 == 0) logits[0] = 1e3;
    const auto p = nn::softmax(logits);
    double sum = 0.0;
    for (double v : p) {
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(SupervisedLoss, PerfectPredictionIsZero) {
  const auto p = constant_logits({800.0, 0.0});
  const std::vector<double> x{0.1, 0.2};
  const std::vector<nn::LabeledSample> batch{{x, 0}, {x, 0}};
  EXPECT_DOUBLE_EQ(nn::supervised_loss(p, batch), 0.0);
}

TEST(SupervisedLoss, UniformTenClasses) {
  nn::ModelParams p(Shape{2, 3, 10}, Activation::relu);
  const std::vector<double> x{0.1, 0.2};
  const std::vector<nn::LabeledSample> batch{{x, 3}, {x, 9}, {x, 0}};
  EXPECT_NEAR(nn::supervised_loss(p, batch), 2.302585, 1e-6);
}

TEST(SupervisedLoss, HandArithmetic) {
  // probs[label] = 0.5 and 0.25 -> (ln 2 + ln 4) / 2.
  const auto half = constant_logits({0.0, 0.0});
  const auto quarter = constant_logits({std::log(3.0), 0.0});
  const std::vector<double> x{0.0, 0.0};
  const std::vector<nn::LabeledSample> a{{x, 0}};
  const std::vector<nn::LabeledSample> b{{x, 1}};
  const double l = 0.5 * (nn::supervised_loss(half, a) + nn::supervised_loss(quarter, b));
  EXPECT_NEAR(l, 1.039721, 1e-6);
}

TEST(SupervisedLoss, EmptyBatchThrows) {
  const auto p = random_params(2, Shape{2, 3, 2});
  EXPECT_THROW(nn::supervised_loss(p, std::span<const nn::LabeledSample>{}), ContractError);
}

TEST(SupervisedLoss, LabelOutOfRangeThrows) {
  const auto p = random_params(2, Shape{2, 3, 2});
  const std::vector<double> x{0.0, 0.0};
  const std::vector<nn::LabeledSample> b{{x, 2}};
  EXPECT_THROW(nn::supervised_loss(p, b), ContractError);
}

TEST(SupervisedLoss, PermutationInvariant) {
  Rng rng(3);
  const auto p = random_params(9, Shape{3, 6, 4});
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < 12; ++i) xs.push_back(random_vec(rng, 3));
  std::vector<nn::LabeledSample> batch;
  for (int i = 0; i < 12; ++i) batch.push_back({xs[i], i % 4});
  const double base = nn::supervised_loss(p, batch);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(batch.begin(), batch.end(), rng);
    EXPECT_NEAR(nn::supervised_loss(p, batch), base, 1e-14);
  }
}

TEST(ConsistencyLoss, IdentityAugmentationIsZero) {
  const auto p = random_params(4, Shape{2, 8, 3});
  const std::vector<double> x{0.4, -0.2};
  const std::vector<nn::Vector> augs{x};
  for (auto d : {nn::Distance::squared_l2, nn::Distance::kl_divergence}) {
    nn::LossSpec spec;
    spec.distance = d;
    EXPECT_DOUBLE_EQ(nn::consistency_loss(p, x, augs, spec), 0.0);
  }
}

TEST(ConsistencyLoss, OppositeOneHotIsTwo) {
  const std::vector<double> p{1.0, 0.0}, q{0.0, 1.0};
  EXPECT_DOUBLE_EQ(nn::distance(nn::Distance::squared_l2, p, q), 2.0);
}

TEST(ConsistencyLoss, ZeroWeightModelIsZero) {
  nn::ModelParams p(Shape{2, 4, 3}, Activation::relu);
  Rng rng(8);
  const auto x = random_vec(rng, 2);
  const std::vector<nn::Vector> augs{random_vec(rng, 2), random_vec(rng, 2), random_vec(rng, 2)};
  EXPECT_DOUBLE_EQ(nn::consistency_loss(p, x, augs, nn::LossSpec{}), 0.0);
}

TEST(ConsistencyLoss, EmptyAugmentationsThrow) {
  const auto p = random_params(4, Shape{2, 8, 3});
  const std::vector<double> x{0.4, -0.2};
  EXPECT_THROW(nn::consistency_loss(p, x, std::span<const nn::Vector>{}, nn::LossSpec{}), ContractError);
}

TEST(ConsistencyLoss, NonNegativeAndZeroOnlyWhenEqual) {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_params(300 + t, Shape{3, 5, 3});
    const auto x = random_vec(rng, 3);
    const std::vector<nn::Vector> augs{random_vec(rng, 3), random_vec(rng, 3)};
    nn::LossSpec spec;
    spec.distance = t % 2 ? nn::Distance::kl_divergence : nn::Distance::squared_l2;
    const double l = nn::consistency_loss(p, x, augs, spec);
    EXPECT_GE(l, 0.0);
    const auto px = nn::forward(p, x).probs;
    bool all_equal = true;
    for (const auto& a : augs) all_equal = all_equal && nn::forward(p, a).probs == px;
    if (!all_equal) EXPECT_GT(l, 0.0);
  }
}

TEST(TotalLoss, ZeroWeightReducesToSupervised) {
  Rng rng(31);
  const auto p = random_params(5, Shape{2, 6, 3});
  std::vector<std::vector<double>> lx{random_vec(rng, 2), random_vec(rng, 2)};
  const std::vector<nn::LabeledSample> lab{{lx[0], 0}, {lx[1], 2}};
  const auto ux = random_vec(rng, 2);
  const std::vector<nn::UnlabeledSample> unl{{ux, {random_vec(rng, 2)}}};
  nn::LossSpec spec;
  spec.unsup_weight = 0.0;
  const auto with_u = nn::total_loss_and_grad(p, lab, unl, spec);
  const auto sup_only = nn::total_loss_and_grad(p, lab, {}, spec);
  EXPECT_EQ(with_u.loss, nn::supervised_loss(p, lab));
  EXPECT_EQ(with_u.grad, sup_only.grad);
}

TEST(TotalLoss, EmptyUnlabeledMatchesZeroWeight) {
  Rng rng(32);
  const auto p = random_params(6, Shape{2, 6, 2});
  std::vector<std::vector<double>> lx{random_vec(rng, 2), random_vec(rng, 2)};
  const std::vector<nn::LabeledSample> lab{{lx[0], 0}, {lx[1], 1}};
  nn::LossSpec on, off;
  off.unsup_weight = 0.0;
  const auto a = nn::total_loss_and_grad(p, lab, {}, on);
  const auto b = nn::total_loss_and_grad(p, lab, {}, off);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.grad, b.grad);
}

TEST(TotalLoss, GradientMatchesFiniteDifferences) {
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto c = oracle::random_grad_case(rng);
    std::vector<nn::LabeledSample> lab;
    for (std::size_t i = 0; i < c.lx.size(); ++i) lab.push_back({c.lx[i], c.ly[i]});
    std::vector<nn::UnlabeledSample> unl;
    for (std::size_t i = 0; i < c.ux.size(); ++i) unl.push_back({c.ux[i], c.uaugs[i]});
    const auto analytic = nn::total_loss_and_grad(c.params, lab, unl, c.spec);
    EXPECT_NEAR(analytic.loss, oracle::reference_total_loss(c.params, c.params, c), 1e-10);
    const auto fd = oracle::finite_difference_grad(c);
    const auto g = analytic.grad.values();
    for (std::size_t i = 0; i < fd.size(); ++i) worst = std::max(worst, oracle::relative_error(g[i], fd[i]));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Sgd, PlainStep) {
  auto p = random_params(7, Shape{2, 3, 2});
  const auto before = p;
  auto g = p.zeros_like();
  for (std::size_t i = 0; i < g.values().size(); ++i) g.values()[i] = 0.01 * static_cast<double>(i) - 0.05;
  nn::MomentumState st;
  nn::sgd_step(p, g, 0.1, 0.0, st);
  for (std::size_t i = 0; i < g.values().size(); ++i) {
    EXPECT_DOUBLE_EQ(p.values()[i], before.values()[i] - 0.1 * g.values()[i]);
  }
}

TEST(Sgd, ZeroGradientLeavesParams) {
  auto p = random_params(7, Shape{2, 3, 2});
  const auto before = p;
  nn::MomentumState st;
  nn::sgd_step(p, p.zeros_like(), 0.5, 0.9, st);
  EXPECT_EQ(p, before);
}

TEST(Sgd, MomentumHandUnrolled) {
  // v1 = g1, p1 = p0 - lr g1; v2 = m g1 + g2, p2 = p1 - lr (m g1 + g2).
  auto p = random_params(8, Shape{1, 2, 2});
  const auto p0 = p;
  auto g1 = p.zeros_like(), g2 = p.zeros_like();
  for (std::size_t i = 0; i < g1.values().size(); ++i) {
    g1.values()[i] = 0.3 - 0.1 * static_cast<double>(i);
    g2.values()[i] = -0.2 + 0.05 * static_cast<double>(i);
  }
  const double lr = 0.1, m = 0.9;
  nn::MomentumState st;
  nn::sgd_step(p, g1, lr, m, st);
  nn::sgd_step(p, g2, lr, m, st);
  for (std::size_t i = 0; i < p.values().size(); ++i) {
    const double a = g1.values()[i], b = g2.values()[i];
    const double want = (p0.values()[i] - lr * a) - lr * (m * a + b);
    EXPECT_NEAR(p.values()[i], want, 1e-15);
  }
}

TEST(Sgd, NonFiniteGradientThrows) {
  auto p = random_params(7, Shape{2, 3, 2});
  auto g = p.zeros_like();
  g.values()[3] = std::nan("");
  nn::MomentumState st;
  EXPECT_THROW(nn::sgd_step(p, g, 0.1, 0.0, st), NumericError);
}

TEST(Sgd, NonPositiveRateThrows) {
  auto p = random_params(7, Shape{2, 3, 2});
  nn::MomentumState st;
  EXPECT_THROW(nn::sgd_step(p, p.zeros_like(), 0.0, 0.0, st), ContractError);
}

TEST(Init, SameSeedIdentical) {
  EXPECT_EQ(nn::init_params(5, Shape{3, 7, 4}, 0.5), nn::init_params(5, Shape{3, 7, 4}, 0.5));
  EXPECT_NE(nn::init_params(5, Shape{3, 7, 4}, 0.5), nn::init_params(6, Shape{3, 7, 4}, 0.5));
}

TEST(Init, ZeroScaleIsZero) {
  const auto p = nn::init_params(5, Shape{3, 7, 4}, 0.0);
  for (double v : p.values()) EXPECT_EQ(v, 0.0);
}

TEST(Init, BiasesZeroWeightsInRange) {
  const auto p = nn::init_params(12, Shape{4, 9, 3}, 0.25);
  for (double v : p.b1()) EXPECT_EQ(v, 0.0);
  for (double v : p.b2()) EXPECT_EQ(v, 0.0);
  for (double v : p.w1()) EXPECT_LE(std::abs(v), 0.25);
  for (double v : p.w2()) EXPECT_LE(std::abs(v), 0.25);
}
