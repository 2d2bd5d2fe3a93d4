#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "alforge/al_loop.hpp"
#include "alforge/coldstart.hpp"
#include "alforge/error.hpp"
#include "alforge/oracles.hpp"

using namespace alforge;
using coldstart::DiscreteTable;
using coldstart::MeasureRecord;

namespace {

std::vector<MeasureRecord> series(const std::vector<double>& h) {
  std::vector<MeasureRecord> out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    MeasureRecord r;
    r.labeled_count = 10 * (i + 1);
    r.measure_h = h[i];
    out.push_back(r);
  }
  return out;
}

std::vector<double> random_dist(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& v : p) s += (v = u(rng));
  for (auto& v : p) v /= s;
  return p;
}

}  // namespace

TEST(TargetLoss, PerfectModelIsZero) {
  // Labels equal to the sign of x0 on 1-D data; logits scaled to saturate.
  std::vector<double> x{-2.0, -1.0, 1.0, 2.0};
  const data::Dataset ds("line", data::Split::train, 1, 2, x, {0, 0, 1, 1});
  nn::ModelParams p(nn::Shape{1, 2, 2}, nn::Activation::relu);
  p.w1(0, 0) = -1.0;  // h0 = relu(-x)
  p.w1(1, 0) = 1.0;   // h1 = relu(x)
  p.w2(0, 0) = 1e3;
  p.w2(1, 1) = 1e3;
  EXPECT_EQ(coldstart::al_target_loss(p, ds), 0.0);
}

TEST(TargetLoss, ZeroModelIsLogJ) {
  const auto ds = data::gen_blobs(60, 3, 1, 1.0, 1);
  nn::ModelParams p(nn::Shape{2, 4, 3}, nn::Activation::relu);
  EXPECT_NEAR(coldstart::al_target_loss(p, ds), std::log(3.0), 1e-12);
}

TEST(TargetLoss, MatchesRecomputation) {
  const auto ds = data::gen_two_moons(50, 0.1, 2);
  const auto p = nn::init_params(4, nn::Shape{2, 10, 2}, 1.0);
  double want = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto pr = oracle::reference_probs(p, ds.row(i));
    want -= std::log(std::max(pr[static_cast<std::size_t>(ds.true_labels()[i])], 1e-12));
  }
  EXPECT_NEAR(coldstart::al_target_loss(p, ds), want / 50.0, 1e-12);
}

TEST(PredMarginal, ZeroModelUniformAndNormalized) {
  const auto ds = data::gen_blobs(30, 5, 1, 1.0, 1);
  nn::ModelParams z(nn::Shape{2, 4, 5}, nn::Activation::relu);
  for (double v : coldstart::pred_marginal(z, ds)) EXPECT_DOUBLE_EQ(v, 0.2);
  const auto m = coldstart::pred_marginal(nn::init_params(3, nn::Shape{2, 4, 5}, 2.0), ds);
  EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-9);
}

TEST(PredMarginal, HandAverage) {
  const data::Dataset ds("three", data::Split::train, 1, 2, {-1.0, 0.0, 2.0}, {0, 1, 0});
  // z0 = relu(x), z1 = 0, so p0 = sigmoid(relu(x)).
  nn::ModelParams p(nn::Shape{1, 1, 2}, nn::Activation::relu);
  p.w1(0, 0) = 1.0;
  p.w2(0, 0) = 1.0;
  auto s = [](double z) { return std::exp(z) / (std::exp(z) + 1.0); };
  const double p0 = (0.5 + 0.5 + s(2.0)) / 3.0;
  const auto m = coldstart::pred_marginal(p, ds);
  EXPECT_NEAR(m[0], p0, 1e-15);
  EXPECT_NEAR(m[1], 1.0 - p0, 1e-15);
}

TEST(Measure, Examples) {
  const auto u = coldstart::uniform_prior(4);
  EXPECT_NEAR(coldstart::measure_cross_entropy(u, u), std::log(4.0), 1e-15);
  const std::vector<double> prior{0.5, 0.5}, q{0.9, 0.1};
  EXPECT_NEAR(coldstart::measure_cross_entropy(prior, q), 1.203973, 1e-6);
}

TEST(Measure, GibbsInequality) {
  Rng rng(6);
  for (int t = 0; t < 500; ++t) {
    const std::size_t j = 2 + t % 8;
    const auto p = random_dist(rng, j);
    const auto q = random_dist(rng, j);
    const double hpp = coldstart::measure_cross_entropy(p, p);
    EXPECT_GE(coldstart::measure_cross_entropy(p, q), hpp - 1e-15);
  }
}

TEST(Measure, PriorFromLabels) {
  data::PoolState pool;
  pool.labeled = {{0, 0}, {3, 2}, {4, 2}, {7, 2}};
  EXPECT_EQ(coldstart::prior_from_labels(pool, 3), (std::vector<double>{0.25, 0.0, 0.75}));
}

TEST(Prop1, PerfectClassifier) {
  // X uniform on {0, 1}, Y = X, classifier one-hot on the truth.
  DiscreteTable joint{2, 2, {0.5, 0.0, 0.0, 0.5}};
  DiscreteTable cls{2, 2, {1.0, 0.0, 0.0, 1.0}};
  const auto b = coldstart::verify_prop1(joint, cls);
  EXPECT_NEAR(b.risk, 0.0, 1e-12);
  EXPECT_LE(b.lower, b.risk + 1e-12);
  EXPECT_LE(b.risk, b.upper + 1e-12);
  EXPECT_EQ(b.z_hat, 0.0);
  EXPECT_TRUE(std::isinf(b.upper));
  EXPECT_TRUE(b.holds());
}

TEST(Prop1, ConstantClassifierReducesToMeasure) {
  // p(Y|X) = p(Y) and p(Yhat|X) = q: R_H = H[p(Y), q] = H[p(Y), p(Yhat)].
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const std::size_t nx = 2 + t % 6, ny = 2 + t % 4;
    const auto px = random_dist(rng, nx), py = random_dist(rng, ny), q = random_dist(rng, ny);
    DiscreteTable joint{nx, ny, {}}, cls{nx, ny, {}};
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        joint.values.push_back(px[x] * py[y]);
        cls.values.push_back(q[y]);
      }
    }
    const auto b = coldstart::verify_prop1(joint, cls);
    EXPECT_NEAR(b.risk, b.cross_entropy, 1e-12);
    EXPECT_NEAR(b.cross_entropy, coldstart::measure_cross_entropy(py, q), 1e-12);
    EXPECT_TRUE(b.holds());
  }
}

TEST(Prop1, RandomInstancesBracketed) {
  Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    const auto inst = oracle::random_prop1_instance(rng, 8);
    const auto b = coldstart::verify_prop1(inst.joint, inst.classifier);
    EXPECT_TRUE(b.holds()) << "instance " << t;
    EXPECT_GT(b.z_hat, 0.0);
    EXPECT_LE(b.z_hat, 1.0);
  }
}

TEST(Prop1, ZeroConditionalNamesCell) {
  DiscreteTable joint{2, 2, {0.5, 0.0, 0.0, 0.5}};
  DiscreteTable cls{2, 2, {1.0, 0.0, 1.0, 0.0}};  // Yhat = 1 never predicted
  try {
    coldstart::verify_prop1(joint, cls);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("x=0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("y=1"), std::string::npos) << msg;
  }
}

TEST(StartSize, Examples) {
  const auto a = coldstart::start_size_rule(series({2.0, 1.2, 1.19, 1.185}), 0.05);
  EXPECT_EQ(a.size, 30u);
  EXPECT_TRUE(a.converged);
  EXPECT_EQ(coldstart::start_size_rule(series({1.0, 1.0, 1.0}), 0.0).size, 20u);
  const auto steep = coldstart::start_size_rule(series({5.0, 4.0, 3.0, 2.0}), 0.1);
  EXPECT_FALSE(steep.converged);
  EXPECT_EQ(steep.size, 40u);
  EXPECT_THROW(coldstart::start_size_rule(series({1.0}), 0.1), ContractError);
}

TEST(StartSize, MonotoneInEpsilon) {
  Rng rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> h(6);
    double v = 3.0;
    for (auto& x : h) x = (v -= u(rng) * 0.5);
    std::size_t prev = 0;
    for (double eps = 0.0; eps <= 0.6; eps += 0.02) {
      const auto s = coldstart::start_size_rule(series(h), eps).size;
      if (prev != 0) EXPECT_LE(s, prev);
      prev = s;
    }
  }
}

TEST(Sweep, NestedSetsAndShape) {
  const auto d = data::make_two_moons(100, 50, 0.1, 0);
  al::ALConfig c;
  c.epochs_per_cycle = 5;
  const std::vector<std::size_t> one{10};
  const std::vector<std::uint64_t> seeds{1};
  EXPECT_EQ(coldstart::sweep_start_sizes(d.train, one, c, seeds).size(), 1u);

  const std::vector<std::size_t> sizes{4, 10, 20};
  const std::vector<std::uint64_t> two{1, 2};
  const auto rec = coldstart::sweep_start_sizes(d.train, sizes, c, two);
  ASSERT_EQ(rec.size(), 6u);
  EXPECT_EQ(rec[0].labeled_count, 4u);
  EXPECT_EQ(rec[3].seed, 2u);
  const auto means = coldstart::mean_by_size(rec);
  ASSERT_EQ(means.size(), 3u);
  EXPECT_NEAR(means[1].measure_h, 0.5 * (rec[1].measure_h + rec[4].measure_h), 1e-15);

  // Nested: every prefix of the balanced order is balanced.
  const auto order = data::balanced_order(d.train, 1);
  std::set<std::size_t> small(order.begin(), order.begin() + 4);
  std::set<std::size_t> big(order.begin(), order.begin() + 10);
  for (auto i : small) EXPECT_EQ(big.count(i), 1u);
}

TEST(Sweep, FullPoolTargetLossEqualsTrainingLoss) {
  const auto d = data::make_two_moons(40, 20, 0.1, 0);
  al::ALConfig c;
  c.epochs_per_cycle = 20;
  c.loss.unsup_weight = 0.0;
  const std::vector<std::size_t> sizes{40};
  const std::vector<std::uint64_t> seeds{3};
  const auto rec = coldstart::sweep_start_sizes(d.train, sizes, c, seeds);
  c.seed = 3;
  c.warm_start = false;
  std::vector<std::size_t> all(40);
  std::iota(all.begin(), all.end(), 0);
  const auto pool = data::pool_from_labeled(d.train, all);
  const auto p = al::train_cycle(al::initial_params(c, 2, 2), pool, d.train, c, 0);
  std::vector<nn::LabeledSample> batch;
  for (auto i : all) batch.push_back({d.train.row(i), d.train.true_labels()[i]});
  EXPECT_NEAR(rec[0].target_loss, nn::supervised_loss(p, batch), 1e-12);
}

TEST(Pearson, KnownAndDegenerate) {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1}, k{5, 5, 5, 5};
  EXPECT_NEAR(*coldstart::pearson(a, b), 1.0, 1e-15);
  EXPECT_NEAR(*coldstart::pearson(a, c), -1.0, 1e-15);
  EXPECT_FALSE(coldstart::pearson(a, k).has_value());
}
