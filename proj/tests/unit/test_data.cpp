#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "alforge/al_loop.hpp"
#include "alforge/augment.hpp"
#include "alforge/dataset.hpp"
#include "alforge/error.hpp"
#include "alforge/pool.hpp"

using namespace alforge;

namespace {

std::vector<int> class_counts(const data::Dataset& ds) {
  std::vector<int> c(static_cast<std::size_t>(ds.classes()), 0);
  for (int y : ds.true_labels()) ++c[static_cast<std::size_t>(y)];
  return c;
}

// Training accuracy of a linear softmax classifier fitted by full-batch
// gradient descent.
double linear_accuracy(const data::Dataset& ds) {
  const std::size_t d = ds.input_dim();
  const auto j = static_cast<std::size_t>(ds.classes());
  std::vector<double> w(j * (d + 1), 0.0);
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> g(w.size(), 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto x = ds.row(i);
      std::vector<double> z(j);
      for (std::size_t c = 0; c < j; ++c) {
        z[c] = w[c * (d + 1) + d];
        for (std::size_t k = 0; k < d; ++k) z[c] += w[c * (d + 1) + k] * x[k];
      }
      const auto p = nn::softmax(z);
      for (std::size_t c = 0; c < j; ++c) {
        const double e = p[c] - (static_cast<int>(c) == ds.true_labels()[i] ? 1.0 : 0.0);
        for (std::size_t k = 0; k < d; ++k) g[c * (d + 1) + k] += e * x[k];
        g[c * (d + 1) + d] += e;
      }
    }
    for (std::size_t q = 0; q < w.size(); ++q) w[q] -= 0.5 * g[q] / static_cast<double>(ds.size());
  }
  std::size_t ok = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto x = ds.row(i);
    std::size_t best = 0;
    double best_z = -1e300;
    for (std::size_t c = 0; c < j; ++c) {
      double z = w[c * (d + 1) + d];
      for (std::size_t k = 0; k < d; ++k) z += w[c * (d + 1) + k] * x[k];
      if (z > best_z) best_z = z, best = c;
    }
    ok += static_cast<int>(best) == ds.true_labels()[i];
  }
  return static_cast<double>(ok) / static_cast<double>(ds.size());
}

al::ALConfig supervised(std::size_t k0) {
  al::ALConfig c;
  c.k0 = k0;
  c.cycles = 0;
  c.loss.unsup_weight = 0.0;
  return c;
}

}  // namespace

TEST(TwoMoons, NoiselessPointsOnArcs) {
  std::vector<int> labels;
  const auto raw = data::two_moons_raw(4, 0.0, 1, &labels);
  ASSERT_EQ(raw.size(), 8u);
  for (std::size_t i = 0; i < 4; ++i) {
    const double x = raw[2 * i], y = raw[2 * i + 1];
    if (labels[i] == 0) {
      EXPECT_NEAR(x * x + y * y, 1.0, 1e-12);
      EXPECT_GE(y, -1e-12);
    } else {
      EXPECT_NEAR((x - 1.0) * (x - 1.0) + (y - 0.5) * (y - 0.5), 1.0, 1e-12);
      EXPECT_LE(y, 0.5 + 1e-12);
    }
  }
}

TEST(TwoMoons, DeterministicAndStandardized) {
  const auto a = data::gen_two_moons(200, 0.1, 3);
  EXPECT_EQ(a, data::gen_two_moons(200, 0.1, 3));
  EXPECT_NE(a, data::gen_two_moons(200, 0.1, 4));
  for (std::size_t k = 0; k < 2; ++k) {
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m += a.row(i)[k];
    m /= static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v += (a.row(i)[k] - m) * (a.row(i)[k] - m);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v / static_cast<double>(a.size()), 1.0, 1e-12);
  }
  EXPECT_EQ(class_counts(a), (std::vector<int>{100, 100}));
}

TEST(TwoMoons, Errors) {
  EXPECT_THROW(data::gen_two_moons(1, 0.1, 0), ContractError);
  EXPECT_THROW(data::gen_two_moons(7, 0.1, 0), ContractError);
  EXPECT_THROW(data::gen_two_moons(10, -0.1, 0), ContractError);
}

TEST(TwoMoons, NonLinearlySeparable) {
  const auto d = data::make_two_moons(500, 1000, 0.1, 0);
  EXPECT_LT(linear_accuracy(d.train), 0.95);
  auto c = supervised(500);
  const auto pool = data::pool_from_labeled(d.train, [&] {
    std::vector<std::size_t> all(d.train.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }());
  const auto p = al::train_cycle(al::initial_params(c, 2, 2), pool, d.train, c, 0);
  EXPECT_GT(al::accuracy(p, d.test), 0.95);
}

TEST(Blobs, ZeroSpreadCollapsesToCenters) {
  const auto ds = data::gen_blobs(30, 3, 5, 0.0, 1);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.size(); ++j) {
      if (ds.true_labels()[i] == ds.true_labels()[j]) {
        EXPECT_EQ(ds.row(i)[0], ds.row(j)[0]);
        EXPECT_EQ(ds.row(i)[1], ds.row(j)[1]);
      }
    }
  }
}

TEST(Blobs, BalancedCounts) {
  const auto ds = data::gen_blobs(101, 4, 2, 1.0, 3);
  const auto c = class_counts(ds);
  EXPECT_LE(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()), 1);
  EXPECT_EQ(ds, data::gen_blobs(101, 4, 2, 1.0, 3));
  EXPECT_THROW(data::gen_blobs(10, 1, 2, 1.0, 3), ContractError);
}

TEST(Blobs, WellSeparatedIsLearned) {
  // Centres seed chosen so the two centres are far apart relative to spread 0.3.
  const auto d = data::make_blobs(200, 500, 2, 0, 0.3, 1);
  auto c = supervised(20);
  const auto pool = data::init_start_set(d.train, 20, true, 0);
  const auto p = al::train_cycle(al::initial_params(c, 2, 2), pool, d.train, c, 0);
  EXPECT_GT(al::accuracy(p, d.test), 0.99);
}

TEST(GridPatterns, NoiselessClassesIdentical) {
  const auto ds = data::gen_grid_patterns(40, 4, 8, 0.0, 2);
  EXPECT_EQ(ds.input_dim(), 64u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto t = data::grid_template(ds.true_labels()[i], 8);
    EXPECT_TRUE(std::equal(t.begin(), t.end(), ds.row(i).begin()));
  }
}

TEST(GridPatterns, TemplatesPairwiseDistinctAndFlipSymmetric) {
  for (int a = 0; a < data::grid_template_count(); ++a) {
    const auto ta = data::grid_template(a, 8);
    EXPECT_EQ(data::shift_flip(ta, 0, 0, true), ta);
    for (int b = a + 1; b < data::grid_template_count(); ++b) EXPECT_NE(ta, data::grid_template(b, 8));
  }
  EXPECT_THROW(data::gen_grid_patterns(10, data::grid_template_count() + 1, 8, 0.1, 0), ContractError);
  EXPECT_THROW(data::gen_grid_patterns(10, 2, 3, 0.1, 0), ContractError);
}

TEST(GridPatterns, LearnedWithFiftyLabels) {
  const auto d = data::make_grid_patterns(400, 400, 4, 8, 0.1, 0);
  auto c = supervised(52);
  const auto pool = data::init_start_set(d.train, 52, true, 0);
  const auto p = al::train_cycle(al::initial_params(c, 64, 4), pool, d.train, c, 0);
  EXPECT_GT(al::accuracy(p, d.test), 0.95);
}

TEST(Splits, TrainAndTestDiffer) {
  const auto d = data::make_two_moons(100, 100, 0.1, 0);
  EXPECT_NE(d.train.fingerprint(), d.test.fingerprint());
  EXPECT_EQ(d.test.split(), data::Split::test);
}

TEST(Augment, DegenerateSpecsAreIdentity) {
  Rng rng(1);
  const std::vector<double> x{0.5, -1.0, 2.0, 0.0};
  data::AugmentationSpec jitter;
  jitter.sigma = 0.0;
  EXPECT_EQ(data::augment(x, jitter, rng), x);
  data::AugmentationSpec sf;
  sf.kind = data::AugmentKind::shift_flip;
  sf.max_shift = 0;
  sf.flip = false;
  EXPECT_EQ(data::augment(x, sf, rng), x);
  EXPECT_EQ(data::shift_flip(x, 0, 0, false), x);
}

TEST(Augment, FlipIsInvolution) {
  std::vector<double> x(16);
  std::iota(x.begin(), x.end(), 1.0);
  EXPECT_EQ(data::shift_flip(data::shift_flip(x, 0, 0, true), 0, 0, true), x);
  EXPECT_NE(data::shift_flip(x, 0, 0, true), x);
}

TEST(Augment, ShiftZeroPads) {
  // 3x3 grid 1..9 shifted right by one: first column zero.
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto s = data::shift_flip(x, 1, 0, false);
  EXPECT_EQ(s, (std::vector<double>{0, 1, 2, 0, 4, 5, 0, 7, 8}));
  const auto d = data::shift_flip(x, 0, 1, false);
  EXPECT_EQ(d, (std::vector<double>{0, 0, 0, 1, 2, 3, 4, 5, 6}));
}

TEST(Augment, ShiftFlipNeedsSquare) {
  Rng rng(1);
  data::AugmentationSpec sf;
  sf.kind = data::AugmentKind::shift_flip;
  const std::vector<double> x{1, 2, 3};
  EXPECT_THROW(data::augment(x, sf, rng), ContractError);
}

TEST(Augment, JitterStatistics) {
  Rng rng(4);
  data::AugmentationSpec spec;
  spec.sigma = 0.5;
  const std::vector<double> x{1.0, -2.0};
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto a = data::augment(x, spec, rng);
    s += a[0] - x[0];
    s2 += (a[0] - x[0]) * (a[0] - x[0]);
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(std::sqrt(s2 / n), 0.5, 0.02);
}

TEST(Augment, SpecValidation) {
  data::AugmentationSpec bad;
  bad.sigma = -1.0;
  EXPECT_THROW(bad.validate(), ContractError);
  bad = {};
  bad.n_eval_augs = 0;
  EXPECT_THROW(bad.validate(), ContractError);
}

TEST(Oracle, ReturnsGroundTruth) {
  const auto ds = data::gen_blobs(20, 3, 1, 1.0, 1);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(data::oracle_label(ds, i), ds.true_labels()[i]);
    EXPECT_EQ(data::oracle_label(ds, i), data::oracle_label(ds, i));
  }
  EXPECT_THROW(data::oracle_label(ds, 20), ContractError);
}

TEST(Pool, FullStartSetLeavesNothing) {
  const auto ds = data::gen_two_moons(20, 0.1, 0);
  const auto pool = data::init_start_set(ds, 20, false, 1);
  EXPECT_TRUE(pool.unlabeled.empty());
  EXPECT_EQ(pool.labeled.size(), 20u);
}

TEST(Pool, BalancedStart) {
  const auto ds = data::gen_two_moons(100, 0.1, 0);
  const auto pool = data::init_start_set(ds, 10, true, 1);
  int per[2] = {0, 0};
  for (const auto& [i, y] : pool.labeled) ++per[y];
  EXPECT_EQ(per[0], 5);
  EXPECT_EQ(per[1], 5);
  EXPECT_EQ(pool, data::init_start_set(ds, 10, true, 1));
  EXPECT_THROW(data::init_start_set(ds, 9, true, 1), ContractError);
  EXPECT_THROW(data::init_start_set(ds, 101, false, 1), ContractError);
  EXPECT_TRUE(std::is_sorted(pool.unlabeled.begin(), pool.unlabeled.end()));
}

TEST(Pool, ApplySelection) {
  const auto ds = data::gen_two_moons(30, 0.1, 0);
  const auto pool = data::init_start_set(ds, 4, true, 2);
  const auto same = data::apply_selection(pool, {}, ds);
  EXPECT_EQ(same.labeled, pool.labeled);
  EXPECT_EQ(same.unlabeled, pool.unlabeled);
  EXPECT_EQ(same.cycle, pool.cycle + 1);

  const std::vector<std::size_t> batch{pool.unlabeled[3], pool.unlabeled[0]};
  const auto next = data::apply_selection(pool, batch, ds);
  EXPECT_EQ(next.labeled.size(), pool.labeled.size() + 2);
  for (auto i : batch) EXPECT_EQ(next.labeled.at(i), ds.true_labels()[i]);
  data::check_pool(next, ds);

  const auto all = data::apply_selection(pool, pool.unlabeled, ds);
  EXPECT_TRUE(all.unlabeled.empty());

  const std::vector<std::size_t> labeled_again{pool.labeled.begin()->first};
  EXPECT_THROW(data::apply_selection(pool, labeled_again, ds), ContractError);
  const std::vector<std::size_t> unknown{999};
  EXPECT_THROW(data::apply_selection(pool, unknown, ds), ContractError);
  const std::vector<std::size_t> dup{pool.unlabeled[0], pool.unlabeled[0]};
  EXPECT_THROW(data::apply_selection(pool, dup, ds), ContractError);
}

TEST(Pool, PartitionSurvivesRandomSelections) {
  const auto ds = data::gen_blobs(120, 3, 4, 1.0, 4);
  Rng rng(77);
  for (int run = 0; run < 20; ++run) {
    auto pool = data::init_start_set(ds, 3 * (1 + run % 4), true, static_cast<std::uint64_t>(run));
    while (!pool.unlabeled.empty()) {
      const std::size_t k = std::min<std::size_t>(1 + rng() % 17, pool.unlabeled.size());
      const auto batch = select::select_uniform(pool, k, rng);
      pool = data::apply_selection(pool, batch, ds);
      ASSERT_NO_THROW(data::check_pool(pool, ds));
      std::set<std::size_t> u(pool.unlabeled.begin(), pool.unlabeled.end());
      for (const auto& [i, y] : pool.labeled) {
        ASSERT_EQ(u.count(i), 0u);
        ASSERT_EQ(y, ds.true_labels()[i]);
      }
      ASSERT_EQ(pool.total(), ds.size());
    }
  }
}

TEST(Pool, CheckDetectsCorruption) {
  const auto ds = data::gen_two_moons(20, 0.1, 0);
  auto pool = data::init_start_set(ds, 4, true, 0);
  auto wrong = pool;
  wrong.labeled.begin()->second = 1 - wrong.labeled.begin()->second;
  EXPECT_THROW(data::check_pool(wrong, ds), ContractError);
  auto overlap = pool;
  overlap.unlabeled.push_back(pool.labeled.begin()->first);
  EXPECT_THROW(data::check_pool(overlap, ds), ContractError);
  auto missing = pool;
  missing.unlabeled.pop_back();
  EXPECT_THROW(data::check_pool(missing, ds), ContractError);
}

TEST(Pool, BalancedOrderPrefixesAreBalanced) {
  const auto ds = data::gen_blobs(90, 3, 1, 1.0, 2);
  const auto order = data::balanced_order(ds, 5);
  ASSERT_EQ(order.size(), 90u);
  std::vector<int> c(3, 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    ++c[static_cast<std::size_t>(ds.true_labels()[order[i]])];
    if ((i + 1) % 3 == 0) {
      EXPECT_EQ(c[0], c[1]);
      EXPECT_EQ(c[1], c[2]);
    }
  }
}

TEST(DatasetType, Validation) {
  EXPECT_THROW(data::Dataset("x", data::Split::train, 2, 2, {1.0, 2.0}, {2}), ContractError);
  EXPECT_THROW(data::Dataset("x", data::Split::train, 2, 2, {1.0}, {0}), ContractError);
  EXPECT_THROW(data::Dataset("x", data::Split::train, 1, 2, {std::nan("")}, {0}), ContractError);
  EXPECT_THROW(data::Dataset("x", data::Split::train, 1, 2, {}, {}), ContractError);
}
