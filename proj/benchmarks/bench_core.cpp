#include <benchmark/benchmark.h>

#include <numeric>

#include "alforge/al_loop.hpp"
#include "alforge/selection.hpp"

using namespace alforge;

namespace {

const data::DatasetPair& moons() {
  static const auto d = data::make_two_moons(2000, 10, 0.1, 1);
  return d;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const auto p = nn::init_params(1, nn::Shape{2, hidden, 2}, 0.3);
  const auto x = moons().train.row(0);
  for (auto _ : state) benchmark::DoNotOptimize(nn::forward(p, x));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(128);

static void BM_LossAndGrad(benchmark::State& state) {
  const auto p = nn::init_params(1, nn::Shape{2, 32, 2}, 0.3);
  const auto& ds = moons().train;
  std::vector<nn::LabeledSample> lab;
  for (std::size_t i = 0; i < 32; ++i) lab.push_back({ds.row(i), ds.true_labels()[i]});
  std::vector<nn::UnlabeledSample> unl;
  for (std::size_t i = 32; i < 96; ++i) {
    const auto x = ds.row(i);
    unl.push_back({x, {nn::Vector(x.begin(), x.end())}});
    unl.back().augs[0][0] += 0.1;
  }
  const nn::LossSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(nn::total_loss_and_grad(p, lab, unl, spec));
}
BENCHMARK(BM_LossAndGrad);

static void BM_ScoreConsistency(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = nn::init_params(1, nn::Shape{2, 32, 2}, 0.3);
  const auto idx = all_indices(n);
  data::AugmentationSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(select::score_consistency(p, moons().train, idx, spec, 7));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_ScoreConsistency)->Arg(500)->Arg(2000);

static void BM_KCenter(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto p = nn::init_params(1, nn::Shape{2, 32, 2}, 0.3);
  const auto pool = data::init_start_set(moons().train, 20, true, 3);
  for (auto _ : state) benchmark::DoNotOptimize(select::score_kcenter(p, moons().train, pool, k));
}
BENCHMARK(BM_KCenter)->Arg(10)->Arg(100);
BENCHMARK_MAIN();
