#include "alforge/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iterator>
#include <numeric>
#include <random>
#include <string>

#include "alforge/error.hpp"

namespace alforge::select {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::uniform: return "uniform";
    case Strategy::entropy: return "entropy";
    case Strategy::kcenter: return "kcenter";
    case Strategy::consistency: return "consistency";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  for (Strategy st : kAllStrategies) {
    if (to_string(st) == s) return st;
  }
  if (s == "k-center" || s == "k_center") return Strategy::kcenter;
  throw ContractError("unknown strategy '" + std::string(s) + "'");
}

double ScoreTable::score_of(std::size_t idx) const {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] == idx) return scores[i];
  }
  throw ContractError("index " + std::to_string(idx) + " not in score table");
}

std::vector<std::size_t> ranked_indices(const ScoreTable& table) {
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (table.scores[a] != table.scores[b]) return table.scores[a] > table.scores[b];
    return table.indices[a] < table.indices[b];
  });
  std::vector<std::size_t> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) out[i] = table.indices[order[i]];
  return out;
}

std::vector<std::size_t> ranks(const ScoreTable& table) {
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (table.scores[a] != table.scores[b]) return table.scores[a] > table.scores[b];
    return table.indices[a] < table.indices[b];
  });
  std::vector<std::size_t> out(table.size());
  for (std::size_t r = 0; r < order.size(); ++r) out[order[r]] = r + 1;
  return out;
}

double predictive_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

double inconsistency_from_probs(std::span<const nn::Vector> probs) {
  require(!probs.empty(), "inconsistency needs at least one prediction");
  const std::size_t classes = probs.front().size();
  // Welford's running mean / M2 per class.
  std::vector<double> mean(classes, 0.0);
  std::vector<double> m2(classes, 0.0);
  double count = 0.0;
  for (const auto& p : probs) {
    require(p.size() == classes, "prediction vectors differ in length");
    count += 1.0;
    for (std::size_t l = 0; l < classes; ++l) {
      const double delta = p[l] - mean[l];
      mean[l] += delta / count;
      m2[l] += delta * (p[l] - mean[l]);
    }
  }
  double total = 0.0;
  for (double v : m2) total += std::max(v, 0.0) / count;
  return total;
}

double inconsistency(const nn::ModelParams& params, std::span<const double> x,
                     std::span<const nn::Vector> augs) {
  std::vector<nn::Vector> probs;
  probs.reserve(augs.size() + 1);
  probs.push_back(nn::forward(params, x).probs);
  for (const auto& a : augs) probs.push_back(nn::forward(params, a).probs);
  return inconsistency_from_probs(probs);
}

std::uint64_t sample_stream_seed(std::uint64_t global_seed, std::size_t idx) {
  return derive_seed(global_seed, stream::kScoring, idx);
}

std::vector<nn::Vector> scoring_augmentations(std::span<const double> x,
                                              const data::AugmentationSpec& spec,
                                              std::uint64_t global_seed, std::size_t idx) {
  Rng rng(sample_stream_seed(global_seed, idx));
  std::vector<nn::Vector> augs;
  augs.reserve(static_cast<std::size_t>(spec.n_eval_augs));
  for (int i = 0; i < spec.n_eval_augs; ++i) augs.push_back(data::augment(x, spec, rng));
  return augs;
}

ScoreTable score_entropy(const nn::ModelParams& params, const data::Dataset& ds,
                         std::span<const std::size_t> unlabeled) {
  require(!unlabeled.empty(), "score_entropy on an empty pool");
  ScoreTable t{Strategy::entropy, 0, {unlabeled.begin(), unlabeled.end()}, {}};
  t.scores.reserve(unlabeled.size());
  for (std::size_t idx : unlabeled) {
    t.scores.push_back(predictive_entropy(nn::forward(params, ds.row(idx)).probs));
  }
  return t;
}

ScoreTable score_consistency(const nn::ModelParams& params, const data::Dataset& ds,
                             std::span<const std::size_t> unlabeled,
                             const data::AugmentationSpec& spec, std::uint64_t seed) {
  spec.validate();
  ScoreTable t{Strategy::consistency, seed, {unlabeled.begin(), unlabeled.end()}, {}};
  t.scores.reserve(unlabeled.size());
  for (std::size_t idx : unlabeled) {
    const auto augs = scoring_augmentations(ds.row(idx), spec, seed, idx);
    t.scores.push_back(inconsistency(params, ds.row(idx), augs));
  }
  return t;
}

ScoreTable score_uniform(std::span<const std::size_t> unlabeled, std::uint64_t seed) {
  ScoreTable t{Strategy::uniform, seed, {unlabeled.begin(), unlabeled.end()}, {}};
  Rng rng(derive_seed(seed, stream::kSelection, 1));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  t.scores.reserve(unlabeled.size());
  for (std::size_t i = 0; i < unlabeled.size(); ++i) t.scores.push_back(u(rng));
  return t;
}

std::vector<std::size_t> select_topk(const ScoreTable& scores, std::size_t k) {
  if (k > scores.size()) {
    throw ContractError("cannot select K = " + std::to_string(k) + " from a pool of " +
                        std::to_string(scores.size()));
  }
  auto ranked = ranked_indices(scores);
  ranked.resize(k);
  return ranked;
}

std::vector<double> embed(const nn::ModelParams& params, const data::Dataset& ds) {
  const std::size_t h = params.shape().hidden_dim;
  std::vector<double> out(ds.size() * h);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto pred = nn::forward(params, ds.row(i));
    std::copy(pred.hidden.begin(), pred.hidden.end(), out.begin() + static_cast<std::ptrdiff_t>(i * h));
  }
  return out;
}

namespace {

double sq_dist(std::span<const double> e, std::size_t dim, std::size_t a, std::size_t b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = e[a * dim + d] - e[b * dim + d];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

std::vector<std::size_t> kcenter_greedy(std::span<const double> embeddings, std::size_t dim,
                                        std::span<const std::size_t> anchors,
                                        std::span<const std::size_t> candidates, std::size_t k) {
  require(!anchors.empty(), "k-center needs a nonempty labeled anchor set");
  require(k <= candidates.size(), "cannot select K = " + std::to_string(k) + " from a pool of " +
                                      std::to_string(candidates.size()));
  std::vector<std::size_t> cand(candidates.begin(), candidates.end());
  std::sort(cand.begin(), cand.end());
  std::vector<double> nearest(cand.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t a : anchors) nearest[i] = std::min(nearest[i], sq_dist(embeddings, dim, cand[i], a));
  }
  std::vector<char> taken(cand.size(), 0);
  std::vector<std::size_t> picks;
  picks.reserve(k);
  while (picks.size() < k) {
    std::size_t best = cand.size();
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (taken[i]) continue;
      if (best == cand.size() || nearest[i] > nearest[best]) best = i;
    }
    taken[best] = 1;
    picks.push_back(cand[best]);
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (!taken[i]) nearest[i] = std::min(nearest[i], sq_dist(embeddings, dim, cand[i], cand[best]));
    }
  }
  return picks;
}

std::vector<std::size_t> select_kcenter(const nn::ModelParams& params, const data::Dataset& ds,
                                        const data::PoolState& pool, std::size_t k) {
  require(!pool.labeled.empty(), "k-center needs a nonempty labeled anchor set");
  const auto emb = embed(params, ds);
  const auto anchors = pool.labeled_indices();
  return kcenter_greedy(emb, params.shape().hidden_dim, anchors, pool.unlabeled, k);
}

ScoreTable score_kcenter(const nn::ModelParams& params, const data::Dataset& ds,
                         const data::PoolState& pool, std::size_t k) {
  k = std::min(k, pool.unlabeled.size());
  const auto picks = select_kcenter(params, ds, pool, k);
  ScoreTable t{Strategy::kcenter, 0, pool.unlabeled, std::vector<double>(pool.unlabeled.size(), 0.0)};
  for (std::size_t r = 0; r < picks.size(); ++r) {
    const auto it = std::find(t.indices.begin(), t.indices.end(), picks[r]);
    t.scores[static_cast<std::size_t>(it - t.indices.begin())] = static_cast<double>(k - r);
  }
  return t;
}

std::vector<std::size_t> select_uniform(const data::PoolState& pool, std::size_t k, Rng& rng) {
  require(k <= pool.unlabeled.size(), "cannot select K = " + std::to_string(k) +
                                          " from a pool of " + std::to_string(pool.unlabeled.size()));
  std::vector<std::size_t> idx;
  idx.reserve(k);
  std::sample(pool.unlabeled.begin(), pool.unlabeled.end(), std::back_inserter(idx), k, rng);
  return idx;
}

}  // namespace alforge::select
