#pragma once

// Acquisition strategies: uniform, max-entropy, greedy k-center and the
// augmentation-inconsistency score with additive batch selection.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "alforge/augment.hpp"
#include "alforge/dataset.hpp"
#include "alforge/nn.hpp"
#include "alforge/pool.hpp"
#include "alforge/rng.hpp"

namespace alforge::select {

enum class Strategy { uniform, entropy, kcenter, consistency };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);
inline constexpr Strategy kAllStrategies[] = {Strategy::uniform, Strategy::entropy,
                                              Strategy::kcenter, Strategy::consistency};

/// Per-sample scores over the current unlabeled pool, stored in pool order.
struct ScoreTable {
  Strategy strategy = Strategy::uniform;
  std::uint64_t rng_seed = 0;
  std::vector<std::size_t> indices;
  std::vector<double> scores;

  std::size_t size() const { return indices.size(); }
  /// Score of dataset index `idx`; throws if absent.
  double score_of(std::size_t idx) const;
};

/// Dataset indices ordered by descending score, ties to the smaller index.
std::vector<std::size_t> ranked_indices(const ScoreTable& table);

/// 1-based rank of each entry of table.indices under ranked_indices.
std::vector<std::size_t> ranks(const ScoreTable& table);

/// -sum p log p, with 0 log 0 = 0.
double predictive_entropy(std::span<const double> probs);

/// Sum over classes of the population variance of the class probability
/// across the clean prediction and each augmented prediction.
double inconsistency(const nn::ModelParams& params, std::span<const double> x,
                     std::span<const nn::Vector> augs);

/// Same quantity from precomputed probability vectors (first = clean).
double inconsistency_from_probs(std::span<const nn::Vector> probs);

/// Seed of the augmentation stream for dataset index `idx` in a scoring pass.
std::uint64_t sample_stream_seed(std::uint64_t global_seed, std::size_t idx);

/// The N augmentations drawn for `idx` during a consistency scoring pass.
std::vector<nn::Vector> scoring_augmentations(std::span<const double> x,
                                              const data::AugmentationSpec& spec,
                                              std::uint64_t global_seed, std::size_t idx);

ScoreTable score_entropy(const nn::ModelParams& params, const data::Dataset& ds,
                         std::span<const std::size_t> unlabeled);

ScoreTable score_consistency(const nn::ModelParams& params, const data::Dataset& ds,
                             std::span<const std::size_t> unlabeled,
                             const data::AugmentationSpec& spec, std::uint64_t seed);

/// Random scores in [0, 1); ranking by them is a uniform random permutation.
ScoreTable score_uniform(std::span<const std::size_t> unlabeled, std::uint64_t seed);

/// k-center expressed as a ranking: the first `k` greedy picks receive scores
/// k, k-1, ..., 1 in pick order; everything else scores 0.
ScoreTable score_kcenter(const nn::ModelParams& params, const data::Dataset& ds,
                         const data::PoolState& pool, std::size_t k);

/// The K highest scores. Because the batch objective is a sum of per-sample
/// scores, this is the exact maximizer over all size-K subsets.
std::vector<std::size_t> select_topk(const ScoreTable& scores, std::size_t k);

/// Greedy farthest-first traversal in hidden-feature space, anchored on the
/// labeled pool.
std::vector<std::size_t> select_kcenter(const nn::ModelParams& params, const data::Dataset& ds,
                                        const data::PoolState& pool, std::size_t k);

/// Same traversal on explicit embeddings (row-major, `dim` columns).
/// `anchors` and `candidates` index rows of `embeddings`.
std::vector<std::size_t> kcenter_greedy(std::span<const double> embeddings, std::size_t dim,
                                        std::span<const std::size_t> anchors,
                                        std::span<const std::size_t> candidates, std::size_t k);

std::vector<std::size_t> select_uniform(const data::PoolState& pool, std::size_t k, Rng& rng);

/// Hidden-layer embeddings of the whole dataset (n x hidden_dim, row-major).
std::vector<double> embed(const nn::ModelParams& params, const data::Dataset& ds);

}  // namespace alforge::select
