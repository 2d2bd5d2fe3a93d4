#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "alforge/dataset.hpp"

namespace alforge::data {

/// Labeled / unlabeled partition of the training indices.
struct PoolState {
  std::map<std::size_t, int> labeled;  // index -> revealed label
  std::vector<std::size_t> unlabeled;  // insertion order
  int cycle = 0;

  std::size_t total() const { return labeled.size() + unlabeled.size(); }
  std::vector<std::size_t> labeled_indices() const;
  bool is_labeled(std::size_t idx) const { return labeled.count(idx) != 0; }

  bool operator==(const PoolState&) const = default;
};

/// Draws the start set B_0. With `balanced`, exactly k0 / J per class
/// (k0 must then be divisible by J). Remaining indices form U_0 in index order.
PoolState init_start_set(const Dataset& ds, std::size_t k0, bool balanced, std::uint64_t seed);

/// Moves `batch` from unlabeled to labeled with oracle labels; cycle += 1.
PoolState apply_selection(const PoolState& pool, std::span<const std::size_t> batch,
                          const Dataset& ds);

/// Verifies disjointness, coverage of [0, n), and oracle fidelity. Throws
/// ContractError describing the first violation.
void check_pool(const PoolState& pool, const Dataset& ds);

/// A class-balanced random ordering of all indices: classes are interleaved so
/// that every prefix is balanced to within one sample per class. Prefixes
/// give nested start sets.
std::vector<std::size_t> balanced_order(const Dataset& ds, std::uint64_t seed);

/// Pool whose labeled set is exactly `labeled_idx` (labels from the oracle).
PoolState pool_from_labeled(const Dataset& ds, std::span<const std::size_t> labeled_idx);

}  // namespace alforge::data
