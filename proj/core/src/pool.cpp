#include "alforge/pool.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "alforge/error.hpp"
#include "alforge/rng.hpp"

namespace alforge::data {

std::vector<std::size_t> PoolState::labeled_indices() const {
  std::vector<std::size_t> out;
  out.reserve(labeled.size());
  for (const auto& [idx, _] : labeled) out.push_back(idx);
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.classes()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.true_labels()[i])].push_back(i);
  }
  return by_class;
}

}  // namespace

PoolState pool_from_labeled(const Dataset& ds, std::span<const std::size_t> labeled_idx) {
  PoolState pool;
  for (std::size_t idx : labeled_idx) {
    if (!pool.labeled.emplace(idx, oracle_label(ds, idx)).second) {
      throw ContractError("index " + std::to_string(idx) + " appears twice in the labeled set");
    }
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!pool.is_labeled(i)) pool.unlabeled.push_back(i);
  }
  return pool;
}

PoolState init_start_set(const Dataset& ds, std::size_t k0, bool balanced, std::uint64_t seed) {
  require(k0 <= ds.size(), "start size K0 = " + std::to_string(k0) + " exceeds pool size " +
                               std::to_string(ds.size()));
  Rng rng(derive_seed(seed, stream::kStartSet));
  std::vector<std::size_t> chosen;
  if (balanced) {
    const auto j = static_cast<std::size_t>(ds.classes());
    if (k0 % j != 0) {
      throw ContractError("balanced start set needs K0 divisible by J (K0 = " + std::to_string(k0) +
                          ", J = " + std::to_string(j) + ")");
    }
    auto by_class = indices_by_class(ds);
    for (std::size_t c = 0; c < j; ++c) {
      auto& idx = by_class[c];
      if (idx.size() < k0 / j) {
        throw ContractError("class " + std::to_string(c) + " has only " + std::to_string(idx.size()) +
                            " samples; balanced start set needs " + std::to_string(k0 / j));
      }
      std::shuffle(idx.begin(), idx.end(), rng);
      chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k0 / j));
    }
  } else {
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k0));
  }
  return pool_from_labeled(ds, chosen);
}

PoolState apply_selection(const PoolState& pool, std::span<const std::size_t> batch,
                          const Dataset& ds) {
  PoolState next = pool;
  std::vector<std::size_t> taken;
  for (std::size_t idx : batch) {
    if (pool.is_labeled(idx)) {
      throw ContractError("selected index " + std::to_string(idx) + " is already labeled");
    }
    if (std::find(pool.unlabeled.begin(), pool.unlabeled.end(), idx) == pool.unlabeled.end()) {
      throw ContractError("selected index " + std::to_string(idx) + " is not in the unlabeled pool");
    }
    if (!next.labeled.emplace(idx, oracle_label(ds, idx)).second) {
      throw ContractError("selected index " + std::to_string(idx) + " appears twice in the batch");
    }
  }
  std::erase_if(next.unlabeled, [&](std::size_t i) { return next.is_labeled(i); });
  next.cycle = pool.cycle + 1;
  return next;
}

void check_pool(const PoolState& pool, const Dataset& ds) {
  std::vector<char> seen(ds.size(), 0);
  for (const auto& [idx, label] : pool.labeled) {
    require(idx < ds.size(), "labeled index " + std::to_string(idx) + " out of range");
    require(label == ds.true_labels()[idx],
            "revealed label for index " + std::to_string(idx) + " differs from ground truth");
    seen[idx] = 1;
  }
  for (std::size_t idx : pool.unlabeled) {
    require(idx < ds.size(), "unlabeled index " + std::to_string(idx) + " out of range");
    require(seen[idx] == 0, "index " + std::to_string(idx) + " is both labeled and unlabeled (or repeated)");
    seen[idx] = 1;
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    require(seen[i] == 1, "index " + std::to_string(i) + " missing from the pool");
  }
}

std::vector<std::size_t> balanced_order(const Dataset& ds, std::uint64_t seed) {
  Rng rng(derive_seed(seed, stream::kStartSet, 1));
  auto by_class = indices_by_class(ds);
  for (auto& idx : by_class) std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> order;
  order.reserve(ds.size());
  for (std::size_t round = 0; order.size() < ds.size(); ++round) {
    for (const auto& idx : by_class) {
      if (round < idx.size()) order.push_back(idx[round]);
    }
  }
  return order;
}

}  // namespace alforge::data
