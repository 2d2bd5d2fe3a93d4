#pragma once

// The label / select / retrain cycle.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "alforge/augment.hpp"
#include "alforge/dataset.hpp"
#include "alforge/nn.hpp"
#include "alforge/pool.hpp"
#include "alforge/selection.hpp"

namespace alforge::al {

enum class PriorKind { uniform, start_set };

struct ALConfig {
  // Budget.
  std::size_t k0 = 10;
  std::size_t k = 10;
  bool doubling = false;
  std::size_t doubling_threshold = 0;  // first labeled count at which K switches to doubling
  int cycles = 4;                      // T
  bool balanced_start = true;

  // Model and optimizer.
  std::size_t hidden_dim = 32;
  nn::Activation activation = nn::Activation::relu;
  double init_scale = 0.5;
  int epochs_per_cycle = 200;
  double lr = 0.2;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  std::size_t unlabeled_batch = 64;
  bool warm_start = true;

  nn::LossSpec loss{};
  data::AugmentationSpec aug{};
  select::Strategy strategy = select::Strategy::consistency;
  PriorKind prior = PriorKind::uniform;

  std::uint64_t seed = 0;
  bool record_wallclock = false;

  /// Every violated constraint against a training pool of `n` samples.
  std::vector<std::string> violations(std::size_t n) const;
  /// Throws ContractError listing all violations.
  void validate(std::size_t n) const;
};

/// Batch size used at each of the T selection steps.
std::vector<std::size_t> batch_schedule(const ALConfig& config);

struct CycleRecord {
  int cycle = 0;
  std::size_t labeled_count = 0;
  double test_accuracy = 0.0;
  double target_loss = 0.0;
  double measure_h = 0.0;
  std::vector<std::size_t> selected;  // batch chosen from this cycle's model
  double wallclock_ms = 0.0;

  bool operator==(const CycleRecord&) const = default;
};

struct RunResult {
  std::vector<CycleRecord> records;
  nn::ModelParams final_params;
  data::PoolState final_pool;
  bool truncated = false;
};

/// Parameters every run starts from before the first training cycle.
nn::ModelParams initial_params(const ALConfig& config, std::size_t input_dim, int classes);

/// One cycle of SSL (or supervised, with unsup_weight = 0) mini-batch SGD.
/// Warm start continues from `params`; otherwise training restarts from
/// initial_params. `cycle` selects the training random stream.
nn::ModelParams train_cycle(const nn::ModelParams& params, const data::PoolState& pool,
                            const data::Dataset& ds, const ALConfig& config, int cycle);

double accuracy(const nn::ModelParams& params, const data::Dataset& ds);

/// Chooses the next batch of `k` indices with the configured strategy.
std::vector<std::size_t> select_batch(const nn::ModelParams& params, const data::Dataset& ds,
                                      const data::PoolState& pool, const ALConfig& config,
                                      std::size_t k, int cycle);

/// The configured strategy's scores over the unlabeled pool, drawn from the
/// same random streams select_batch would use at `cycle`. For uniform the
/// table is a random ranking; for kcenter it encodes the first `k` picks.
select::ScoreTable score_pool(const nn::ModelParams& params, const data::Dataset& ds,
                              const data::PoolState& pool, const ALConfig& config,
                              std::size_t k, int cycle);

RunResult run_al(const data::Dataset& train, const data::Dataset& test, const ALConfig& config);

struct CycleStats {
  int cycle = 0;
  std::size_t trials = 0;
  double labeled_mean = 0.0;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  double target_loss_mean = 0.0;
  double target_loss_std = 0.0;
  double measure_h_mean = 0.0;
  double measure_h_std = 0.0;
};

struct TrialSet {
  std::vector<RunResult> runs;  // runs[i] used seed config.seed + i
  std::vector<CycleStats> curves;
};

/// Per-cycle mean and population standard deviation across runs.
std::vector<CycleStats> aggregate(const std::vector<RunResult>& runs);

/// run_al with seeds seed, seed+1, ..., seed+n_trials-1. Up to `threads`
/// trials execute concurrently; output order and contents do not depend on it.
TrialSet run_trials(const data::Dataset& train, const data::Dataset& test, const ALConfig& config,
                    int n_trials, unsigned threads = 1);

}  // namespace alforge::al
