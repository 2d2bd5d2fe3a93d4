#include "alforge/al_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>
#include <random>
#include <sstream>
#include <thread>

#include "alforge/coldstart.hpp"
#include "alforge/error.hpp"
#include "alforge/rng.hpp"

namespace alforge::al {

std::vector<std::string> ALConfig::violations(std::size_t n) const {
  std::vector<std::string> out;
  auto check = [&out](bool ok, std::string msg) {
    if (!ok) out.push_back(std::move(msg));
  };
  check(k0 >= 1, "k0 must be >= 1");
  check(k >= 1, "k must be >= 1");
  check(cycles >= 0, "cycles must be >= 0");
  check(k0 <= n, "k0 (" + std::to_string(k0) + ") exceeds the training pool (" + std::to_string(n) + ")");
  check(hidden_dim >= 1, "hidden_dim must be >= 1");
  check(init_scale >= 0.0, "init_scale must be >= 0");
  check(epochs_per_cycle >= 0, "epochs_per_cycle must be >= 0");
  check(lr > 0.0, "lr must be > 0");
  check(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  check(batch_size >= 1, "batch_size must be >= 1");
  check(unlabeled_batch >= 1, "unlabeled_batch must be >= 1");
  check(loss.unsup_weight >= 0.0, "unsup_weight must be >= 0");
  check(loss.n_train_augs >= 1, "n_train_augs must be >= 1");
  check(aug.sigma >= 0.0, "aug_sigma must be >= 0");
  check(aug.max_shift >= 0, "aug_max_shift must be >= 0");
  check(aug.n_eval_augs >= 1, "n_eval_augs must be >= 1");
  check(!doubling || doubling_threshold >= 1, "doubling needs doubling_threshold >= 1");
  if (k0 >= 1 && k >= 1 && cycles >= 0) {
    std::size_t total = k0;
    for (std::size_t b : batch_schedule(*this)) total += b;
    check(total <= n, "k0 + sum of batch sizes (" + std::to_string(total) +
                          ") exceeds the training pool (" + std::to_string(n) + ")");
  }
  return out;
}

void ALConfig::validate(std::size_t n) const {
  const auto v = violations(n);
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid configuration:";
  for (const auto& s : v) msg << "\n  - " << s;
  throw ContractError(msg.str());
}

std::vector<std::size_t> batch_schedule(const ALConfig& config) {
  std::vector<std::size_t> out;
  std::size_t labeled = config.k0;
  std::size_t doubled = 0;
  for (int t = 0; t < config.cycles; ++t) {
    std::size_t b = config.k;
    if (config.doubling && labeled >= config.doubling_threshold) {
      doubled = doubled == 0 ? config.doubling_threshold : doubled * 2;
      b = doubled;
    }
    out.push_back(b);
    labeled += b;
  }
  return out;
}

nn::ModelParams initial_params(const ALConfig& config, std::size_t input_dim, int classes) {
  return nn::init_params(derive_seed(config.seed, stream::kModelInit),
                         {input_dim, config.hidden_dim, static_cast<std::size_t>(classes)},
                         config.init_scale, config.activation);
}

nn::ModelParams train_cycle(const nn::ModelParams& params, const data::PoolState& pool,
                            const data::Dataset& ds, const ALConfig& config, int cycle) {
  require(!pool.labeled.empty(), "train_cycle needs a nonempty labeled pool");
  nn::ModelParams model = config.warm_start ? params
                                            : initial_params(config, ds.input_dim(), ds.classes());
  if (config.epochs_per_cycle == 0) return model;

  Rng rng(derive_seed(config.seed, stream::kTraining, static_cast<std::uint64_t>(cycle)));
  const auto labeled_idx = pool.labeled_indices();
  const bool use_unlabeled = config.loss.unsup_weight > 0.0 && !pool.unlabeled.empty();
  const std::size_t steps_per_epoch = (pool.total() + config.batch_size - 1) / config.batch_size;

  std::vector<nn::LabeledSample> lbatch;
  std::vector<nn::UnlabeledSample> ubatch;
  std::vector<std::size_t> picked;
  std::uniform_int_distribution<std::size_t> pick_u(0, pool.unlabeled.empty() ? 0 : pool.unlabeled.size() - 1);
  nn::MomentumState state;

  for (int epoch = 0; epoch < config.epochs_per_cycle; ++epoch) {
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      lbatch.clear();
      if (labeled_idx.size() <= config.batch_size) {
        for (std::size_t i : labeled_idx) lbatch.push_back({ds.row(i), pool.labeled.at(i)});
      } else {
        picked.clear();
        std::sample(labeled_idx.begin(), labeled_idx.end(), std::back_inserter(picked),
                    config.batch_size, rng);
        for (std::size_t i : picked) lbatch.push_back({ds.row(i), pool.labeled.at(i)});
      }
      ubatch.clear();
      if (use_unlabeled) {
        for (std::size_t j = 0; j < config.unlabeled_batch; ++j) {
          const std::size_t idx = pool.unlabeled[pick_u(rng)];
          nn::UnlabeledSample u{ds.row(idx), {}};
          u.augs.reserve(static_cast<std::size_t>(config.loss.n_train_augs));
          for (int a = 0; a < config.loss.n_train_augs; ++a) {
            u.augs.push_back(data::augment(ds.row(idx), config.aug, rng));
          }
          ubatch.push_back(std::move(u));
        }
      }
      const auto lg = nn::total_loss_and_grad(model, lbatch, ubatch, config.loss);
      nn::sgd_step(model, lg.grad, config.lr, config.momentum, state);
    }
  }
  return model;
}

double accuracy(const nn::ModelParams& params, const data::Dataset& ds) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto p = nn::forward(params, ds.row(i)).probs;
    const auto arg = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    if (arg == ds.true_labels()[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

std::vector<std::size_t> select_batch(const nn::ModelParams& params, const data::Dataset& ds,
                                      const data::PoolState& pool, const ALConfig& config,
                                      std::size_t k, int cycle) {
  const auto c = static_cast<std::uint64_t>(cycle);
  switch (config.strategy) {
    case select::Strategy::uniform: {
      Rng rng(derive_seed(config.seed, stream::kSelection, c));
      return select::select_uniform(pool, k, rng);
    }
    case select::Strategy::entropy:
      return select::select_topk(select::score_entropy(params, ds, pool.unlabeled), k);
    case select::Strategy::kcenter:
      return select::select_kcenter(params, ds, pool, k);
    case select::Strategy::consistency:
      return select::select_topk(
          select::score_consistency(params, ds, pool.unlabeled, config.aug,
                                    derive_seed(config.seed, stream::kScoring, c)),
          k);
  }
  return {};
}

select::ScoreTable score_pool(const nn::ModelParams& params, const data::Dataset& ds,
                              const data::PoolState& pool, const ALConfig& config,
                              std::size_t k, int cycle) {
  const auto c = static_cast<std::uint64_t>(cycle);
  switch (config.strategy) {
    case select::Strategy::uniform:
      return select::score_uniform(pool.unlabeled, derive_seed(config.seed, stream::kSelection, c));
    case select::Strategy::entropy:
      return select::score_entropy(params, ds, pool.unlabeled);
    case select::Strategy::kcenter:
      return select::score_kcenter(params, ds, pool, k);
    case select::Strategy::consistency:
      return select::score_consistency(params, ds, pool.unlabeled, config.aug,
                                       derive_seed(config.seed, stream::kScoring, c));
  }
  return {};
}

RunResult run_al(const data::Dataset& train, const data::Dataset& test, const ALConfig& config) {
  require(train.input_dim() == test.input_dim() && train.classes() == test.classes(),
          "train and test datasets disagree on shape");
  require(config.k0 >= 1 && config.k0 <= train.size(), "k0 must lie in [1, n]");
  require(config.k >= 1 && config.cycles >= 0, "k must be >= 1 and cycles >= 0");
  config.loss.validate();
  config.aug.validate();

  RunResult out;
  data::PoolState pool = data::init_start_set(train, config.k0, config.balanced_start, config.seed);
  const auto prior = config.prior == PriorKind::uniform
                         ? coldstart::uniform_prior(train.classes())
                         : coldstart::prior_from_labels(pool, train.classes());
  const auto schedule = batch_schedule(config);
  nn::ModelParams model = initial_params(config, train.input_dim(), train.classes());

  for (int t = 0; t <= config.cycles; ++t) {
    const auto start = std::chrono::steady_clock::now();
    model = train_cycle(model, pool, train, config, t);
    CycleRecord rec;
    rec.cycle = t;
    rec.labeled_count = pool.labeled.size();
    rec.test_accuracy = accuracy(model, test);
    rec.target_loss = coldstart::al_target_loss(model, train);
    rec.measure_h = coldstart::measure_cross_entropy(prior, coldstart::pred_marginal(model, train));

    const bool last = t == config.cycles;
    const std::size_t k = last ? 0 : schedule[static_cast<std::size_t>(t)];
    if (!last && pool.unlabeled.size() < k) out.truncated = true;
    if (!last && !out.truncated) {
      rec.selected = select_batch(model, train, pool, config, k, t);
    }
    if (config.record_wallclock) {
      rec.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    out.records.push_back(rec);
    if (last || out.truncated) break;
    pool = data::apply_selection(pool, rec.selected, train);
  }
  out.final_params = std::move(model);
  out.final_pool = std::move(pool);
  return out;
}

std::vector<CycleStats> aggregate(const std::vector<RunResult>& runs) {
  std::size_t max_cycles = 0;
  for (const auto& r : runs) max_cycles = std::max(max_cycles, r.records.size());
  std::vector<CycleStats> out;
  for (std::size_t c = 0; c < max_cycles; ++c) {
    std::vector<const CycleRecord*> recs;
    for (const auto& r : runs) {
      if (c < r.records.size()) recs.push_back(&r.records[c]);
    }
    CycleStats s;
    s.cycle = static_cast<int>(c);
    s.trials = recs.size();
    const double n = static_cast<double>(recs.size());
    auto mean_std = [&](auto field, double& mean, double& sd) {
      // Welford; identical inputs give exactly zero spread.
      mean = 0.0;
      double ss = 0.0, k = 0.0;
      for (const auto* r : recs) {
        k += 1.0;
        const double d = field(*r) - mean;
        mean += d / k;
        ss += d * (field(*r) - mean);
      }
      sd = std::sqrt(ss / n);
    };
    double unused = 0.0;
    mean_std([](const CycleRecord& r) { return static_cast<double>(r.labeled_count); }, s.labeled_mean, unused);
    mean_std([](const CycleRecord& r) { return r.test_accuracy; }, s.acc_mean, s.acc_std);
    mean_std([](const CycleRecord& r) { return r.target_loss; }, s.target_loss_mean, s.target_loss_std);
    mean_std([](const CycleRecord& r) { return r.measure_h; }, s.measure_h_mean, s.measure_h_std);
    out.push_back(s);
  }
  return out;
}

TrialSet run_trials(const data::Dataset& train, const data::Dataset& test, const ALConfig& config,
                    int n_trials, unsigned threads) {
  require(n_trials >= 1, "n_trials must be >= 1");
  TrialSet out;
  out.runs.resize(static_cast<std::size_t>(n_trials));
  auto run_one = [&](int i) {
    ALConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(i);
    out.runs[static_cast<std::size_t>(i)] = run_al(train, test, c);
  };
  threads = std::max(1U, std::min(threads, static_cast<unsigned>(n_trials)));
  if (threads == 1) {
    for (int i = 0; i < n_trials; ++i) run_one(i);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (int i = static_cast<int>(w); i < n_trials; i += static_cast<int>(threads)) run_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : workers) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  out.curves = aggregate(out.runs);
  return out;
}

}  // namespace alforge::al
