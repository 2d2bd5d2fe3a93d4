#pragma once

// Cold-start analysis: the target loss on the fully labeled pool, the
// label-free cross-entropy measure H[p(Y), p(Yhat)], exact verification of the
// bracket that relates the two, and the start-size stopping rule.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alforge/dataset.hpp"
#include "alforge/nn.hpp"
#include "alforge/pool.hpp"

namespace alforge::al {
struct ALConfig;
}

namespace alforge::coldstart {

using Distribution = std::vector<double>;

/// Mean -log p(Yhat = y | x) over every sample of `ds` using oracle labels.
/// Evaluation only; never feeds back into selection.
double al_target_loss(const nn::ModelParams& params, const data::Dataset& ds);

/// p(Yhat = l) estimated as the mean softmax output over `ds` (no labels used).
Distribution pred_marginal(const nn::ModelParams& params, const data::Dataset& ds);

/// H[p, q] = -sum_l p_l log max(q_l, 1e-12).
double measure_cross_entropy(std::span<const double> prior, std::span<const double> marginal);

Distribution uniform_prior(int classes);

/// Class frequencies of the revealed labels in `pool`.
Distribution prior_from_labels(const data::PoolState& pool, int classes);

/// Quantities of the risk bracket on a finite joint distribution.
struct BoundCheck {
  double lower = 0.0;          // H[p(Y), p(Yhat)] - H[p(X)]
  double risk = 0.0;           // E_X H[p(Y|X), p(Yhat|X)]
  double upper = 0.0;          // lower - log Z_hat
  double z_hat = 0.0;          // min_{x,y} p(X = x | Yhat = y), in [0, 1]
  double h_px = 0.0;           // H[p(X)]
  double cross_entropy = 0.0;  // H[p(Y), p(Yhat)]

  bool holds(double tol = 1e-12) const { return lower <= risk + tol && risk <= upper + tol; }
};

/// Row-major table over a finite X support (rows) and label support (columns).
struct DiscreteTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t x, std::size_t y) const { return values[x * cols + y]; }
};

/// Exact enumeration of the bracket for joint p(X, Y) and classifier
/// p(Yhat | X). Both tables share the label support. Z_hat = 0 makes the
/// upper bound +inf. Throws NumericError naming (x, y) when p(X = x | Yhat = y)
/// is undefined because p(Yhat = y) is zero.
BoundCheck verify_prop1(const DiscreteTable& joint, const DiscreteTable& classifier);

struct MeasureRecord {
  std::size_t labeled_count = 0;
  std::uint64_t seed = 0;
  double measure_h = 0.0;
  double target_loss = 0.0;
  Distribution assumed_prior;
};

struct StartSizeDecision {
  std::size_t size = 0;
  bool converged = false;
  std::vector<double> delta_h;  // |H_i - H_{i-1}| for i = 1..n-1
};

/// Smallest labeled count whose |delta H| to the previous point is <= epsilon;
/// otherwise the largest measured size with converged = false.
StartSizeDecision start_size_rule(std::span<const MeasureRecord> measurements, double epsilon);

/// Trains one model per (size, seed) on nested class-balanced start sets and
/// records the measure and the target loss. Records are ordered by seed, then
/// size. Training follows `config` (SSL when unsup_weight > 0).
std::vector<MeasureRecord> sweep_start_sizes(const data::Dataset& ds,
                                             std::span<const std::size_t> sizes,
                                             const al::ALConfig& config,
                                             std::span<const std::uint64_t> seeds);

/// Per-size means over seeds, ordered by size.
std::vector<MeasureRecord> mean_by_size(std::span<const MeasureRecord> records);

/// Sample Pearson correlation; nullopt when either input is constant.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

}  // namespace alforge::coldstart
