#pragma once

// Selection-quality analyses over a frozen model: overconfident mistakes among
// top-ranked samples, entropy by rank group, diversity of the top set,
// selected class mix against per-class error, and a 2-D PCA projection.
// These read oracle labels; selection code never does.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "alforge/dataset.hpp"
#include "alforge/nn.hpp"
#include "alforge/selection.hpp"

namespace alforge::diag {

/// ceil(frac * n), at least 1 and at most n.
std::size_t top_count(std::size_t n, double frac);

struct ThresholdCount {
  double threshold = 0.0;
  std::size_t count = 0;
};

/// Among the top `frac` of the ranking, the number of wrongly classified
/// samples whose max class probability exceeds each threshold.
std::vector<ThresholdCount> overconfident_miscount(const nn::ModelParams& params,
                                                   const data::Dataset& ds,
                                                   const select::ScoreTable& ranked, double frac,
                                                   std::span<const double> thresholds);

struct GroupEntropy {
  std::size_t group = 0;
  std::size_t size = 0;
  double mean_entropy = 0.0;
};

/// Splits the ranking into contiguous groups (remainder spread over the
/// leading groups; one group per sample when the pool is smaller than
/// n_groups) and averages the predictive entropy within each.
std::vector<GroupEntropy> rank_group_entropy(const nn::ModelParams& params,
                                             const data::Dataset& ds,
                                             const select::ScoreTable& ranked,
                                             std::size_t n_groups = 100);

/// Mean pairwise Euclidean distance between rows `idx` of a row-major
/// embedding matrix. Throws on fewer than two rows.
double mean_pairwise_distance(std::span<const double> embeddings, std::size_t dim,
                              std::span<const std::size_t> idx);

/// Mean pairwise distance between hidden embeddings of the top `frac` samples.
double top_frac_diversity(const nn::ModelParams& params, const data::Dataset& ds,
                          const select::ScoreTable& ranked, double frac);

struct ClassDistReport {
  std::vector<double> class_hist;   // fraction of selected samples per class
  std::vector<double> class_error;  // per-class test error
  std::optional<double> rank_correlation;  // nullopt: degenerate (constant input)
};

ClassDistReport class_dist_vs_error(const nn::ModelParams& params, const data::Dataset& test,
                                    std::span<const std::size_t> selected,
                                    const data::Dataset& train);

/// Spearman rank correlation with average ranks for ties.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

struct PcaResult {
  std::vector<double> coords;      // n x 2, row-major
  std::vector<int> selected;       // copied flag column
  double variance[2] = {0.0, 0.0}; // eigenvalues of the covariance (1/n)
  std::vector<double> components;  // 2 x d, row-major
  bool rank_deficient = false;
};

/// Distance from each of samples `idx` to the argmax decision boundary of a
/// model over 2-D inputs. The boundary is located on a resolution x resolution
/// grid spanning [lo, hi]^2, so distances carry an error of about one cell.
/// Returns +inf for every sample when no boundary crosses the window.
std::vector<double> boundary_distance_2d(const nn::ModelParams& params, const data::Dataset& ds,
                                         std::span<const std::size_t> idx, double lo = -3.0,
                                         double hi = 3.0, std::size_t resolution = 301);

/// Centers `features` (n x dim) and projects onto the two leading principal
/// directions found by power iteration with deflation (tolerance 1e-9,
/// deterministic start vector). Each direction's first nonzero loading is
/// positive.
PcaResult pca_project(std::span<const double> features, std::size_t dim,
                      std::span<const int> selected);

}  // namespace alforge::diag
