#include "alforge/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>

#include "alforge/coldstart.hpp"
#include "alforge/error.hpp"

namespace alforge::diag {

std::size_t top_count(std::size_t n, double frac) {
  require(frac > 0.0 && frac <= 1.0, "top fraction must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

std::vector<ThresholdCount> overconfident_miscount(const nn::ModelParams& params,
                                                   const data::Dataset& ds,
                                                   const select::ScoreTable& ranked, double frac,
                                                   std::span<const double> thresholds) {
  const auto order = select::ranked_indices(ranked);
  const std::size_t top = top_count(order.size(), frac);
  std::vector<ThresholdCount> out;
  for (double t : thresholds) out.push_back({t, 0});
  for (std::size_t r = 0; r < top && r < order.size(); ++r) {
    const auto p = nn::forward(params, ds.row(order[r])).probs;
    const auto best = std::max_element(p.begin(), p.end());
    if (static_cast<int>(best - p.begin()) == ds.true_labels()[order[r]]) continue;
    for (auto& tc : out) {
      if (*best > tc.threshold) ++tc.count;
    }
  }
  return out;
}

std::vector<GroupEntropy> rank_group_entropy(const nn::ModelParams& params,
                                             const data::Dataset& ds,
                                             const select::ScoreTable& ranked,
                                             std::size_t n_groups) {
  require(ranked.size() > 0, "rank_group_entropy on an empty pool");
  require(n_groups >= 1, "need at least one group");
  const auto order = select::ranked_indices(ranked);
  const std::size_t n = order.size();
  const std::size_t groups = n >= n_groups ? n_groups : n;
  const std::size_t base = n / groups;
  const std::size_t extra = n % groups;
  std::vector<GroupEntropy> out;
  std::size_t pos = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t len = base + (g < extra ? 1 : 0);
    double acc = 0.0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      acc += select::predictive_entropy(nn::forward(params, ds.row(order[i])).probs);
    }
    out.push_back({g, len, acc / static_cast<double>(len)});
    pos += len;
  }
  return out;
}

double mean_pairwise_distance(std::span<const double> embeddings, std::size_t dim,
                              std::span<const std::size_t> idx) {
  require(idx.size() >= 2, "diversity needs at least two samples");
  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = embeddings[idx[a] * dim + k] - embeddings[idx[b] * dim + k];
        d2 += diff * diff;
      }
      acc += std::sqrt(d2);
      ++pairs;
    }
  }
  return acc / static_cast<double>(pairs);
}

double top_frac_diversity(const nn::ModelParams& params, const data::Dataset& ds,
                          const select::ScoreTable& ranked, double frac) {
  auto order = select::ranked_indices(ranked);
  order.resize(std::min(order.size(), top_count(order.size(), frac)));
  require(order.size() >= 2, "top fraction holds fewer than two samples");
  const auto emb = select::embed(params, ds);
  return mean_pairwise_distance(emb, params.shape().hidden_dim, order);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return coldstart::pearson(ra, rb);
}

ClassDistReport class_dist_vs_error(const nn::ModelParams& params, const data::Dataset& test,
                                    std::span<const std::size_t> selected,
                                    const data::Dataset& train) {
  require(!selected.empty(), "class distribution needs a nonempty selection");
  const auto j = static_cast<std::size_t>(train.classes());
  ClassDistReport rep;
  rep.class_hist.assign(j, 0.0);
  for (std::size_t idx : selected) rep.class_hist[static_cast<std::size_t>(data::oracle_label(train, idx))] += 1.0;
  for (double& v : rep.class_hist) v /= static_cast<double>(selected.size());

  std::vector<double> wrong(j, 0.0);
  std::vector<double> count(j, 0.0);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto p = nn::forward(params, test.row(i)).probs;
    const auto y = static_cast<std::size_t>(test.true_labels()[i]);
    count[y] += 1.0;
    if (static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()) != y) wrong[y] += 1.0;
  }
  rep.class_error.assign(j, 0.0);
  for (std::size_t c = 0; c < j; ++c) rep.class_error[c] = count[c] > 0.0 ? wrong[c] / count[c] : 0.0;
  if (j >= 2) rep.rank_correlation = spearman(rep.class_hist, rep.class_error);
  return rep;
}

namespace {

std::size_t argmax(const nn::Vector& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace

std::vector<double> boundary_distance_2d(const nn::ModelParams& params, const data::Dataset& ds,
                                         std::span<const std::size_t> idx, double lo, double hi,
                                         std::size_t resolution) {
  require(ds.input_dim() == 2, "boundary_distance_2d needs 2-D inputs");
  require(resolution >= 2 && hi > lo, "invalid boundary grid");
  const std::size_t r = resolution;
  const double h = (hi - lo) / static_cast<double>(r - 1);
  std::vector<std::size_t> cls(r * r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      const double x[2] = {lo + static_cast<double>(i) * h, lo + static_cast<double>(j) * h};
      cls[i * r + j] = argmax(nn::forward(params, x).probs);
    }
  }
  // Midpoints of grid edges whose endpoints disagree.
  std::vector<std::array<double, 2>> edge;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      const double xi = lo + static_cast<double>(i) * h, xj = lo + static_cast<double>(j) * h;
      if (i + 1 < r && cls[i * r + j] != cls[(i + 1) * r + j]) edge.push_back({xi + 0.5 * h, xj});
      if (j + 1 < r && cls[i * r + j] != cls[i * r + j + 1]) edge.push_back({xi, xj + 0.5 * h});
    }
  }
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t k : idx) {
    const auto x = ds.row(k);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : edge) best = std::min(best, std::hypot(x[0] - e[0], x[1] - e[1]));
    out.push_back(best);
  }
  return out;
}

namespace {

std::vector<double> mat_vec(const std::vector<double>& m, std::size_t d, const std::vector<double>& v) {
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out[i] += m[i * d + j] * v[j];
  return out;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Leading eigenpair of a symmetric PSD matrix by power iteration.
std::pair<double, std::vector<double>> power_iterate(const std::vector<double>& cov, std::size_t d) {
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
  double nv = norm(v);
  for (double& x : v) x /= nv;
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    auto w = mat_vec(cov, d, v);
    const double nw = norm(w);
    if (nw == 0.0) return {0.0, v};
    for (double& x : w) x /= nw;
    double diff = 0.0;
    for (std::size_t i = 0; i < d; ++i) diff = std::max(diff, std::abs(w[i] - v[i]));
    v = std::move(w);
    lambda = nw;
    if (diff < 1e-9) break;
  }
  // Rayleigh quotient.
  const auto cv = mat_vec(cov, d, v);
  lambda = 0.0;
  for (std::size_t i = 0; i < d; ++i) lambda += v[i] * cv[i];
  return {lambda, v};
}

void fix_sign(std::vector<double>& v) {
  for (double x : v) {
    if (std::abs(x) > 1e-12) {
      if (x < 0.0) for (double& y : v) y = -y;
      return;
    }
  }
}

}  // namespace

PcaResult pca_project(std::span<const double> features, std::size_t dim,
                      std::span<const int> selected) {
  require(dim >= 2, "PCA needs at least two feature dimensions");
  require(features.size() % dim == 0, "feature matrix size is not a multiple of dim");
  const std::size_t n = features.size() / dim;
  require(n >= 2, "PCA needs at least two samples");
  require(selected.empty() || selected.size() == n, "selected flags must match the sample count");

  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k) mean[k] += features[i * dim + k];
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<double> cov(dim * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < dim; ++a) {
      const double ca = features[i * dim + a] - mean[a];
      for (std::size_t b = a; b < dim; ++b) cov[a * dim + b] += ca * (features[i * dim + b] - mean[b]);
    }
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a; b < dim; ++b) {
      cov[a * dim + b] /= static_cast<double>(n);
      cov[b * dim + a] = cov[a * dim + b];
    }

  PcaResult out;
  auto [l1, v1] = power_iterate(cov, dim);
  fix_sign(v1);
  // Deflate and repeat.
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) cov[a * dim + b] -= l1 * v1[a] * v1[b];
  auto [l2, v2] = power_iterate(cov, dim);
  // Re-orthogonalize against v1.
  double dot = 0.0;
  for (std::size_t k = 0; k < dim; ++k) dot += v1[k] * v2[k];
  for (std::size_t k = 0; k < dim; ++k) v2[k] -= dot * v1[k];
  const double n2 = norm(v2);
  const double scale = std::max(1.0, std::abs(l1));
  if (l1 <= 1e-12 * scale || l2 <= 1e-12 * scale || n2 < 1e-9) {
    out.rank_deficient = true;
    l2 = 0.0;
    std::fill(v2.begin(), v2.end(), 0.0);
  } else {
    for (double& x : v2) x /= n2;
    fix_sign(v2);
  }
  if (l1 <= 1e-12 * scale) {
    out.rank_deficient = true;
    l1 = std::max(l1, 0.0);
  }
  out.variance[0] = l1;
  out.variance[1] = std::max(l2, 0.0);
  out.components.insert(out.components.end(), v1.begin(), v1.end());
  out.components.insert(out.components.end(), v2.begin(), v2.end());
  out.coords.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    double p1 = 0.0;
    double p2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double c = features[i * dim + k] - mean[k];
      p1 += c * v1[k];
      p2 += c * v2[k];
    }
    out.coords[2 * i] = p1;
    out.coords[2 * i + 1] = out.rank_deficient ? 0.0 : p2;
  }
  out.selected.assign(selected.begin(), selected.end());
  if (out.selected.empty()) out.selected.assign(n, 0);
  return out;
}

}  // namespace alforge::diag
