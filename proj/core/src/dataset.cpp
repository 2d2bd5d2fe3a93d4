#include "alforge/dataset.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "alforge/error.hpp"
#include "alforge/rng.hpp"

namespace alforge::data {

Dataset::Dataset(std::string name, Split split, std::size_t input_dim, int classes,
                 std::vector<double> features, std::vector<int> labels)
    : name_(std::move(name)),
      split_(split),
      input_dim_(input_dim),
      classes_(classes),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  require(!labels_.empty(), "dataset must contain at least one sample");
  require(input_dim_ > 0, "dataset input_dim must be positive");
  require(classes_ >= 1, "dataset needs at least one class");
  require(features_.size() == labels_.size() * input_dim_,
          "feature matrix size does not match labels x input_dim");
  for (int y : labels_) {
    require(y >= 0 && y < classes_, "label " + std::to_string(y) + " outside [0, J)");
  }
  for (double v : features_) require(std::isfinite(v), "dataset features must be finite");
}

std::uint64_t Dataset::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims[2] = {input_dim_, static_cast<std::uint64_t>(classes_)};
  feed(dims, sizeof dims);
  feed(features_.data(), features_.size() * sizeof(double));
  feed(labels_.data(), labels_.size() * sizeof(int));
  return h;
}

namespace {

struct Moments {
  std::vector<double> mean;
  std::vector<double> stdev;
};

Moments column_moments(const std::vector<double>& x, std::size_t dim) {
  const std::size_t n = x.size() / dim;
  Moments m{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) m.mean[d] += x[i * dim + d];
  for (double& v : m.mean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      const double c = x[i * dim + d] - m.mean[d];
      m.stdev[d] += c * c;
    }
  for (double& v : m.stdev) {
    v = std::sqrt(v / static_cast<double>(n));
    if (v == 0.0) v = 1.0;
  }
  return m;
}

void standardize(std::vector<double>& x, std::size_t dim, const Moments& m) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t d = i % dim;
    x[i] = (x[i] - m.mean[d]) / m.stdev[d];
  }
}

std::string split_suffix(Split s) { return s == Split::train ? "train" : "test"; }

}  // namespace

std::vector<double> two_moons_raw(std::size_t n, double noise_sigma, std::uint64_t seed,
                                  std::vector<int>* labels) {
  require(n >= 2, "two_moons needs n >= 2");
  require(n % 2 == 0, "two_moons needs an even n");
  require(noise_sigma >= 0.0, "two_moons noise must be >= 0");
  Rng rng(derive_seed(seed, stream::kData, 0));
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(2 * n);
  if (labels) labels->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    const double t = angle(rng);
    double px;
    double py;
    if (y == 0) {
      px = std::cos(t);
      py = std::sin(t);
    } else {
      px = 1.0 - std::cos(t);
      py = 0.5 - std::sin(t);
    }
    if (noise_sigma > 0.0) {
      px += noise_sigma * noise(rng);
      py += noise_sigma * noise(rng);
    }
    x[2 * i] = px;
    x[2 * i + 1] = py;
    if (labels) (*labels)[i] = y;
  }
  return x;
}

Dataset gen_two_moons(std::size_t n, double noise_sigma, std::uint64_t seed, Split split) {
  std::vector<int> labels;
  auto x = two_moons_raw(n, noise_sigma, seed, &labels);
  standardize(x, 2, column_moments(x, 2));
  return Dataset("two_moons_" + split_suffix(split), split, 2, 2, std::move(x), std::move(labels));
}

namespace {

std::vector<double> blob_centers(int classes, std::uint64_t centers_seed, std::size_t dim) {
  Rng rng(derive_seed(centers_seed, stream::kData, 1));
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> c(static_cast<std::size_t>(classes) * dim);
  for (double& v : c) v = u(rng);
  return c;
}

std::vector<double> blob_points(std::size_t n, int classes, const std::vector<double>& centers,
                                double spread, std::uint64_t seed, std::size_t dim,
                                std::vector<int>& labels) {
  Rng rng(derive_seed(seed, stream::kData, 2));
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n * dim);
  labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(classes));
    labels[i] = y;
    for (std::size_t d = 0; d < dim; ++d) {
      const double c = centers[static_cast<std::size_t>(y) * dim + d];
      x[i * dim + d] = spread > 0.0 ? c + spread * g(rng) : c;
    }
  }
  return x;
}

}  // namespace

Dataset gen_blobs(std::size_t n, int classes, std::uint64_t centers_seed, double spread,
                  std::uint64_t seed, std::size_t dim, Split split) {
  require(classes >= 2, "blobs need J >= 2");
  require(n >= 1, "blobs need n >= 1");
  require(spread >= 0.0, "blob spread must be >= 0");
  require(dim >= 1, "blob dimension must be >= 1");
  std::vector<int> labels;
  auto x = blob_points(n, classes, blob_centers(classes, centers_seed, dim), spread, seed, dim,
                       labels);
  return Dataset("blobs_" + split_suffix(split), split, dim, classes, std::move(x),
                 std::move(labels));
}

int grid_template_count() { return 8; }

std::vector<double> grid_template(int cls, std::size_t grid_dim) {
  require(grid_dim >= 4, "grid_dim must be >= 4");
  require(cls >= 0 && cls < grid_template_count(), "no grid template for class " + std::to_string(cls));
  const int g = static_cast<int>(grid_dim);
  // Distance of a row/column from the grid's mirror axis, in half-cells.
  auto off = [g](int k) { return std::abs(2 * k - (g - 1)); };
  std::vector<double> t(grid_dim * grid_dim, 0.0);
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      bool on = false;
      switch (cls) {
        case 0: on = off(r) <= 1; break;                                      // horizontal bar
        case 1: on = off(c) <= 1; break;                                      // vertical bar
        case 2: on = (r == 1 || r == g - 2 || c == 1 || c == g - 2) &&        // hollow square
                     r >= 1 && r <= g - 2 && c >= 1 && c <= g - 2; break;
        case 3: on = c == r || c == g - 1 - r; break;                         // X
        case 4: on = off(r) <= g / 2 && off(c) <= g / 2; break;               // center block
        case 5: on = r < g / 2; break;                                        // top half
        case 6: on = r < 2 && (c < 2 || c >= g - 2); break;                   // top corners
        case 7: on = off(r) + off(c) == g || off(r) + off(c) == g - 2; break; // diamond
        default: break;
      }
      t[static_cast<std::size_t>(r * g + c)] = on ? 1.0 : 0.0;
    }
  }
  return t;
}

namespace {

std::vector<double> grid_points(std::size_t n, int classes, std::size_t grid_dim, double noise,
                                std::uint64_t seed, std::uint64_t stream_index,
                                std::vector<int>& labels) {
  const std::size_t dim = grid_dim * grid_dim;
  std::vector<std::vector<double>> templates;
  for (int c = 0; c < classes; ++c) templates.push_back(grid_template(c, grid_dim));
  Rng rng(derive_seed(seed, stream::kData, stream_index));
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n * dim);
  labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(classes));
    labels[i] = y;
    const auto& t = templates[static_cast<std::size_t>(y)];
    for (std::size_t d = 0; d < dim; ++d) x[i * dim + d] = noise > 0.0 ? t[d] + noise * g(rng) : t[d];
  }
  return x;
}

}  // namespace

Dataset gen_grid_patterns(std::size_t n, int classes, std::size_t grid_dim, double noise,
                          std::uint64_t seed, Split split) {
  require(grid_dim >= 4, "grid_dim must be >= 4");
  require(classes >= 2 && classes <= grid_template_count(),
          "grid patterns support 2.." + std::to_string(grid_template_count()) + " classes");
  require(n >= 1, "grid patterns need n >= 1");
  require(noise >= 0.0, "grid noise must be >= 0");
  std::vector<int> labels;
  auto x = grid_points(n, classes, grid_dim, noise, seed, 3, labels);
  return Dataset("grid_patterns_" + split_suffix(split), split, grid_dim * grid_dim, classes,
                 std::move(x), std::move(labels));
}

DatasetPair make_two_moons(std::size_t n_train, std::size_t n_test, double noise,
                           std::uint64_t seed) {
  std::vector<int> ytr;
  std::vector<int> yte;
  auto xtr = two_moons_raw(n_train, noise, seed, &ytr);
  auto xte = two_moons_raw(n_test, noise, mix64(seed ^ 0x7e57ULL), &yte);
  const Moments m = column_moments(xtr, 2);
  standardize(xtr, 2, m);
  standardize(xte, 2, m);
  return {Dataset("two_moons_train", Split::train, 2, 2, std::move(xtr), std::move(ytr)),
          Dataset("two_moons_test", Split::test, 2, 2, std::move(xte), std::move(yte))};
}

DatasetPair make_blobs(std::size_t n_train, std::size_t n_test, int classes,
                       std::uint64_t centers_seed, double spread, std::uint64_t seed,
                       std::size_t dim) {
  return {gen_blobs(n_train, classes, centers_seed, spread, seed, dim, Split::train),
          gen_blobs(n_test, classes, centers_seed, spread, mix64(seed ^ 0x7e57ULL), dim,
                    Split::test)};
}

DatasetPair make_grid_patterns(std::size_t n_train, std::size_t n_test, int classes,
                               std::size_t grid_dim, double noise, std::uint64_t seed) {
  require(classes >= 2 && classes <= grid_template_count(), "unsupported grid class count");
  std::vector<int> ytr;
  std::vector<int> yte;
  auto xtr = grid_points(n_train, classes, grid_dim, noise, seed, 3, ytr);
  auto xte = grid_points(n_test, classes, grid_dim, noise, seed, 4, yte);
  const std::size_t dim = grid_dim * grid_dim;
  return {Dataset("grid_patterns_train", Split::train, dim, classes, std::move(xtr), std::move(ytr)),
          Dataset("grid_patterns_test", Split::test, dim, classes, std::move(xte), std::move(yte))};
}

int oracle_label(const Dataset& ds, std::size_t idx) {
  if (idx >= ds.size()) {
    throw ContractError("oracle query for index " + std::to_string(idx) + " outside dataset of size " +
                        std::to_string(ds.size()));
  }
  return ds.true_labels()[idx];
}

}  // namespace alforge::data
