#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace alforge::data {

enum class Split { train, test };

/// Dense feature matrix with hidden ground-truth labels. Immutable once built.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, Split split, std::size_t input_dim, int classes,
          std::vector<double> features, std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t input_dim() const { return input_dim_; }
  int classes() const { return classes_; }
  Split split() const { return split_; }
  const std::string& name() const { return name_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * input_dim_, input_dim_};
  }
  std::span<const double> features() const { return features_; }

  /// Ground truth. Only the oracle, evaluation and analysis code read this.
  std::span<const int> true_labels() const { return labels_; }

  /// Content hash of features, labels and shape (FNV-1a over the raw bytes).
  std::uint64_t fingerprint() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::string name_;
  Split split_ = Split::train;
  std::size_t input_dim_ = 0;
  int classes_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

/// Train and test sets drawn from one generator call. Both are standardized
/// with the train split's statistics where the generator standardizes.
struct DatasetPair {
  Dataset train;
  Dataset test;
};

/// Two interleaving half-circles, n/2 points each, plus N(0, noise^2) noise,
/// standardized to zero mean / unit variance per feature. Labels alternate
/// 0,1,0,1,... so any prefix is balanced.
Dataset gen_two_moons(std::size_t n, double noise_sigma, std::uint64_t seed,
                      Split split = Split::train);

/// Unstandardized moon geometry; exposed for tests of the raw arcs.
std::vector<double> two_moons_raw(std::size_t n, double noise_sigma, std::uint64_t seed,
                                  std::vector<int>* labels);

/// J isotropic Gaussian clusters. Centers are uniform in [-5, 5]^dim drawn
/// from `centers_seed`; labels cycle 0..J-1 so class counts differ by <= 1.
Dataset gen_blobs(std::size_t n, int classes, std::uint64_t centers_seed, double spread,
                  std::uint64_t seed, std::size_t dim = 2, Split split = Split::train);

/// Number of built-in grid templates available to gen_grid_patterns.
int grid_template_count();

/// Binary class template on a grid_dim x grid_dim grid, row-major.
std::vector<double> grid_template(int cls, std::size_t grid_dim);

/// Class templates plus i.i.d. N(0, noise^2) pixel noise.
Dataset gen_grid_patterns(std::size_t n, int classes, std::size_t grid_dim, double noise,
                          std::uint64_t seed, Split split = Split::train);

/// Disjoint train/test draws: the test set uses an independent sample stream.
DatasetPair make_two_moons(std::size_t n_train, std::size_t n_test, double noise,
                           std::uint64_t seed);
DatasetPair make_blobs(std::size_t n_train, std::size_t n_test, int classes,
                       std::uint64_t centers_seed, double spread, std::uint64_t seed,
                       std::size_t dim = 2);
DatasetPair make_grid_patterns(std::size_t n_train, std::size_t n_test, int classes,
                               std::size_t grid_dim, double noise, std::uint64_t seed);

/// The labeling oracle: reveals the ground-truth label of sample `idx`.
int oracle_label(const Dataset& ds, std::size_t idx);

}  // namespace alforge::data
