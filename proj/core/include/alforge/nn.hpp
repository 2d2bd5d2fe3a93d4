#pragma once

// Two-layer perceptron classifier with hand-derived gradients, the supervised
// cross-entropy term and the augmentation-consistency term.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alforge::nn {

using Vector = std::vector<double>;

/// Floor applied to probabilities before any logarithm.
inline constexpr double kProbFloor = 1e-12;

enum class Activation : std::uint32_t { relu = 0, tanh = 1 };
enum class Distance { squared_l2, kl_divergence };

std::string_view to_string(Activation a);
std::string_view to_string(Distance d);
Activation parse_activation(std::string_view s);
Distance parse_distance(std::string_view s);

struct Shape {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t classes = 0;

  std::size_t w1_size() const { return hidden_dim * input_dim; }
  std::size_t w2_size() const { return classes * hidden_dim; }
  std::size_t parameter_count() const {
    return w1_size() + hidden_dim + w2_size() + classes;
  }
  bool operator==(const Shape&) const = default;
};

/// All weights of the classifier in one contiguous buffer, laid out as
/// W1 (hidden x input, row-major), b1, W2 (classes x hidden, row-major), b2.
/// The same type doubles as the gradient container.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(Shape shape, Activation activation);

  const Shape& shape() const { return shape_; }
  Activation activation() const { return activation_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::span<double> w1() { return block(0, shape_.w1_size()); }
  std::span<double> b1() { return block(b1_offset(), shape_.hidden_dim); }
  std::span<double> w2() { return block(w2_offset(), shape_.w2_size()); }
  std::span<double> b2() { return block(b2_offset(), shape_.classes); }
  std::span<const double> w1() const { return block(0, shape_.w1_size()); }
  std::span<const double> b1() const { return block(b1_offset(), shape_.hidden_dim); }
  std::span<const double> w2() const { return block(w2_offset(), shape_.w2_size()); }
  std::span<const double> b2() const { return block(b2_offset(), shape_.classes); }

  double& w1(std::size_t h, std::size_t i) { return values_[h * shape_.input_dim + i]; }
  double& w2(std::size_t c, std::size_t h) { return values_[w2_offset() + c * shape_.hidden_dim + h]; }
  double w1(std::size_t h, std::size_t i) const { return values_[h * shape_.input_dim + i]; }
  double w2(std::size_t c, std::size_t h) const { return values_[w2_offset() + c * shape_.hidden_dim + h]; }

  /// Zero-valued parameters of the same shape and activation.
  ModelParams zeros_like() const { return ModelParams(shape_, activation_); }
  bool all_finite() const;

  bool operator==(const ModelParams&) const = default;

 private:
  std::size_t b1_offset() const { return shape_.w1_size(); }
  std::size_t w2_offset() const { return b1_offset() + shape_.hidden_dim; }
  std::size_t b2_offset() const { return w2_offset() + shape_.w2_size(); }
  std::span<double> block(std::size_t off, std::size_t n) { return {values_.data() + off, n}; }
  std::span<const double> block(std::size_t off, std::size_t n) const { return {values_.data() + off, n}; }

  Shape shape_{};
  Activation activation_ = Activation::relu;
  Vector values_;
};

using Gradient = ModelParams;

struct Prediction {
  Vector logits;
  Vector probs;
  Vector hidden;  // post-activation hidden layer; the embedding used by k-center
};

struct LossSpec {
  Distance distance = Distance::squared_l2;
  double unsup_weight = 1.0;  // lambda_u
  int n_train_augs = 1;

  void validate() const;
};

struct LabeledSample {
  std::span<const double> x;
  int label = 0;
};

/// An unlabeled input together with the augmented copies drawn for it.
struct UnlabeledSample {
  std::span<const double> x;
  std::vector<Vector> augs;
};

/// Numerically stable softmax (max-shifted).
Vector softmax(std::span<const double> logits);

Prediction forward(const ModelParams& params, std::span<const double> x);

/// D(p, q) between two probability vectors.
double distance(Distance d, std::span<const double> p, std::span<const double> q);

/// Mean of -log p[label] over the batch. Throws on an empty batch.
double supervised_loss(const ModelParams& params, std::span<const LabeledSample> batch);

/// Mean over augmentations of D(probs(x), probs(x_aug)).
double consistency_loss(const ModelParams& params, std::span<const double> x,
                        std::span<const Vector> x_augs, const LossSpec& spec);

struct LossAndGrad {
  double loss = 0.0;
  double supervised = 0.0;
  double consistency = 0.0;  // mean consistency term before weighting
  Gradient grad;
};

/// supervised_loss + unsup_weight * mean consistency_loss, with its exact
/// gradient. The clean-input prediction inside the consistency term is treated
/// as a constant target; gradient flows through the augmented branch only.
LossAndGrad total_loss_and_grad(const ModelParams& params,
                                std::span<const LabeledSample> labeled,
                                std::span<const UnlabeledSample> unlabeled,
                                const LossSpec& spec);

struct MomentumState {
  Vector velocity;
};

/// v <- momentum * v + g;  params <- params - lr * v.
/// Throws NumericError on a non-finite gradient.
void sgd_step(ModelParams& params, const Gradient& grad, double lr, double momentum,
              MomentumState& state);

/// Weights i.i.d. uniform in [-scale, scale], biases zero.
ModelParams init_params(std::uint64_t seed, Shape shape, double scale,
                        Activation activation = Activation::relu);

}  // namespace alforge::nn
