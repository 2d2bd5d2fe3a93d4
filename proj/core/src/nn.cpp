#include "alforge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "alforge/error.hpp"
#include "alforge/rng.hpp"

namespace alforge::nn {

std::string_view to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

std::string_view to_string(Distance d) {
  return d == Distance::squared_l2 ? "squared_l2" : "kl_divergence";
}

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ContractError("unknown activation '" + std::string(s) + "'");
}

Distance parse_distance(std::string_view s) {
  if (s == "squared_l2" || s == "l2") return Distance::squared_l2;
  if (s == "kl_divergence" || s == "kl") return Distance::kl_divergence;
  throw ContractError("unknown distance '" + std::string(s) + "'");
}

ModelParams::ModelParams(Shape shape, Activation activation)
    : shape_(shape), activation_(activation), values_(shape.parameter_count(), 0.0) {}

bool ModelParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void LossSpec::validate() const {
  require(unsup_weight >= 0.0 && std::isfinite(unsup_weight), "unsup_weight must be >= 0");
  require(n_train_augs >= 1, "n_train_augs must be >= 1");
}

namespace {

// Per-sample forward state reused by the backward pass.
struct Trace {
  Vector pre;     // W1 x + b1
  Vector hidden;  // act(pre)
  Vector logits;
  Vector probs;
};

void softmax_into(std::span<const double> logits, Vector& out) {
  out.resize(logits.size());
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - mx);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
}

void check_input(const ModelParams& params, std::span<const double> x) {
  if (x.size() != params.shape().input_dim) {
    throw ContractError("input has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(params.shape().input_dim));
  }
}

void run_forward(const ModelParams& p, std::span<const double> x, Trace& t) {
  const Shape& s = p.shape();
  const auto w1 = p.w1();
  const auto b1 = p.b1();
  const auto w2 = p.w2();
  const auto b2 = p.b2();
  t.pre.resize(s.hidden_dim);
  t.hidden.resize(s.hidden_dim);
  for (std::size_t h = 0; h < s.hidden_dim; ++h) {
    const double* row = w1.data() + h * s.input_dim;
    double z = b1[h];
    for (std::size_t i = 0; i < s.input_dim; ++i) z += row[i] * x[i];
    t.pre[h] = z;
    t.hidden[h] = p.activation() == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
  }
  t.logits.resize(s.classes);
  for (std::size_t c = 0; c < s.classes; ++c) {
    const double* row = w2.data() + c * s.hidden_dim;
    double z = b2[c];
    for (std::size_t h = 0; h < s.hidden_dim; ++h) z += row[h] * t.hidden[h];
    t.logits[c] = z;
  }
  softmax_into(t.logits, t.probs);
}

// Accumulates scale * dL/dparams given dL/dlogits for one sample.
void run_backward(const ModelParams& p, std::span<const double> x, const Trace& t,
                  std::span<const double> dlogits, double scale, Gradient& g, Vector& dhidden) {
  const Shape& s = p.shape();
  const auto w2 = p.w2();
  auto gw1 = g.w1();
  auto gb1 = g.b1();
  auto gw2 = g.w2();
  auto gb2 = g.b2();
  dhidden.assign(s.hidden_dim, 0.0);
  for (std::size_t c = 0; c < s.classes; ++c) {
    const double d = scale * dlogits[c];
    if (d == 0.0) continue;
    gb2[c] += d;
    double* grow = gw2.data() + c * s.hidden_dim;
    const double* wrow = w2.data() + c * s.hidden_dim;
    for (std::size_t h = 0; h < s.hidden_dim; ++h) {
      grow[h] += d * t.hidden[h];
      dhidden[h] += d * wrow[h];
    }
  }
  for (std::size_t h = 0; h < s.hidden_dim; ++h) {
    double d = dhidden[h];
    if (p.activation() == Activation::relu) {
      d = t.pre[h] > 0.0 ? d : 0.0;
    } else {
      d *= 1.0 - t.hidden[h] * t.hidden[h];
    }
    if (d == 0.0) continue;
    gb1[h] += d;
    double* grow = gw1.data() + h * s.input_dim;
    for (std::size_t i = 0; i < s.input_dim; ++i) grow[i] += d * x[i];
  }
}

void check_label(const ModelParams& p, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= p.shape().classes) {
    throw ContractError("label " + std::to_string(label) + " outside [0, " +
                        std::to_string(p.shape().classes) + ")");
  }
}

// dD(p, q)/dlogits(q) with p held fixed; q = softmax(logits).
void distance_logit_grad(Distance d, std::span<const double> p, std::span<const double> q,
                         Vector& out) {
  const std::size_t n = q.size();
  out.resize(n);
  // dD/dq first.
  Vector& dq = out;
  for (std::size_t k = 0; k < n; ++k) {
    if (d == Distance::squared_l2) {
      dq[k] = 2.0 * (q[k] - p[k]);
    } else {
      dq[k] = q[k] > kProbFloor ? -p[k] / q[k] : 0.0;
    }
  }
  // Softmax Jacobian: dz_k = q_k (dq_k - sum_l dq_l q_l).
  double dot = 0.0;
  for (std::size_t k = 0; k < n; ++k) dot += dq[k] * q[k];
  for (std::size_t k = 0; k < n; ++k) out[k] = q[k] * (dq[k] - dot);
}

}  // namespace

Vector softmax(std::span<const double> logits) {
  require(!logits.empty(), "softmax of an empty vector");
  Vector out;
  softmax_into(logits, out);
  return out;
}

Prediction forward(const ModelParams& params, std::span<const double> x) {
  check_input(params, x);
  Trace t;
  run_forward(params, x, t);
  return Prediction{std::move(t.logits), std::move(t.probs), std::move(t.hidden)};
}

double distance(Distance d, std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), "distance between vectors of different length");
  double acc = 0.0;
  if (d == Distance::squared_l2) {
    for (std::size_t k = 0; k < p.size(); ++k) acc += (p[k] - q[k]) * (p[k] - q[k]);
  } else {
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] <= 0.0) continue;
      acc += p[k] * (std::log(std::max(p[k], kProbFloor)) - std::log(std::max(q[k], kProbFloor)));
    }
    acc = std::max(acc, 0.0);
  }
  return acc;
}

double supervised_loss(const ModelParams& params, std::span<const LabeledSample> batch) {
  require(!batch.empty(), "supervised_loss of an empty batch");
  Trace t;
  double acc = 0.0;
  for (const auto& s : batch) {
    check_input(params, s.x);
    check_label(params, s.label);
    run_forward(params, s.x, t);
    acc -= std::log(std::max(t.probs[static_cast<std::size_t>(s.label)], kProbFloor));
  }
  return acc / static_cast<double>(batch.size());
}

double consistency_loss(const ModelParams& params, std::span<const double> x,
                        std::span<const Vector> x_augs, const LossSpec& spec) {
  require(!x_augs.empty(), "consistency_loss needs at least one augmentation");
  check_input(params, x);
  Trace clean;
  Trace aug;
  run_forward(params, x, clean);
  double acc = 0.0;
  for (const auto& xa : x_augs) {
    check_input(params, xa);
    run_forward(params, xa, aug);
    acc += distance(spec.distance, clean.probs, aug.probs);
  }
  return acc / static_cast<double>(x_augs.size());
}

LossAndGrad total_loss_and_grad(const ModelParams& params,
                                std::span<const LabeledSample> labeled,
                                std::span<const UnlabeledSample> unlabeled,
                                const LossSpec& spec) {
  require(!labeled.empty(), "total_loss_and_grad needs a nonempty labeled batch");
  spec.validate();
  LossAndGrad out;
  out.grad = params.zeros_like();
  Trace t;
  Vector dlogits;
  Vector dhidden;

  const double inv_l = 1.0 / static_cast<double>(labeled.size());
  for (const auto& s : labeled) {
    check_input(params, s.x);
    check_label(params, s.label);
    run_forward(params, s.x, t);
    const auto y = static_cast<std::size_t>(s.label);
    out.supervised -= std::log(std::max(t.probs[y], kProbFloor));
    dlogits = t.probs;
    if (t.probs[y] > kProbFloor) {
      dlogits[y] -= 1.0;
    } else {
      std::fill(dlogits.begin(), dlogits.end(), 0.0);
    }
    run_backward(params, s.x, t, dlogits, inv_l, out.grad, dhidden);
  }
  out.supervised *= inv_l;

  if (spec.unsup_weight > 0.0 && !unlabeled.empty()) {
    Trace clean;
    const double inv_u = 1.0 / static_cast<double>(unlabeled.size());
    for (const auto& u : unlabeled) {
      require(!u.augs.empty(), "unlabeled sample without augmentations");
      check_input(params, u.x);
      run_forward(params, u.x, clean);
      const double inv_a = 1.0 / static_cast<double>(u.augs.size());
      const double scale = spec.unsup_weight * inv_u * inv_a;
      double per_sample = 0.0;
      for (const auto& xa : u.augs) {
        check_input(params, xa);
        run_forward(params, xa, t);
        per_sample += distance(spec.distance, clean.probs, t.probs);
        distance_logit_grad(spec.distance, clean.probs, t.probs, dlogits);
        run_backward(params, xa, t, dlogits, scale, out.grad, dhidden);
      }
      out.consistency += per_sample * inv_a;
    }
    out.consistency *= inv_u;
  }
  out.loss = out.supervised + spec.unsup_weight * out.consistency;
  return out;
}

void sgd_step(ModelParams& params, const Gradient& grad, double lr, double momentum,
              MomentumState& state) {
  require(lr > 0.0, "learning rate must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  require(grad.shape() == params.shape(), "gradient shape does not match parameters");
  if (!grad.all_finite()) throw NumericError("non-finite gradient; training diverged");
  auto p = params.values();
  auto g = grad.values();
  if (state.velocity.size() != p.size()) state.velocity.assign(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    state.velocity[i] = momentum * state.velocity[i] + g[i];
    p[i] -= lr * state.velocity[i];
  }
}

ModelParams init_params(std::uint64_t seed, Shape shape, double scale, Activation activation) {
  require(shape.input_dim > 0 && shape.hidden_dim > 0 && shape.classes > 0,
          "model dimensions must be positive");
  require(scale >= 0.0, "init scale must be >= 0");
  ModelParams p(shape, activation);
  if (scale == 0.0) return p;
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& w : p.w1()) w = u(rng);
  for (double& w : p.w2()) w = u(rng);
  return p;
}

}  // namespace alforge::nn
