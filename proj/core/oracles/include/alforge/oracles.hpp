#pragma once

// Independent reference computations used to cross-check the library:
// a from-scratch forward pass, finite-difference gradients, two-pass variance,
// exhaustive subset search, brute-force k-center, random discrete instances
// for the risk bracket and a cyclic Jacobi eigensolver. Nothing here calls the
// code paths it checks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alforge/coldstart.hpp"
#include "alforge/nn.hpp"
#include "alforge/rng.hpp"

namespace alforge::oracle {

/// softmax(W2 act(W1 x + b1) + b2) via log-sum-exp, written independently.
std::vector<double> reference_probs(const nn::ModelParams& p, std::span<const double> x);
std::vector<double> reference_hidden(const nn::ModelParams& p, std::span<const double> x);

struct GradCase {
  nn::ModelParams params;
  std::vector<std::vector<double>> lx;
  std::vector<int> ly;
  std::vector<std::vector<double>> ux;
  std::vector<std::vector<std::vector<double>>> uaugs;
  nn::LossSpec spec;

  nlohmann::json to_json() const;
};

/// Random configuration: dims, activation, distance, weight, batches. ReLU
/// cases are resampled until no pre-activation lies within 1e-3 of the kink.
GradCase random_grad_case(Rng& rng);

/// Composite loss with the clean-branch targets frozen at `targets_from`.
double reference_total_loss(const nn::ModelParams& params, const nn::ModelParams& targets_from,
                            const GradCase& c);

/// Central differences, step `eps`, over every parameter coordinate.
std::vector<double> finite_difference_grad(const GradCase& c, double eps = 1e-5);

/// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-6);

/// Sum over classes of the population variance, textbook two-pass form.
double two_pass_inconsistency(const std::vector<std::vector<double>>& probs);

/// Index set (dataset indices) of the size-k subset maximizing the score sum.
/// Among equal sums the lexicographically smallest sorted set is returned.
std::vector<std::size_t> brute_force_topk(std::span<const std::size_t> indices,
                                          std::span<const double> scores, std::size_t k);

/// max over `points` of the distance to the nearest of `centers`.
double covering_radius(std::span<const double> emb, std::size_t dim,
                       std::span<const std::size_t> centers, std::span<const std::size_t> points);

/// Optimal covering radius of candidates by anchors + k candidates (exhaustive).
double brute_force_kcenter_radius(std::span<const double> emb, std::size_t dim,
                                  std::span<const std::size_t> anchors,
                                  std::span<const std::size_t> candidates, std::size_t k);

struct Prop1Instance {
  coldstart::DiscreteTable joint;
  coldstart::DiscreteTable classifier;
};

/// Random strictly positive joint and classifier tables, supports in [2, max_support].
Prop1Instance random_prop1_instance(Rng& rng, std::size_t max_support = 8);

/// Eigenvalues of a symmetric matrix, descending (cyclic Jacobi rotations).
std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n);

struct CheckResult {
  std::string name;
  std::size_t instances = 0;
  double max_error = 0.0;
  bool passed = true;
  nlohmann::json failing_instance;  // null when passed
};

struct SuiteOptions {
  std::uint64_t seed = 0;
  bool corrupt_gradient = false;  // negative control: perturbs one analytic coordinate
  std::size_t grad_instances = 100;
  std::size_t variance_instances = 1000;
  std::size_t topk_instances = 200;
  std::size_t prop1_instances = 100;
  std::size_t kcenter_instances = 100;
};

CheckResult check_gradients(const SuiteOptions& opt);
CheckResult check_inconsistency(const SuiteOptions& opt);
CheckResult check_topk(const SuiteOptions& opt);
CheckResult check_prop1(const SuiteOptions& opt);
CheckResult check_kcenter(const SuiteOptions& opt);

std::vector<CheckResult> run_suite(const SuiteOptions& opt);

}  // namespace alforge::oracle
