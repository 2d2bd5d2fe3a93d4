#include "alforge/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "alforge/augment.hpp"
#include "alforge/dataset.hpp"
#include "alforge/selection.hpp"

namespace alforge::oracle {

std::vector<double> reference_hidden(const nn::ModelParams& p, std::span<const double> x) {
  const auto& s = p.shape();
  std::vector<double> h(s.hidden_dim);
  for (std::size_t j = 0; j < s.hidden_dim; ++j) {
    double z = p.b1()[j];
    for (std::size_t i = 0; i < s.input_dim; ++i) z += p.w1(j, i) * x[i];
    h[j] = p.activation() == nn::Activation::relu ? std::max(z, 0.0) : std::tanh(z);
  }
  return h;
}

std::vector<double> reference_probs(const nn::ModelParams& p, std::span<const double> x) {
  const auto& s = p.shape();
  const auto h = reference_hidden(p, x);
  std::vector<double> z(s.classes);
  for (std::size_t c = 0; c < s.classes; ++c) {
    z[c] = p.b2()[c];
    for (std::size_t j = 0; j < s.hidden_dim; ++j) z[c] += p.w2(c, j) * h[j];
  }
  const double m = *std::max_element(z.begin(), z.end());
  double lse = 0.0;
  for (double v : z) lse += std::exp(v - m);
  lse = m + std::log(lse);
  for (double& v : z) v = std::exp(v - lse);
  return z;
}

nlohmann::json GradCase::to_json() const {
  nlohmann::json j;
  j["shape"] = {params.shape().input_dim, params.shape().hidden_dim, params.shape().classes};
  j["activation"] = std::string(nn::to_string(params.activation()));
  j["params"] = std::vector<double>(params.values().begin(), params.values().end());
  j["labeled_x"] = lx;
  j["labeled_y"] = ly;
  j["unlabeled_x"] = ux;
  j["unlabeled_augs"] = uaugs;
  j["distance"] = std::string(nn::to_string(spec.distance));
  j["unsup_weight"] = spec.unsup_weight;
  return j;
}

namespace {

std::vector<double> normal_vec(Rng& rng, std::size_t n, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

bool near_kink(const nn::ModelParams& p, std::span<const double> x) {
  const auto& s = p.shape();
  for (std::size_t j = 0; j < s.hidden_dim; ++j) {
    double z = p.b1()[j];
    for (std::size_t i = 0; i < s.input_dim; ++i) z += p.w1(j, i) * x[i];
    if (std::abs(z) < 1e-3) return true;
  }
  return false;
}

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) acc += p[k] * std::log(std::max(p[k], 1e-12) / std::max(q[k], 1e-12));
  }
  return acc;
}

double sq_l2(const std::vector<double>& p, const std::vector<double>& q) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) acc += (p[k] - q[k]) * (p[k] - q[k]);
  return acc;
}

}  // namespace

GradCase random_grad_case(Rng& rng) {
  std::uniform_int_distribution<std::size_t> in_d(1, 5);
  std::uniform_int_distribution<std::size_t> hid_d(1, 8);
  std::uniform_int_distribution<std::size_t> cls_d(2, 5);
  std::uniform_int_distribution<std::size_t> lab_d(1, 4);
  std::uniform_int_distribution<std::size_t> unl_d(0, 3);
  std::uniform_int_distribution<std::size_t> aug_d(1, 3);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  std::uniform_real_distribution<double> lam(0.0, 2.0);
  std::bernoulli_distribution coin(0.5);

  for (;;) {
    GradCase c;
    const nn::Shape shape{in_d(rng), hid_d(rng), cls_d(rng)};
    c.params = nn::ModelParams(shape, coin(rng) ? nn::Activation::relu : nn::Activation::tanh);
    for (double& v : c.params.values()) v = w(rng);
    c.spec.distance = coin(rng) ? nn::Distance::squared_l2 : nn::Distance::kl_divergence;
    c.spec.unsup_weight = coin(rng) ? lam(rng) : (coin(rng) ? 1.0 : 0.0);
    std::uniform_int_distribution<int> label(0, static_cast<int>(shape.classes) - 1);
    const std::size_t nl = lab_d(rng);
    for (std::size_t i = 0; i < nl; ++i) {
      c.lx.push_back(normal_vec(rng, shape.input_dim));
      c.ly.push_back(label(rng));
    }
    const std::size_t nu = unl_d(rng);
    for (std::size_t i = 0; i < nu; ++i) {
      auto x = normal_vec(rng, shape.input_dim);
      std::vector<std::vector<double>> augs;
      const std::size_t na = aug_d(rng);
      for (std::size_t a = 0; a < na; ++a) {
        auto xa = x;
        const auto noise = normal_vec(rng, shape.input_dim, 0.5);
        for (std::size_t d = 0; d < xa.size(); ++d) xa[d] += noise[d];
        augs.push_back(std::move(xa));
      }
      c.ux.push_back(std::move(x));
      c.uaugs.push_back(std::move(augs));
    }
    c.spec.n_train_augs = 1;
    if (c.params.activation() == nn::Activation::relu) {
      bool bad = false;
      for (const auto& x : c.lx) bad = bad || near_kink(c.params, x);
      for (const auto& augs : c.uaugs)
        for (const auto& x : augs) bad = bad || near_kink(c.params, x);
      if (bad) continue;
    }
    return c;
  }
}

double reference_total_loss(const nn::ModelParams& params, const nn::ModelParams& targets_from,
                            const GradCase& c) {
  double sup = 0.0;
  for (std::size_t i = 0; i < c.lx.size(); ++i) {
    const auto p = reference_probs(params, c.lx[i]);
    sup += -std::log(std::max(p[static_cast<std::size_t>(c.ly[i])], 1e-12));
  }
  sup /= static_cast<double>(c.lx.size());
  double unsup = 0.0;
  for (std::size_t i = 0; i < c.ux.size(); ++i) {
    const auto target = reference_probs(targets_from, c.ux[i]);
    double per = 0.0;
    for (const auto& xa : c.uaugs[i]) {
      const auto q = reference_probs(params, xa);
      per += c.spec.distance == nn::Distance::squared_l2 ? sq_l2(target, q) : kl(target, q);
    }
    unsup += per / static_cast<double>(c.uaugs[i].size());
  }
  if (!c.ux.empty()) unsup /= static_cast<double>(c.ux.size());
  return sup + c.spec.unsup_weight * unsup;
}

std::vector<double> finite_difference_grad(const GradCase& c, double eps) {
  std::vector<double> g(c.params.values().size());
  nn::ModelParams work = c.params;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double orig = work.values()[i];
    work.values()[i] = orig + eps;
    const double up = reference_total_loss(work, c.params, c);
    work.values()[i] = orig - eps;
    const double down = reference_total_loss(work, c.params, c);
    work.values()[i] = orig;
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

double two_pass_inconsistency(const std::vector<std::vector<double>>& probs) {
  const std::size_t j = probs.front().size();
  const double n = static_cast<double>(probs.size());
  double total = 0.0;
  for (std::size_t l = 0; l < j; ++l) {
    double mean = 0.0;
    for (const auto& p : probs) mean += p[l];
    mean /= n;
    double ss = 0.0;
    for (const auto& p : probs) ss += (p[l] - mean) * (p[l] - mean);
    total += ss / n;
  }
  return total;
}

std::vector<std::size_t> brute_force_topk(std::span<const std::size_t> indices,
                                          std::span<const double> scores, std::size_t k) {
  const std::size_t n = indices.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_set;
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    double s = 0.0;
    std::vector<std::size_t> set;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1U << i)) {
        s += scores[i];
        set.push_back(indices[i]);
      }
    }
    std::sort(set.begin(), set.end());
    // Equal totals: the lexicographically smallest index set wins.
    if (s > best || (s == best && set < best_set)) {
      best = s;
      best_set = std::move(set);
    }
  }
  return best_set;
}

double covering_radius(std::span<const double> emb, std::size_t dim,
                       std::span<const std::size_t> centers, std::span<const std::size_t> points) {
  double r = 0.0;
  for (std::size_t p : points) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t c : centers) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) d2 += (emb[p * dim + k] - emb[c * dim + k]) * (emb[p * dim + k] - emb[c * dim + k]);
      nearest = std::min(nearest, std::sqrt(d2));
    }
    r = std::max(r, nearest);
  }
  return r;
}

double brute_force_kcenter_radius(std::span<const double> emb, std::size_t dim,
                                  std::span<const std::size_t> anchors,
                                  std::span<const std::size_t> candidates, std::size_t k) {
  const std::size_t n = candidates.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    std::vector<std::size_t> centers(anchors.begin(), anchors.end());
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1U << i)) centers.push_back(candidates[i]);
    best = std::min(best, covering_radius(emb, dim, centers, candidates));
  }
  return best;
}

Prop1Instance random_prop1_instance(Rng& rng, std::size_t max_support) {
  std::uniform_int_distribution<std::size_t> sup(2, std::max<std::size_t>(2, max_support));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution sparse(0.3);
  const std::size_t nx = sup(rng);
  const std::size_t ny = sup(rng);
  Prop1Instance inst;
  inst.joint = {nx, ny, std::vector<double>(nx * ny)};
  inst.classifier = {nx, ny, std::vector<double>(nx * ny)};
  // Joint entries may be zero; the classifier must stay strictly positive.
  double total = 0.0;
  for (double& v : inst.joint.values) {
    v = sparse(rng) ? 0.0 : u(rng);
    total += v;
  }
  if (total == 0.0) {
    inst.joint.values[0] = 1.0;
    total = 1.0;
  }
  for (double& v : inst.joint.values) v /= total;
  // Every row of X must carry mass for Z_hat > 0.
  for (std::size_t x = 0; x < nx; ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < ny; ++y) row += inst.joint.values[x * ny + y];
    if (row == 0.0) inst.joint.values[x * ny] = 1e-3;
  }
  total = std::accumulate(inst.joint.values.begin(), inst.joint.values.end(), 0.0);
  for (double& v : inst.joint.values) v /= total;
  for (std::size_t x = 0; x < nx; ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      inst.classifier.values[x * ny + y] = 0.01 + std::pow(u(rng), 3.0);
      row += inst.classifier.values[x * ny + y];
    }
    for (std::size_t y = 0; y < ny; ++y) inst.classifier.values[x * ny + y] /= row;
  }
  return inst;
}

std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

CheckResult check_gradients(const SuiteOptions& opt) {
  CheckResult r{"gradient_vs_finite_difference", opt.grad_instances, 0.0, true, nullptr};
  Rng rng(derive_seed(opt.seed, 101));
  for (std::size_t n = 0; n < opt.grad_instances; ++n) {
    const GradCase c = random_grad_case(rng);
    std::vector<nn::LabeledSample> lab;
    for (std::size_t i = 0; i < c.lx.size(); ++i) lab.push_back({c.lx[i], c.ly[i]});
    std::vector<nn::UnlabeledSample> unl;
    for (std::size_t i = 0; i < c.ux.size(); ++i) unl.push_back({c.ux[i], c.uaugs[i]});
    auto analytic = nn::total_loss_and_grad(c.params, lab, unl, c.spec).grad;
    if (opt.corrupt_gradient && n == 0) analytic.values()[0] += 1e-2;
    const auto numeric = finite_difference_grad(c);
    double worst = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      worst = std::max(worst, relative_error(analytic.values()[i], numeric[i]));
    }
    r.max_error = std::max(r.max_error, worst);
    if (worst >= 1e-4 && r.passed) {
      r.passed = false;
      r.failing_instance = c.to_json();
      r.failing_instance["instance"] = n;
      r.failing_instance["relative_error"] = worst;
    }
  }
  return r;
}

CheckResult check_inconsistency(const SuiteOptions& opt) {
  CheckResult r{"inconsistency_vs_two_pass_variance", opt.variance_instances, 0.0, true, nullptr};
  Rng rng(derive_seed(opt.seed, 102));
  std::uniform_int_distribution<std::size_t> in_d(1, 6);
  std::uniform_int_distribution<std::size_t> hid_d(1, 10);
  std::uniform_int_distribution<std::size_t> cls_d(2, 6);
  std::uniform_int_distribution<int> naug(1, 8);
  std::uniform_real_distribution<double> w(-2.0, 2.0);
  std::uniform_real_distribution<double> sig(0.0, 1.0);
  for (std::size_t n = 0; n < opt.variance_instances; ++n) {
    const nn::Shape shape{in_d(rng), hid_d(rng), cls_d(rng)};
    nn::ModelParams p(shape, n % 2 ? nn::Activation::tanh : nn::Activation::relu);
    for (double& v : p.values()) v = w(rng);
    const std::size_t ns = 3;
    std::vector<double> feats;
    std::vector<int> labels;
    for (std::size_t i = 0; i < ns; ++i) {
      const auto x = normal_vec(rng, shape.input_dim);
      feats.insert(feats.end(), x.begin(), x.end());
      labels.push_back(0);
    }
    const data::Dataset ds("oracle", data::Split::train, shape.input_dim, static_cast<int>(shape.classes),
                           feats, labels);
    data::AugmentationSpec spec;
    spec.sigma = sig(rng);
    spec.n_eval_augs = naug(rng);
    const std::uint64_t seed = rng();
    const std::vector<std::size_t> pool{0, 1, 2};
    const auto table = select::score_consistency(p, ds, pool, spec, seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
      const auto augs = select::scoring_augmentations(ds.row(i), spec, seed, i);
      std::vector<std::vector<double>> probs{reference_probs(p, ds.row(i))};
      for (const auto& a : augs) probs.push_back(reference_probs(p, a));
      worst = std::max(worst, std::abs(table.scores[i] - two_pass_inconsistency(probs)));
    }
    r.max_error = std::max(r.max_error, worst);
    if (worst > 1e-12 && r.passed) {
      r.passed = false;
      r.failing_instance = {{"instance", n}, {"abs_error", worst}, {"seed", seed}, {"sigma", spec.sigma},
                            {"n_eval_augs", spec.n_eval_augs},
                            {"params", std::vector<double>(p.values().begin(), p.values().end())}};
    }
  }
  return r;
}

CheckResult check_topk(const SuiteOptions& opt) {
  CheckResult r{"topk_vs_subset_enumeration", opt.topk_instances, 0.0, true, nullptr};
  Rng rng(derive_seed(opt.seed, 103));
  std::uniform_int_distribution<std::size_t> n_d(1, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 0; n < opt.topk_instances; ++n) {
    const std::size_t size = n_d(rng);
    std::uniform_int_distribution<std::size_t> k_d(1, std::min<std::size_t>(4, size));
    const std::size_t k = k_d(rng);
    select::ScoreTable t;
    t.strategy = select::Strategy::consistency;
    std::vector<std::size_t> ids(40);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::shuffle(ids.begin(), ids.end(), rng);
    t.indices.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(size));
    for (std::size_t i = 0; i < size; ++i) t.scores.push_back(u(rng));
    auto got = select::select_topk(t, k);
    std::sort(got.begin(), got.end());
    const auto want = brute_force_topk(t.indices, t.scores, k);
    double sum_got = 0.0;
    double sum_want = 0.0;
    for (std::size_t idx : got) sum_got += t.score_of(idx);
    for (std::size_t idx : want) sum_want += t.score_of(idx);
    const double err = std::abs(sum_got - sum_want);
    r.max_error = std::max(r.max_error, err);
    if ((got != want || err > 1e-12) && r.passed) {
      r.passed = false;
      r.failing_instance = {{"instance", n}, {"indices", t.indices}, {"scores", t.scores}, {"k", k},
                            {"got", got}, {"want", want}};
    }
  }
  return r;
}

CheckResult check_prop1(const SuiteOptions& opt) {
  CheckResult r{"risk_bracket_enumeration", opt.prop1_instances, 0.0, true, nullptr};
  Rng rng(derive_seed(opt.seed, 104));
  for (std::size_t n = 0; n < opt.prop1_instances; ++n) {
    const auto inst = random_prop1_instance(rng, 8);
    const auto b = coldstart::verify_prop1(inst.joint, inst.classifier);
    const double violation = std::max({0.0, b.lower - b.risk, b.risk - b.upper});
    r.max_error = std::max(r.max_error, violation);
    if (violation > 1e-12 && r.passed) {
      r.passed = false;
      r.failing_instance = {{"instance", n},
                            {"rows", inst.joint.rows},
                            {"cols", inst.joint.cols},
                            {"joint", inst.joint.values},
                            {"classifier", inst.classifier.values},
                            {"lower", b.lower},
                            {"risk", b.risk},
                            {"upper", b.upper}};
    }
  }
  return r;
}

CheckResult check_kcenter(const SuiteOptions& opt) {
  CheckResult r{"kcenter_two_approximation", opt.kcenter_instances, 0.0, true, nullptr};
  Rng rng(derive_seed(opt.seed, 105));
  std::uniform_int_distribution<std::size_t> n_d(3, 10);
  std::uniform_int_distribution<std::size_t> dim_d(1, 3);
  for (std::size_t n = 0; n < opt.kcenter_instances; ++n) {
    const std::size_t size = n_d(rng);
    const std::size_t dim = dim_d(rng);
    const auto emb = normal_vec(rng, size * dim);
    std::uniform_int_distribution<std::size_t> a_d(1, std::min<std::size_t>(3, size - 1));
    const std::size_t na = a_d(rng);
    std::vector<std::size_t> ids(size);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::vector<std::size_t> anchors(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(na));
    std::vector<std::size_t> cands(ids.begin() + static_cast<std::ptrdiff_t>(na), ids.end());
    std::uniform_int_distribution<std::size_t> k_d(1, std::min<std::size_t>(3, cands.size()));
    const std::size_t k = k_d(rng);
    const auto picks = select::kcenter_greedy(emb, dim, anchors, cands, k);
    std::vector<std::size_t> centers = anchors;
    centers.insert(centers.end(), picks.begin(), picks.end());
    const double greedy = covering_radius(emb, dim, centers, cands);
    const double best = brute_force_kcenter_radius(emb, dim, anchors, cands, k);
    const double ratio = best > 0.0 ? greedy / best : (greedy > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    r.max_error = std::max(r.max_error, ratio);
    if (greedy > 2.0 * best + 1e-12 && r.passed) {
      r.passed = false;
      r.failing_instance = {{"instance", n}, {"dim", dim}, {"embeddings", emb}, {"anchors", anchors},
                            {"candidates", cands}, {"k", k}, {"greedy_radius", greedy},
                            {"optimal_radius", best}};
    }
  }
  return r;
}

std::vector<CheckResult> run_suite(const SuiteOptions& opt) {
  return {check_gradients(opt), check_inconsistency(opt), check_topk(opt), check_prop1(opt),
          check_kcenter(opt)};
}

}  // namespace alforge::oracle
