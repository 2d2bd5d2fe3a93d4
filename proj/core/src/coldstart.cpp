#include "alforge/coldstart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "alforge/al_loop.hpp"
#include "alforge/error.hpp"

namespace alforge::coldstart {

double al_target_loss(const nn::ModelParams& params, const data::Dataset& ds) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto p = nn::forward(params, ds.row(i)).probs;
    acc -= std::log(std::max(p[static_cast<std::size_t>(ds.true_labels()[i])], nn::kProbFloor));
  }
  return acc / static_cast<double>(ds.size());
}

Distribution pred_marginal(const nn::ModelParams& params, const data::Dataset& ds) {
  Distribution m(params.shape().classes, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto p = nn::forward(params, ds.row(i)).probs;
    for (std::size_t l = 0; l < m.size(); ++l) m[l] += p[l];
  }
  for (double& v : m) v /= static_cast<double>(ds.size());
  return m;
}

double measure_cross_entropy(std::span<const double> prior, std::span<const double> marginal) {
  require(prior.size() == marginal.size(), "prior and marginal differ in length");
  double h = 0.0;
  for (std::size_t l = 0; l < prior.size(); ++l) {
    if (prior[l] == 0.0) continue;
    h -= prior[l] * std::log(std::max(marginal[l], nn::kProbFloor));
  }
  return h;
}

Distribution uniform_prior(int classes) {
  require(classes >= 1, "prior needs at least one class");
  return Distribution(static_cast<std::size_t>(classes), 1.0 / classes);
}

Distribution prior_from_labels(const data::PoolState& pool, int classes) {
  require(!pool.labeled.empty(), "cannot estimate a prior from an empty labeled set");
  Distribution p(static_cast<std::size_t>(classes), 0.0);
  for (const auto& [_, y] : pool.labeled) p[static_cast<std::size_t>(y)] += 1.0;
  for (double& v : p) v /= static_cast<double>(pool.labeled.size());
  return p;
}

BoundCheck verify_prop1(const DiscreteTable& joint, const DiscreteTable& classifier) {
  require(joint.rows == classifier.rows && joint.cols == classifier.cols,
          "joint and classifier tables differ in shape");
  require(joint.rows >= 1 && joint.cols >= 1 && joint.rows <= 32 && joint.cols <= 32,
          "supports must have between 1 and 32 states");
  require(joint.values.size() == joint.rows * joint.cols &&
              classifier.values.size() == classifier.rows * classifier.cols,
          "table storage does not match its shape");
  const std::size_t nx = joint.rows;
  const std::size_t ny = joint.cols;

  std::vector<double> px(nx, 0.0);
  std::vector<double> py(ny, 0.0);
  double total = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      require(joint(x, y) >= 0.0, "joint probabilities must be nonnegative");
      px[x] += joint(x, y);
      py[y] += joint(x, y);
      total += joint(x, y);
    }
  }
  require(std::abs(total - 1.0) < 1e-9, "joint distribution must sum to 1");
  for (std::size_t x = 0; x < nx; ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      require(classifier(x, y) >= 0.0, "classifier probabilities must be nonnegative");
      row += classifier(x, y);
    }
    require(std::abs(row - 1.0) < 1e-9, "classifier row " + std::to_string(x) + " must sum to 1");
  }

  // p(Yhat = y) = sum_x p(Yhat = y | x) p(x)
  std::vector<double> pyhat(ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) pyhat[y] += classifier(x, y) * px[x];

  BoundCheck b;
  b.z_hat = 1.0;
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      if (!(pyhat[y] > 0.0)) {
        throw NumericError("p(X | Yhat) undefined at (x=" + std::to_string(x) + ", y=" +
                           std::to_string(y) + "): p(Yhat = " + std::to_string(y) + ") is zero");
      }
      b.z_hat = std::min(b.z_hat, classifier(x, y) * px[x] / pyhat[y]);
    }
  }
  for (double p : px) {
    if (p > 0.0) b.h_px -= p * std::log(p);
  }
  for (std::size_t y = 0; y < ny; ++y) {
    if (py[y] > 0.0) b.cross_entropy -= py[y] * std::log(pyhat[y]);
  }
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      if (joint(x, y) > 0.0) b.risk -= joint(x, y) * std::log(classifier(x, y));
    }
  }
  b.lower = b.cross_entropy - b.h_px;
  b.upper = b.z_hat > 0.0 ? b.lower - std::log(b.z_hat) : std::numeric_limits<double>::infinity();
  return b;
}

StartSizeDecision start_size_rule(std::span<const MeasureRecord> measurements, double epsilon) {
  require(measurements.size() >= 2, "the start-size rule needs at least two measurements");
  require(epsilon >= 0.0, "epsilon must be >= 0");
  for (std::size_t i = 1; i < measurements.size(); ++i) {
    require(measurements[i].labeled_count > measurements[i - 1].labeled_count,
            "measurements must be ordered by strictly increasing labeled count");
  }
  StartSizeDecision d;
  for (std::size_t i = 1; i < measurements.size(); ++i) {
    const double delta = std::abs(measurements[i].measure_h - measurements[i - 1].measure_h);
    d.delta_h.push_back(delta);
    if (!d.converged && delta <= epsilon) {
      d.converged = true;
      d.size = measurements[i].labeled_count;
    }
  }
  if (!d.converged) d.size = measurements.back().labeled_count;
  return d;
}

std::vector<MeasureRecord> sweep_start_sizes(const data::Dataset& ds,
                                             std::span<const std::size_t> sizes,
                                             const al::ALConfig& config,
                                             std::span<const std::uint64_t> seeds) {
  require(!sizes.empty(), "sweep needs at least one size");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    require(sizes[i] >= 1 && sizes[i] <= ds.size(), "sweep size outside [1, n]");
    require(i == 0 || sizes[i] > sizes[i - 1], "sweep sizes must be strictly increasing");
  }
  std::vector<MeasureRecord> out;
  for (std::uint64_t seed : seeds) {
    al::ALConfig c = config;
    c.seed = seed;
    c.warm_start = false;
    const auto order = data::balanced_order(ds, seed);
    for (std::size_t size : sizes) {
      const std::span<const std::size_t> prefix(order.data(), size);
      const auto pool = data::pool_from_labeled(ds, prefix);
      const auto init = al::initial_params(c, ds.input_dim(), ds.classes());
      const auto model = al::train_cycle(init, pool, ds, c, 0);
      MeasureRecord r;
      r.labeled_count = size;
      r.seed = seed;
      r.assumed_prior = c.prior == al::PriorKind::uniform ? uniform_prior(ds.classes())
                                                          : prior_from_labels(pool, ds.classes());
      r.measure_h = measure_cross_entropy(r.assumed_prior, pred_marginal(model, ds));
      r.target_loss = al_target_loss(model, ds);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<MeasureRecord> mean_by_size(std::span<const MeasureRecord> records) {
  std::map<std::size_t, std::vector<const MeasureRecord*>> groups;
  for (const auto& r : records) groups[r.labeled_count].push_back(&r);
  std::vector<MeasureRecord> out;
  for (const auto& [size, recs] : groups) {
    MeasureRecord m;
    m.labeled_count = size;
    m.assumed_prior = recs.front()->assumed_prior;
    for (const auto* r : recs) {
      m.measure_h += r->measure_h;
      m.target_loss += r->target_loss;
    }
    m.measure_h /= static_cast<double>(recs.size());
    m.target_loss /= static_cast<double>(recs.size());
    out.push_back(std::move(m));
  }
  return out;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() >= 2, "pearson needs two equal-length series of >= 2 points");
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace alforge::coldstart
