#include "alforge/augment.hpp"

#include <cmath>
#include <random>
#include <string>

#include "alforge/error.hpp"

namespace alforge::data {

std::string_view to_string(AugmentKind k) {
  return k == AugmentKind::gaussian_jitter ? "gaussian_jitter" : "shift_flip";
}

AugmentKind parse_augment_kind(std::string_view s) {
  if (s == "gaussian_jitter" || s == "jitter") return AugmentKind::gaussian_jitter;
  if (s == "shift_flip") return AugmentKind::shift_flip;
  throw ContractError("unknown augmentation kind '" + std::string(s) + "'");
}

void AugmentationSpec::validate() const {
  require(sigma >= 0.0 && std::isfinite(sigma), "augmentation sigma must be >= 0");
  require(max_shift >= 0, "augmentation max_shift must be >= 0");
  require(n_eval_augs >= 1, "n_eval_augs must be >= 1");
}

namespace {

std::size_t grid_side(std::size_t len) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(len))));
  if (side * side != len) {
    throw ContractError("shift_flip needs a square grid input; got length " + std::to_string(len));
  }
  return side;
}

}  // namespace

std::vector<double> shift_flip(std::span<const double> x, int dx, int dy, bool flip) {
  const auto g = static_cast<int>(grid_side(x.size()));
  std::vector<double> out(x.size(), 0.0);
  for (int r = 0; r < g; ++r) {
    const int sr = r - dy;
    if (sr < 0 || sr >= g) continue;
    for (int c = 0; c < g; ++c) {
      int sc = c - dx;
      if (sc < 0 || sc >= g) continue;
      if (flip) sc = g - 1 - sc;
      out[static_cast<std::size_t>(r * g + c)] = x[static_cast<std::size_t>(sr * g + sc)];
    }
  }
  return out;
}

std::vector<double> augment(std::span<const double> x, const AugmentationSpec& spec, Rng& rng) {
  if (spec.kind == AugmentKind::gaussian_jitter) {
    std::vector<double> out(x.begin(), x.end());
    if (spec.sigma == 0.0) return out;
    std::normal_distribution<double> g(0.0, spec.sigma);
    for (double& v : out) v += g(rng);
    return out;
  }
  grid_side(x.size());
  std::uniform_int_distribution<int> shift(-spec.max_shift, spec.max_shift);
  const int dx = spec.max_shift > 0 ? shift(rng) : 0;
  const int dy = spec.max_shift > 0 ? shift(rng) : 0;
  const bool flip = spec.flip && std::bernoulli_distribution(0.5)(rng);
  return shift_flip(x, dx, dy, flip);
}

}  // namespace alforge::data
