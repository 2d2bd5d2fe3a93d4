#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "alforge/rng.hpp"

namespace alforge::data {

enum class AugmentKind { gaussian_jitter, shift_flip };

std::string_view to_string(AugmentKind k);
AugmentKind parse_augment_kind(std::string_view s);

struct AugmentationSpec {
  AugmentKind kind = AugmentKind::gaussian_jitter;
  double sigma = 0.3;     // jitter std in feature units
  int max_shift = 1;      // grid cells, shift_flip only
  bool flip = true;       // shift_flip only
  int n_eval_augs = 10;   // N used by the consistency score

  void validate() const;
};

/// One random augmentation of x. For shift_flip, x must be a flattened square
/// grid; the shift is uniform in [-max_shift, max_shift]^2 with zero padding
/// and a fair-coin horizontal flip (when enabled).
std::vector<double> augment(std::span<const double> x, const AugmentationSpec& spec, Rng& rng);

/// Deterministic shift/flip of a flattened grid. Positive dx moves content
/// right, positive dy moves it down.
std::vector<double> shift_flip(std::span<const double> x, int dx, int dy, bool flip);

}  // namespace alforge::data
