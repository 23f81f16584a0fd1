#pragma once

#include <array>

#include "mmrisk/rng.hpp"
#include "mmrisk/tensor.hpp"
#include "mmrisk/tokenizer.hpp"

namespace mmrisk {

// Risk head: a two-layer MLP into six interval scores clamped
// non-negative, followed by the additive-hazard transform
//   y_j = sigmoid(L_0 + sum_{k<=j} L_k),
// which is non-decreasing across horizons by construction.
struct HeadParams {
  Mlp z;  // d -> d -> 6, before the final non-negativity clamp

  static HeadParams init(int d, Rng& rng);
};

struct HazardOutput {
  std::array<double, 6> interval_scores{};  // L_j >= 0
  std::array<double, 6> cumulative{};       // non-decreasing, in (0,1)
};

// Differentiable path -------------------------------------------------

// Six non-negative interval scores from the encoded CLS row (1 x d).
Tensor head_forward(const Tensor& cls_out, const HeadParams& params);

// Cumulative pre-sigmoid logits (1 x 6): running sums of interval scores.
Tensor hazard_logits(const Tensor& interval_scores);

// Plain-value path -----------------------------------------------------

// The additive-hazard transform on raw scores; rejects negative inputs.
std::array<double, 6> additive_hazard(const std::array<double, 6>& interval_scores);

// Censoring-masked BCE on cumulative probabilities:
//   -sum_j mask_j [y_j log p_j + (1-y_j) log(1-p_j)] / sum_j mask_j.
// Inputs must lie in (0,1); an all-zero mask is a fully censored example
// and is rejected.
double masked_bce(const std::array<double, 6>& cumulative, const std::array<int, 6>& targets,
                  const std::array<int, 6>& mask);

}  // namespace mmrisk
