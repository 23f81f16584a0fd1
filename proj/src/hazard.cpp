#include "mmrisk/hazard.hpp"

#include <cmath>
#include <stdexcept>

namespace mmrisk {

HeadParams HeadParams::init(int d, Rng& rng) {
  HeadParams p;
  p.z = Mlp::make({d, d, 6}, rng);
  return p;
}

Tensor head_forward(const Tensor& cls_out, const HeadParams& params) {
  return relu(params.z.forward(cls_out));
}

Tensor hazard_logits(const Tensor& interval_scores) {
  return cumsum_last(interval_scores);
}

std::array<double, 6> additive_hazard(const std::array<double, 6>& interval_scores) {
  for (double l : interval_scores) {
    if (!(l >= 0.0)) {
      throw std::invalid_argument("additive_hazard: negative interval score " +
                                  std::to_string(l));
    }
  }
  std::array<double, 6> out{};
  double acc = 0.0;
  for (int j = 0; j < 6; ++j) {
    acc += interval_scores[j];
    out[j] = 1.0 / (1.0 + std::exp(-acc));  // acc >= 0, so this form is stable
  }
  return out;
}

double masked_bce(const std::array<double, 6>& cumulative, const std::array<int, 6>& targets,
                  const std::array<int, 6>& mask) {
  int m_count = 0;
  for (int m : mask) m_count += m != 0;
  if (m_count == 0) throw std::invalid_argument("masked_bce: fully censored example");
  double loss = 0.0;
  for (int j = 0; j < 6; ++j) {
    if (!mask[j]) continue;
    const double p = cumulative[j];
    if (!(p > 0.0 && p < 1.0)) {
      throw std::invalid_argument("masked_bce: cumulative probability outside (0,1)");
    }
    loss -= targets[j] ? std::log(p) : std::log1p(-p);
  }
  return loss / m_count;
}

}  // namespace mmrisk
