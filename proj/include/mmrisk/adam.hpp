#pragma once

#include <cstdint>
#include <vector>

#include "mmrisk/tensor.hpp"

namespace mmrisk {

// Adam with bias correction over a fixed parameter list. Moment buffers
// are kept in parameter-list order and sized to match each parameter.
struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  int64_t step_count = 0;
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const std::vector<Tensor>& params, double lr,
                          double beta1 = 0.9, double beta2 = 0.999,
                          double epsilon = 1e-8);

// One update over all params. Every param must carry a populated grad
// buffer; grads are consumed read-only (caller zeroes them between steps).
void adam_step(std::vector<Tensor>& params, AdamState& state);

}  // namespace mmrisk
