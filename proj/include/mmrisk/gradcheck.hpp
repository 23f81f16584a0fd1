#pragma once

#include <functional>
#include <vector>

#include "mmrisk/tensor.hpp"

namespace mmrisk {

// Compares analytic gradients against central finite differences.
//
// `f` rebuilds the forward graph from the current parameter values and
// returns the scalar loss tensor; it must be deterministic. Returns the
// max over all parameter coordinates of
//   |analytic - numeric| / max(1e-12, |analytic| + |numeric|).
// Non-finite values raise, naming the parameter index and coordinate.
double finite_diff_check(const std::function<Tensor()>& f, std::vector<Tensor>& params,
                         double step);

}  // namespace mmrisk
