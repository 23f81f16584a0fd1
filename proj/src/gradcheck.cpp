#include "mmrisk/gradcheck.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mmrisk {

double finite_diff_check(const std::function<Tensor()>& f, std::vector<Tensor>& params,
                         double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff_check: step must be positive");

  for (auto& p : params) p.zero_grad();
  Tensor loss = f();
  backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad());

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& value = params[pi].raw_values();
    for (size_t j = 0; j < value.size(); ++j) {
      const double saved = value[j];
      value[j] = saved + step;
      const double up = f().item();
      value[j] = saved - step;
      const double down = f().item();
      value[j] = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double exact = analytic[pi][j];
      if (!std::isfinite(numeric) || !std::isfinite(exact)) {
        throw std::runtime_error("finite_diff_check: non-finite value at param " +
                                 std::to_string(pi) + " coord " + std::to_string(j));
      }
      const double err = std::abs(exact - numeric) /
                         std::max(1e-12, std::abs(exact) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace mmrisk
