#include "mmrisk/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace mmrisk {

AdamState make_adam_state(const std::vector<Tensor>& params, double lr, double beta1,
                          double beta2, double epsilon) {
  AdamState st;
  st.lr = lr;
  st.beta1 = beta1;
  st.beta2 = beta2;
  st.epsilon = epsilon;
  for (const auto& p : params) {
    st.first_moment.emplace_back(p.size(), 0.0);
    st.second_moment.emplace_back(p.size(), 0.0);
  }
  return st;
}

void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: state does not match parameter list");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) {
      throw std::invalid_argument("adam_step: missing grad on parameter " + std::to_string(i));
    }
    if (params[i].size() != state.first_moment[i].size()) {
      throw std::invalid_argument("adam_step: moment buffer shape mismatch at " + std::to_string(i));
    }
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (size_t i = 0; i < params.size(); ++i) {
    auto& value = params[i].raw_values();
    const auto& grad = params[i].grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      value[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace mmrisk
