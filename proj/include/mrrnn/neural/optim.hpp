#pragma once

#include "mrrnn/neural/tensor.hpp"

#include <cmath>
#include <cstdint>

namespace mrrnn::neural {

/// Rescales g in place so that its global L2 norm is at most `threshold`.
/// Returns the norm before clipping.
template <typename Scalar>
Scalar clip_gradients(GradientSet<Scalar>& g, Scalar threshold) {
  using std::sqrt;
  if (!(threshold > Scalar(0))) throw std::invalid_argument("clip threshold must be positive");
  const Scalar norm = sqrt(squared_norm(g));
  if (norm > threshold) {
    const Scalar scale = threshold / norm;
    for (std::size_t i = 0; i < g.size(); ++i) g.at(i) *= scale;
  }
  return norm;
}

struct AdamOptions {
  double learning_rate = 0.0002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam. Moments are congruent with the parameters they update.
template <typename Scalar>
struct AdamState {
  AdamOptions options;
  std::int64_t step = 0;
  ParameterSet<Scalar> first;
  ParameterSet<Scalar> second;

  AdamState() = default;
  AdamState(const ParameterSet<Scalar>& params, AdamOptions opts)
      : options(opts), first(params.zeros_like()), second(params.zeros_like()) {}
};

template <typename Scalar>
void adam_update(ParameterSet<Scalar>& params, const GradientSet<Scalar>& grads,
                 AdamState<Scalar>& state) {
  using std::pow;
  if (!params.congruent(grads) || !params.congruent(state.first)) {
    throw std::invalid_argument("adam_update: parameter, gradient and moment layouts differ");
  }
  ++state.step;
  const Scalar b1 = Scalar(state.options.beta1);
  const Scalar b2 = Scalar(state.options.beta2);
  const Scalar lr = Scalar(state.options.learning_rate);
  const Scalar eps = Scalar(state.options.epsilon);
  const Scalar c1 = Scalar(1) - pow(b1, Scalar(state.step));
  const Scalar c2 = Scalar(1) - pow(b2, Scalar(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first.at(i);
    auto& v = state.second.at(i);
    const auto& g = grads.at(i);
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
    params.at(i).array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

}  // namespace mrrnn::neural
