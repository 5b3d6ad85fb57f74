#pragma once

#include "mrrnn/neural/cells.hpp"
#include "mrrnn/neural/tensor.hpp"

#include <random>

namespace mrrnn::neural {

using Rng = std::mt19937_64;

/// Gaussian entries scaled by `scale`.
void fill_gaussian(Matrix<double>& m, double scale, Rng& rng);

/// Square block with orthonormal columns (QR of a Gaussian matrix).
Matrix<double> random_orthogonal(Index n, Rng& rng);

/// Recurrent matrices orthogonal per gate block, input matrices Gaussian,
/// biases zero, LSTM forget bias 1.
void init_rnn(ParameterSet<double>& params, const RnnLayer& layer, double input_scale, Rng& rng);

}  // namespace mrrnn::neural
