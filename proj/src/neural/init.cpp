#include "mrrnn/neural/init.hpp"

#include <Eigen/QR>

namespace mrrnn::neural {

void fill_gaussian(Matrix<double>& m, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) m(r, c) = scale * normal(rng);
  }
}

Matrix<double> random_orthogonal(Index n, Rng& rng) {
  Matrix<double> g(n, n);
  fill_gaussian(g, 1.0, rng);
  Eigen::HouseholderQR<Matrix<double>> qr(g);
  Matrix<double> q = qr.householderQ() * Matrix<double>::Identity(n, n);
  // Sign fix so the distribution does not depend on the QR convention.
  Matrix<double> r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

void init_rnn(ParameterSet<double>& params, const RnnLayer& layer, double input_scale, Rng& rng) {
  fill_gaussian(params[layer.W], input_scale, rng);
  auto& U = params[layer.U];
  for (Index g = 0; g < layer.gates(); ++g) {
    U.middleRows(g * layer.hidden, layer.hidden) = random_orthogonal(layer.hidden, rng);
  }
  auto& b = params[layer.b];
  b.setZero();
  if (layer.gating == Gating::lstm) b.middleRows(layer.hidden, layer.hidden).setOnes();
}

}  // namespace mrrnn::neural
