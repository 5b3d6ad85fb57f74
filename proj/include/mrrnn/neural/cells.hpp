#pragma once

#include "mrrnn/neural/tensor.hpp"

#include <string>
#include <string_view>
#include <type_traits>

namespace mrrnn::neural {

enum class Gating { gru, lstm };

Gating parse_gating(std::string_view text);
std::string_view to_string(Gating g);

/// Recurrent layer descriptor. Weights are stacked by gate:
///   GRU:  W (3h x in), U (3h x h), b (3h) in the order update, reset, candidate.
///   LSTM: W (4h x in), U (4h x h), b (4h) in the order input, forget, output, cell.
/// An LSTM exposes its state as cell ++ output (2h entries).
struct RnnLayer {
  Gating gating = Gating::gru;
  Index input = 0;
  Index hidden = 0;
  ParamId W, U, b;

  Index gates() const { return gating == Gating::gru ? 3 : 4; }
  Index state_size() const { return gating == Gating::lstm ? 2 * hidden : hidden; }
  /// Offset of the output part inside the state.
  Index output_offset() const { return gating == Gating::lstm ? hidden : 0; }
};

template <typename Scalar>
RnnLayer add_rnn(ParameterSet<Scalar>& params, const std::string& prefix, Gating gating,
                 Index input, Index hidden) {
  RnnLayer layer{gating, input, hidden, {}, {}, {}};
  const Index g = layer.gates();
  layer.W = params.add(prefix + ".W", g * hidden, input);
  layer.U = params.add(prefix + ".U", g * hidden, hidden);
  layer.b = params.add_vector(prefix + ".b", g * hidden);
  return layer;
}

template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(-x));
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return sigmoid(v); });
}

/// GRU update:
///   z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br)
///   n = tanh(Wn x + Un (r . h) + bn), h' = (1 - z) . n + z . h
template <typename Scalar>
Vector<Scalar> gru_step(const Matrix<Scalar>& W, const Matrix<Scalar>& U, const Matrix<Scalar>& b,
                        const Vector<Scalar>& h, const Vector<Scalar>& x) {
  const Index d = h.size();
  Vector<Scalar> ax = W * x + b;
  Vector<Scalar> z = sigmoid(ax.segment(0, d) + U.topRows(d) * h);
  Vector<Scalar> r = sigmoid(ax.segment(d, d) + U.middleRows(d, d) * h);
  Vector<Scalar> n =
      (ax.segment(2 * d, d) + U.bottomRows(d) * r.cwiseProduct(h)).array().tanh().matrix();
  return (Vector<Scalar>::Ones(d) - z).cwiseProduct(n) + z.cwiseProduct(h);
}

/// LSTM update on the concatenated state s = c ++ h:
///   [i f o g] = [sig sig sig tanh](W x + U h + b)
///   c' = f . c + i . g, h' = o . tanh(c')
template <typename Scalar>
Vector<Scalar> lstm_step(const Matrix<Scalar>& W, const Matrix<Scalar>& U, const Matrix<Scalar>& b,
                         const Vector<Scalar>& state, const Vector<Scalar>& x) {
  const Index d = state.size() / 2;
  auto c = state.head(d);
  auto h = state.tail(d);
  Vector<Scalar> a = W * x + U * h + b;
  Vector<Scalar> i = sigmoid(a.segment(0, d));
  Vector<Scalar> f = sigmoid(a.segment(d, d));
  Vector<Scalar> o = sigmoid(a.segment(2 * d, d));
  Vector<Scalar> g = a.segment(3 * d, d).array().tanh().matrix();
  Vector<Scalar> next(2 * d);
  next.head(d) = f.cwiseProduct(c) + i.cwiseProduct(g);
  next.tail(d) = o.cwiseProduct(next.head(d).array().tanh().matrix());
  return next;
}

template <typename Scalar>
Vector<Scalar> rnn_step(const RnnLayer& layer, const ParameterSet<Scalar>& params,
                        const Vector<Scalar>& state, const Vector<Scalar>& x) {
  if (state.size() != layer.state_size() || x.size() != layer.input) {
    throw std::invalid_argument("rnn_step: shape mismatch for " + params.name(layer.W.index));
  }
  if (layer.gating == Gating::gru) {
    return gru_step(params[layer.W], params[layer.U], params[layer.b], state, x);
  }
  return lstm_step(params[layer.W], params[layer.U], params[layer.b], state, x);
}

/// Numerically stable log-softmax.
template <typename Scalar>
Vector<Scalar> log_softmax(const Vector<Scalar>& energies) {
  using std::exp;
  using std::log;
  const Scalar m = energies.maxCoeff();
  Vector<Scalar> shifted = energies.array() - m;
  const Scalar lse = log(shifted.array().exp().sum());
  return shifted.array() - lse;
}

/// P(v | h) = exp(O_v . h) / sum_v' exp(O_v' . h), with O stored as d x |V|.
template <typename Scalar>
Vector<Scalar> output_distribution(const Vector<Scalar>& h, const Matrix<Scalar>& O) {
  if (O.rows() != h.size()) {
    throw std::invalid_argument("output_distribution: O has " + std::to_string(O.rows()) +
                                " rows, hidden state has " + std::to_string(h.size()));
  }
  Vector<Scalar> energies = O.transpose() * h;
  return log_softmax(energies).array().exp().matrix();
}

}  // namespace mrrnn::neural
