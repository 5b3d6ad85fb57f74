#pragma once

#include "mrrnn/neural/cells.hpp"
#include "mrrnn/neural/tensor.hpp"

#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace mrrnn::neural {

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape specialised to the vector-valued operations used by the
/// recurrent models. Every node holds a column vector; parameters are read
/// from a ParameterSet and their gradients are accumulated into a congruent
/// GradientSet by backward().
template <typename Scalar>
class Tape {
 public:
  using Vec = Vector<Scalar>;
  using Mat = Matrix<Scalar>;

  explicit Tape(const ParameterSet<Scalar>& params, bool record = true)
      : params_(&params), record_(record) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }
  const ParameterSet<Scalar>& params() const { return *params_; }

  const Vec& value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).value; }
  Scalar scalar(Var v) const { return value(v)(0); }

  Var constant(Vec v) { return push(std::move(v), {}); }

  /// A rank-1 parameter (or a flattened matrix) as a differentiable input.
  Var parameter(ParamId p) {
    const Mat& m = (*params_)[p];
    Vec v = Eigen::Map<const Vec>(m.data(), m.size());
    return push(std::move(v), [p](Tape& t, const Vec& g) {
      Mat& acc = t.grads()[p];
      Eigen::Map<Vec>(acc.data(), acc.size()) += g;
    });
  }

  Var embedding(ParamId table, Index column) {
    const Mat& m = (*params_)[table];
    if (column < 0 || column >= m.cols()) {
      throw std::out_of_range("embedding: id " + std::to_string(column) + " outside " +
                              params_->name(table.index));
    }
    return push(m.col(column), [table, column](Tape& t, const Vec& g) {
      t.grads()[table].col(column) += g;
    });
  }

  Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }

  Var concat(std::span<const Var> parts) {
    Index total = 0;
    for (Var p : parts) total += value(p).size();
    Vec out(total);
    std::vector<std::pair<Var, Index>> pieces;
    Index offset = 0;
    for (Var p : parts) {
      const Index n = value(p).size();
      out.segment(offset, n) = value(p);
      pieces.emplace_back(p, n);
      offset += n;
    }
    return push(std::move(out), [pieces](Tape& t, const Vec& g) {
      Index off = 0;
      for (auto [p, n] : pieces) {
        t.accumulate(p, g.segment(off, n));
        off += n;
      }
    });
  }

  Var slice(Var in, Index start, Index length) {
    Vec out = value(in).segment(start, length);
    return push(std::move(out), [in, start, length](Tape& t, const Vec& g) {
      Vec full = Vec::Zero(t.value(in).size());
      full.segment(start, length) = g;
      t.accumulate(in, full);
    });
  }

  /// tanh(W x + b)
  Var affine_tanh(ParamId W, ParamId b, Var x) {
    const Mat& w = (*params_)[W];
    Vec y = (w * value(x) + (*params_)[b]).array().tanh().matrix();
    Vec saved = y;
    return push(std::move(y), [W, b, x, saved](Tape& t, const Vec& g) {
      Vec da = g.cwiseProduct((Vec::Ones(saved.size()) - saved.cwiseAbs2()));
      t.grads()[W].noalias() += da * t.value(x).transpose();
      t.grads()[b] += da;
      t.accumulate(x, t.params()[W].transpose() * da);
    });
  }

  Var rnn_step(const RnnLayer& layer, Var state, Var x) {
    if (value(state).size() != layer.state_size() || value(x).size() != layer.input) {
      throw std::invalid_argument("rnn_step: shape mismatch for " + params_->name(layer.W.index));
    }
    return layer.gating == Gating::gru ? gru(layer, state, x) : lstm(layer, state, x);
  }

  /// Scalar node holding log P(target | h) under the softmax output layer O (d x |V|).
  Var log_prob(ParamId O, Var h, Index target) {
    const Mat& o = (*params_)[O];
    if (target < 0 || target >= o.cols()) {
      throw std::out_of_range("log_prob: target " + std::to_string(target) + " outside vocabulary");
    }
    Vec logp = log_softmax<Scalar>(o.transpose() * value(h));
    Vec out(1);
    out(0) = logp(target);
    if (!record_) return push(std::move(out), {});
    return push(std::move(out), [O, h, target, logp](Tape& t, const Vec& g) {
      // d log p_target / d energies = onehot - p
      Vec de = -logp.array().exp().matrix();
      de(target) += Scalar(1);
      de *= g(0);
      t.grads()[O].noalias() += t.value(h) * de.transpose();
      t.accumulate(h, t.params()[O] * de);
    });
  }

  /// scale * sum of scalar nodes.
  Var sum(std::span<const Var> terms, Scalar scale = Scalar(1)) {
    Vec out = Vec::Zero(1);
    for (Var v : terms) out(0) += scalar(v);
    out(0) *= scale;
    std::vector<Var> inputs(terms.begin(), terms.end());
    return push(std::move(out), [inputs, scale](Tape& t, const Vec& g) {
      Vec s(1);
      s(0) = g(0) * scale;
      for (Var v : inputs) t.accumulate(v, s);
    });
  }

  /// w . x for a fixed weight vector.
  Var dot(const Vec& w, Var x) {
    Vec out(1);
    out(0) = w.dot(value(x));
    return push(std::move(out), [w, x](Tape& t, const Vec& g) { t.accumulate(x, w * g(0)); });
  }

  /// Accumulates d loss / d params into `grads`, which must be congruent with
  /// the tape's parameters. The loss must be a scalar node.
  void backward(Var loss, GradientSet<Scalar>& grads) {
    if (nodes_.empty() || !loss.valid() || loss.id >= static_cast<int>(nodes_.size())) {
      throw std::logic_error("backward called before a forward pass was recorded");
    }
    if (!record_) throw std::logic_error("backward on a tape that does not record");
    if (value(loss).size() != 1) throw std::logic_error("backward needs a scalar loss");
    if (!grads.congruent(*params_)) throw std::invalid_argument("backward: gradient layout mismatch");
    grads_ = &grads;
    for (auto& n : nodes_) n.grad.resize(0);
    nodes_[static_cast<std::size_t>(loss.id)].grad = Vec::Ones(1);
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.grad.size() == 0 || !n.backward) continue;
      Vec g = std::move(n.grad);
      n.backward(*this, g);
    }
    grads_ = nullptr;
  }

 private:
  using Backward = std::function<void(Tape&, const Vec&)>;

  struct Node {
    Vec value;
    Vec grad;
    Backward backward;
  };

  Var push(Vec value, Backward backward) {
    nodes_.push_back(Node{std::move(value), Vec(), record_ ? std::move(backward) : Backward{}});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  GradientSet<Scalar>& grads() { return *grads_; }

  template <typename Derived>
  void accumulate(Var v, const Eigen::MatrixBase<Derived>& g) {
    Vec& acc = nodes_[static_cast<std::size_t>(v.id)].grad;
    if (acc.size() == 0) {
      acc = g;
    } else {
      acc += g;
    }
  }

  Var gru(const RnnLayer& layer, Var state, Var x) {
    const Mat& W = (*params_)[layer.W];
    const Mat& U = (*params_)[layer.U];
    const Mat& b = (*params_)[layer.b];
    const Vec& h = value(state);
    const Index d = layer.hidden;
    Vec ax = W * value(x) + b;
    Vec z = sigmoid(ax.segment(0, d) + U.topRows(d) * h);
    Vec r = sigmoid(ax.segment(d, d) + U.middleRows(d, d) * h);
    Vec rh = r.cwiseProduct(h);
    Vec n = (ax.segment(2 * d, d) + U.bottomRows(d) * rh).array().tanh().matrix();
    Vec out = (Vec::Ones(d) - z).cwiseProduct(n) + z.cwiseProduct(h);
    if (!record_) return push(std::move(out), {});
    return push(std::move(out), [layer, state, x, z, r, rh, n](Tape& t, const Vec& g) {
      const Index d = layer.hidden;
      const Mat& U = t.params()[layer.U];
      const Mat& W = t.params()[layer.W];
      const Vec& h = t.value(state);
      const Vec& xv = t.value(x);
      Vec da(3 * d);
      auto da_z = da.segment(0, d);
      auto da_r = da.segment(d, d);
      auto da_n = da.segment(2 * d, d);
      da_n = g.cwiseProduct(Vec::Ones(d) - z).cwiseProduct(Vec::Ones(d) - n.cwiseAbs2());
      da_z = g.cwiseProduct(h - n).cwiseProduct(z.cwiseProduct(Vec::Ones(d) - z));
      Vec d_rh = U.bottomRows(d).transpose() * da_n;
      da_r = d_rh.cwiseProduct(h).cwiseProduct(r.cwiseProduct(Vec::Ones(d) - r));
      Vec dh = g.cwiseProduct(z) + d_rh.cwiseProduct(r) + U.topRows(d).transpose() * da_z +
               U.middleRows(d, d).transpose() * da_r;
      Mat& gU = t.grads()[layer.U];
      gU.topRows(d).noalias() += da_z * h.transpose();
      gU.middleRows(d, d).noalias() += da_r * h.transpose();
      gU.bottomRows(d).noalias() += da_n * rh.transpose();
      t.grads()[layer.W].noalias() += da * xv.transpose();
      t.grads()[layer.b] += da;
      t.accumulate(state, dh);
      t.accumulate(x, W.transpose() * da);
    });
  }

  Var lstm(const RnnLayer& layer, Var state, Var x) {
    const Mat& W = (*params_)[layer.W];
    const Mat& U = (*params_)[layer.U];
    const Mat& b = (*params_)[layer.b];
    const Index d = layer.hidden;
    const Vec& s = value(state);
    Vec a = W * value(x) + U * s.tail(d) + b;
    Vec gates(4 * d);
    gates.head(3 * d) = sigmoid(a.head(3 * d));
    gates.tail(d) = a.tail(d).array().tanh().matrix();
    Vec out(2 * d);
    out.head(d) = gates.segment(d, d).cwiseProduct(s.head(d)) +
                  gates.segment(0, d).cwiseProduct(gates.tail(d));
    Vec tc = out.head(d).array().tanh().matrix();
    out.tail(d) = gates.segment(2 * d, d).cwiseProduct(tc);
    if (!record_) return push(std::move(out), {});
    return push(std::move(out), [layer, state, x, gates, tc](Tape& t, const Vec& g) {
      const Index d = layer.hidden;
      const Vec& s = t.value(state);
      auto i = gates.segment(0, d);
      auto f = gates.segment(d, d);
      auto o = gates.segment(2 * d, d);
      auto gg = gates.tail(d);
      Vec dc = g.head(d) + g.tail(d).cwiseProduct(o).cwiseProduct(Vec::Ones(d) - tc.cwiseAbs2());
      Vec da(4 * d);
      da.segment(0, d) = dc.cwiseProduct(gg).cwiseProduct(i.cwiseProduct(Vec::Ones(d) - i));
      da.segment(d, d) = dc.cwiseProduct(s.head(d)).cwiseProduct(f.cwiseProduct(Vec::Ones(d) - f));
      da.segment(2 * d, d) = g.tail(d).cwiseProduct(tc).cwiseProduct(o.cwiseProduct(Vec::Ones(d) - o));
      da.tail(d) = dc.cwiseProduct(i).cwiseProduct(Vec::Ones(d) - gg.cwiseAbs2());
      const Mat& W = t.params()[layer.W];
      const Mat& U = t.params()[layer.U];
      t.grads()[layer.W].noalias() += da * t.value(x).transpose();
      t.grads()[layer.U].noalias() += da * s.tail(d).transpose();
      t.grads()[layer.b] += da;
      Vec ds(2 * d);
      ds.head(d) = dc.cwiseProduct(f);
      ds.tail(d) = U.transpose() * da;
      t.accumulate(state, ds);
      t.accumulate(x, W.transpose() * da);
    });
  }

  const ParameterSet<Scalar>* params_;
  bool record_;
  std::vector<Node> nodes_;
  GradientSet<Scalar>* grads_ = nullptr;
};

}  // namespace mrrnn::neural
