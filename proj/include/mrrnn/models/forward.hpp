#pragma once

#include "mrrnn/corpus/vocabulary.hpp"
#include "mrrnn/models/model.hpp"
#include "mrrnn/neural/tape.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace mrrnn::models {

using neural::Tape;
using neural::Var;
using neural::GradientSet;

inline constexpr int kEot = corpus::Vocabulary::kEndOfUtterance;

/// Recurrent state carried across truncation boundaries inside a dialogue.
/// Values only: each segment starts a fresh tape, so gradients stop here.
template <typename Scalar>
struct Carry {
  Vector<Scalar> natural_context;
  Vector<Scalar> coarse_context;
  Vector<Scalar> prediction;
  Vector<Scalar> lm;
  int lm_previous = kEot;
};

template <typename Scalar>
Carry<Scalar> initial_carry(const Layout& l) {
  Carry<Scalar> c;
  if (l.kind == ModelKind::rnnlm) {
    c.lm = Vector<Scalar>::Zero(l.natural.decoder.state_size());
    return c;
  }
  c.natural_context = Vector<Scalar>::Zero(l.natural.context.state_size());
  if (l.has_coarse_stream()) c.coarse_context = Vector<Scalar>::Zero(l.coarse.context.state_size());
  if (l.has_prediction()) c.prediction = Vector<Scalar>::Zero(l.prediction.state_size());
  return c;
}

template <typename Scalar>
Var output_part(Tape<Scalar>& t, const RnnLayer& layer, Var state) {
  return layer.gating == Gating::lstm ? t.slice(state, layer.hidden, layer.hidden) : state;
}

template <typename Scalar>
Var run_rnn(Tape<Scalar>& t, const RnnLayer& layer, ParamId embedding, Var state, std::span<const int> ids) {
  for (int id : ids) state = t.rnn_step(layer, state, t.embedding(embedding, id));
  return state;
}

/// Encoder output for one utterance.
template <typename Scalar>
Var encode_utterance(Tape<Scalar>& t, const StreamLayout& s, std::span<const int> ids) {
  const auto& e = s.encoder;
  Var fwd = run_rnn(t, e.forward, s.embedding, t.constant(Vector<Scalar>::Zero(e.forward.state_size())), ids);
  Var out = output_part(t, e.forward, fwd);
  if (!e.backward) return out;
  std::vector<int> reversed(ids.rbegin(), ids.rend());
  Var bwd = run_rnn(t, *e.backward, s.embedding, t.constant(Vector<Scalar>::Zero(e.backward->state_size())),
                    std::span<const int>(reversed));
  return t.concat({out, output_part(t, *e.backward, bwd)});
}

/// Decoder state before the first token; the first input is end-of-utterance.
template <typename Scalar>
Var decoder_start(Tape<Scalar>& t, const StreamLayout& s, Var condition) {
  return t.affine_tanh(s.init_W, s.init_b, condition);
}

template <typename Scalar>
Var decoder_advance(Tape<Scalar>& t, const StreamLayout& s, Var state, int input, Var condition) {
  return t.rnn_step(s.decoder, state, t.concat({t.embedding(s.embedding, input), condition}));
}

/// Teacher-forced log-probabilities of `ids`, appended to `terms`.
template <typename Scalar>
void decode_utterance(Tape<Scalar>& t, const StreamLayout& s, Var condition, std::span<const int> ids,
                      std::vector<Var>& terms) {
  Var state = decoder_start(t, s, condition);
  int previous = kEot;
  for (int id : ids) {
    state = decoder_advance(t, s, state, previous, condition);
    terms.push_back(t.log_prob(s.output, output_part(t, s.decoder, state), id));
    previous = id;
  }
}

struct SegmentTerms {
  std::vector<Var> coarse;
  std::vector<Var> natural;
};

/// Runs utterances [begin, end) of `d` from `carry`, which is updated to the
/// state after `end`. Utterances before `score_from` are read as context but
/// not scored. Per utterance n the order is: coarse decode of z_n, coarse
/// encode/context update, prediction encoder over z_n, natural decode of w_n,
/// natural encode/context update. hred_actent decodes w_n before its feature
/// encoder reads z_n, so only z_1..z_{n-1} condition w_n.
template <typename Scalar>
SegmentTerms forward_segment(Tape<Scalar>& t, const Layout& l, const EncodedDialogue& d, std::size_t begin,
                             std::size_t end, Carry<Scalar>& carry, std::size_t score_from = 0) {
  SegmentTerms terms;
  if (l.kind == ModelKind::rnnlm) {
    const auto& s = l.natural;
    Var state = t.constant(carry.lm);
    int previous = carry.lm_previous;
    for (std::size_t n = begin; n < end; ++n) {
      for (int id : d.natural[n]) {
        state = t.rnn_step(s.decoder, state, t.embedding(s.embedding, previous));
        if (n >= score_from) terms.natural.push_back(t.log_prob(s.output, output_part(t, s.decoder, state), id));
        previous = id;
      }
    }
    carry.lm = t.value(state);
    carry.lm_previous = previous;
    return terms;
  }

  Var nl_ctx = t.constant(carry.natural_context);
  Var co_ctx, pred;
  if (l.has_coarse_stream()) co_ctx = t.constant(carry.coarse_context);
  if (l.has_prediction()) pred = t.constant(carry.prediction);

  for (std::size_t n = begin; n < end; ++n) {
    const bool scored = n >= score_from;
    if (l.has_coarse_stream()) {
      const auto& cs = l.coarse;
      if (scored) decode_utterance(t, cs, output_part(t, cs.context, co_ctx), d.coarse[n], terms.coarse);
      co_ctx = t.rnn_step(cs.context, co_ctx, encode_utterance(t, cs, d.coarse[n]));
    }
    if (l.kind == ModelKind::mrrnn) pred = run_rnn(t, l.prediction, l.prediction_embedding, pred, d.coarse[n]);

    const auto& ns = l.natural;
    if (scored) {
      Var condition = output_part(t, ns.context, nl_ctx);
      if (l.has_prediction()) condition = t.concat({condition, output_part(t, l.prediction, pred)});
      decode_utterance(t, ns, condition, d.natural[n], terms.natural);
    }
    nl_ctx = t.rnn_step(ns.context, nl_ctx, encode_utterance(t, ns, d.natural[n]));

    if (l.kind == ModelKind::hred_actent) {
      pred = run_rnn(t, l.prediction, l.prediction_embedding, pred, d.coarse[n]);
    }
  }
  carry.natural_context = t.value(nl_ctx);
  if (l.has_coarse_stream()) carry.coarse_context = t.value(co_ctx);
  if (l.has_prediction()) carry.prediction = t.value(pred);
  return terms;
}

/// Log-likelihoods in nats. `joint` is always computed as coarse + natural
/// after both streams have been summed term by term in order.
struct LikelihoodReport {
  double coarse = 0.0;
  double natural = 0.0;
  double joint = 0.0;
  std::size_t coarse_tokens = 0;
  std::size_t natural_tokens = 0;

  std::size_t tokens() const { return coarse_tokens + natural_tokens; }
};

template <typename Scalar>
LikelihoodReport log_likelihood(const Layout& l, const ParameterSet<Scalar>& params, const EncodedDialogue& d,
                                std::size_t score_from = 0) {
  check_dialogue(l, d);
  Tape<Scalar> t(params, false);
  Carry<Scalar> carry = initial_carry<Scalar>(l);
  const SegmentTerms terms = forward_segment(t, l, d, 0, d.size(), carry, score_from);
  LikelihoodReport r;
  for (Var v : terms.coarse) r.coarse += static_cast<double>(t.scalar(v));
  for (Var v : terms.natural) r.natural += static_cast<double>(t.scalar(v));
  r.joint = r.coarse + r.natural;
  r.coarse_tokens = terms.coarse.size();
  r.natural_tokens = terms.natural.size();
  return r;
}

/// Corpus totals, summed dialogue by dialogue per stream.
template <typename Scalar>
LikelihoodReport log_likelihood(const Layout& l, const ParameterSet<Scalar>& params,
                                const std::vector<EncodedDialogue>& corpus) {
  LikelihoodReport total;
  for (const auto& d : corpus) {
    const LikelihoodReport r = log_likelihood(l, params, d);
    total.coarse += r.coarse;
    total.natural += r.natural;
    total.coarse_tokens += r.coarse_tokens;
    total.natural_tokens += r.natural_tokens;
  }
  total.joint = total.coarse + total.natural;
  return total;
}

/// Negative joint log-likelihood of a whole dialogue (no truncation), with
/// gradients accumulated into `grads` when given. Used by the gradient checks.
template <typename Scalar>
Scalar negative_log_likelihood(const Layout& l, const ParameterSet<Scalar>& params, const EncodedDialogue& d,
                               GradientSet<Scalar>* grads) {
  Tape<Scalar> t(params, grads != nullptr);
  Carry<Scalar> carry = initial_carry<Scalar>(l);
  SegmentTerms terms = forward_segment(t, l, d, 0, d.size(), carry);
  std::vector<Var> all = terms.coarse;
  all.insert(all.end(), terms.natural.begin(), terms.natural.end());
  Var loss = t.sum(all, Scalar(-1));
  if (grads) t.backward(loss, *grads);
  return t.scalar(loss);
}

struct Perplexity {
  double natural = 0.0;
  double coarse = 0.0;
  double joint = 0.0;
};

inline Perplexity perplexity(const LikelihoodReport& r) {
  Perplexity p;
  p.natural = r.natural_tokens ? std::exp(-r.natural / static_cast<double>(r.natural_tokens)) : 1.0;
  p.coarse = r.coarse_tokens ? std::exp(-r.coarse / static_cast<double>(r.coarse_tokens)) : 1.0;
  p.joint = r.tokens() ? std::exp(-r.joint / static_cast<double>(r.tokens())) : 1.0;
  return p;
}

// Named entry points on a double-precision model.

double rnnlm_log_likelihood(const Model& model, const std::vector<int>& tokens);
LikelihoodReport hred_log_likelihood(const Model& model, const EncodedDialogue& d, std::size_t score_from = 0);
LikelihoodReport hred_actent_features_log_likelihood(const Model& model, const EncodedDialogue& d,
                                                     std::size_t score_from = 0);
LikelihoodReport mrrnn_joint_log_likelihood(const Model& model, const EncodedDialogue& d,
                                            std::size_t score_from = 0);
Perplexity corpus_perplexity(const Model& model, const std::vector<EncodedDialogue>& corpus);

}  // namespace mrrnn::models
