#include "mrrnn/generation/generate.hpp"

#include "mrrnn/errors.hpp"

namespace mrrnn::generation {
namespace {

using models::ModelKind;
using models::Tape;
using models::Var;

Vector<double> output_log_probs(const Model& m, const models::StreamLayout& s, const Vector<double>& state) {
  const neural::RnnLayer& dec = s.decoder;
  const Vector<double> out = dec.gating == neural::Gating::lstm ? Vector<double>(state.tail(dec.hidden)) : state;
  return neural::log_softmax<double>(m.params[s.output].transpose() * out);
}

Vector<double> output_vector(const neural::RnnLayer& layer, const Vector<double>& state) {
  return layer.gating == neural::Gating::lstm ? Vector<double>(state.tail(layer.hidden)) : state;
}

}  // namespace

DecoderView::DecoderView(const Model& model, const models::StreamLayout& stream, Vector<double> condition)
    : model_(&model), stream_(&stream), condition_(std::move(condition)) {}

DecoderView::State DecoderView::initial() const {
  Tape<double> t(model_->params, false);
  Var c = t.constant(condition_);
  Var s = models::decoder_start(t, *stream_, c);
  return t.value(models::decoder_advance(t, *stream_, s, models::kEot, c));
}

Vector<double> DecoderView::log_probs(const State& s) const { return output_log_probs(*model_, *stream_, s); }

DecoderView::State DecoderView::advance(const State& s, int token) const {
  Tape<double> t(model_->params, false);
  return t.value(models::decoder_advance(t, *stream_, t.constant(s), token, t.constant(condition_)));
}

LanguageModelView::LanguageModelView(const Model& model, const Carry<double>& carry)
    : model_(&model), carry_(carry) {}

LanguageModelView::State LanguageModelView::initial() const { return advance(carry_.lm, carry_.lm_previous); }

Vector<double> LanguageModelView::log_probs(const State& s) const {
  return output_log_probs(*model_, model_->layout.natural, s);
}

LanguageModelView::State LanguageModelView::advance(const State& s, int token) const {
  const auto& stream = model_->layout.natural;
  Tape<double> t(model_->params, false);
  return t.value(t.rnn_step(stream.decoder, t.constant(s), t.embedding(stream.embedding, token)));
}

Carry<double> context_state(const Model& model, const EncodedDialogue& context) {
  if (context.size() == 0) throw ResourceError("generation needs at least one context utterance");
  models::check_dialogue(model.layout, context);
  Tape<double> t(model.params, false);
  Carry<double> carry = models::initial_carry<double>(model.layout);
  models::forward_segment(t, model.layout, context, 0, context.size(), carry, context.size());
  return carry;
}

DecoderView coarse_view(const Model& model, const Carry<double>& carry) {
  if (!model.layout.has_coarse_stream()) throw ConfigError("model has no coarse sub-model");
  return DecoderView(model, model.layout.coarse, output_vector(model.layout.coarse.context, carry.coarse_context));
}

DecoderView natural_view(const Model& model, const Carry<double>& carry, const std::vector<int>* coarse) {
  const auto& l = model.layout;
  if (l.kind == ModelKind::rnnlm) throw ConfigError("rnnlm has no conditioned decoder");
  Vector<double> condition = output_vector(l.natural.context, carry.natural_context);
  if (l.has_prediction()) {
    Vector<double> pred = carry.prediction;
    if (l.kind == ModelKind::mrrnn) {
      if (!coarse) throw ConfigError("MrRNN natural decoding needs the response's coarse sequence");
      Tape<double> t(model.params, false);
      pred = t.value(models::run_rnn(t, l.prediction, l.prediction_embedding, t.constant(pred),
                                     std::span<const int>(*coarse)));
    }
    Vector<double> joined(condition.size() + l.prediction.hidden);
    joined << condition, output_vector(l.prediction, pred);
    condition = std::move(joined);
  }
  return DecoderView(model, l.natural, std::move(condition));
}

Response generate_response(const Model& model, const EncodedDialogue& context, const ResponseOptions& options) {
  if (model.layout.kind != ModelKind::mrrnn) return generate_response_hred(model, context, options.natural);
  const Carry<double> carry = context_state(model, context);
  Response r;
  BeamResult coarse = beam_search(coarse_view(model, carry), options.coarse);
  r.coarse = coarse.best();
  BeamResult natural = beam_search(natural_view(model, carry, &r.coarse.tokens), options.natural);
  r.natural = natural.best();
  r.truncated = coarse.truncated || natural.truncated;
  return r;
}

Response generate_response_hred(const Model& model, const EncodedDialogue& context,
                                const GenerationOptions& options) {
  if (model.layout.kind == ModelKind::mrrnn) {
    throw ConfigError("MrRNN responses need two-stage decoding");
  }
  const Carry<double> carry = context_state(model, context);
  BeamResult result = model.layout.kind == ModelKind::rnnlm ? beam_search(LanguageModelView(model, carry), options)
                                                            : beam_search(natural_view(model, carry), options);
  Response r;
  r.natural = result.best();
  r.truncated = result.truncated;
  return r;
}

std::string render(const corpus::Vocabulary& vocab, const std::vector<int>& tokens) {
  return corpus::join(vocab.decode_sequence(tokens));
}

}  // namespace mrrnn::generation
