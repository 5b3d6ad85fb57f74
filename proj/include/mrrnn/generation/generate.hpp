#pragma once

#include "mrrnn/generation/beam.hpp"
#include "mrrnn/models/forward.hpp"

#include <string>
#include <vector>

namespace mrrnn::generation {

using models::Carry;
using models::EncodedDialogue;
using models::Model;

/// Decoder of one stream under a fixed conditioning vector.
class DecoderView {
 public:
  using State = Vector<double>;

  DecoderView(const Model& model, const models::StreamLayout& stream, Vector<double> condition);

  State initial() const;
  Vector<double> log_probs(const State& s) const;
  State advance(const State& s, int token) const;

 private:
  const Model* model_;
  const models::StreamLayout* stream_;
  Vector<double> condition_;
};

/// RNNLM continuing after the context tokens.
class LanguageModelView {
 public:
  using State = Vector<double>;

  LanguageModelView(const Model& model, const Carry<double>& carry);

  State initial() const;
  Vector<double> log_probs(const State& s) const;
  State advance(const State& s, int token) const;

 private:
  const Model* model_;
  Carry<double> carry_;
};

/// Recurrent state after reading every utterance of `context` (nothing scored).
Carry<double> context_state(const Model& model, const EncodedDialogue& context);

/// Stage-1 view of an MrRNN: the coarse decoder given the coarse context.
DecoderView coarse_view(const Model& model, const Carry<double>& carry);

/// Natural-language decoder given the context. MrRNN needs the coarse
/// sequence of the response (`coarse`, end token included), which the
/// prediction encoder reads on top of the context's coarse sequences.
DecoderView natural_view(const Model& model, const Carry<double>& carry, const std::vector<int>* coarse = nullptr);

struct ResponseOptions {
  GenerationOptions coarse{5, 20};
  GenerationOptions natural{5, 50};
};

struct Response {
  BeamHypothesis coarse;   // empty unless MrRNN
  BeamHypothesis natural;
  bool truncated = false;
};

/// Two-stage MrRNN decoding: beam search the coarse sub-model, then the
/// natural sub-model conditioned on the winning coarse sequence.
Response generate_response(const Model& model, const EncodedDialogue& context, const ResponseOptions& options);

/// Single-stage decoding for rnnlm, hred and hred_actent.
Response generate_response_hred(const Model& model, const EncodedDialogue& context,
                                const GenerationOptions& options);

/// Surfaces of a hypothesis without the end token.
std::string render(const corpus::Vocabulary& vocab, const std::vector<int>& tokens);

}  // namespace mrrnn::generation
