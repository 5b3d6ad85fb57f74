#pragma once

#include "mrrnn/corpus/corpus.hpp"
#include "mrrnn/corpus/vocabulary.hpp"
#include "mrrnn/models/config.hpp"
#include "mrrnn/neural/init.hpp"
#include "mrrnn/neural/tensor.hpp"

#include <optional>
#include <vector>

namespace mrrnn::models {

using neural::Matrix;
using neural::ParameterSet;
using neural::ParamId;
using neural::RnnLayer;
using neural::Vector;

/// Utterance encoder; with a backward layer the output is the forward and
/// backward final outputs concatenated.
struct EncoderLayout {
  RnnLayer forward;
  std::optional<RnnLayer> backward;
  Index output_size = 0;
};

/// Encoder, context and decoder RNNs over one token stream. The decoder is
/// conditioned on a vector of size `condition_size` (context output, plus the
/// prediction encoder output where present): it initialises the decoder state
/// through tanh(init_W cond + init_b) and is appended to every decoder input.
struct StreamLayout {
  Index vocab = 0;
  ParamId embedding;  // emb x |V|
  EncoderLayout encoder;
  RnnLayer context;
  RnnLayer decoder;
  ParamId init_W, init_b;
  ParamId output;  // decoder hidden x |V|
  Index condition_size = 0;
};

/// RNNLM uses `natural.embedding`, `natural.decoder` and `natural.output` only.
struct Layout {
  ModelKind kind = ModelKind::hred;
  StreamLayout natural;
  StreamLayout coarse;  // mrrnn
  Index coarse_vocab = 0;
  ParamId prediction_embedding;  // hred_actent, mrrnn
  RnnLayer prediction;

  bool has_coarse_stream() const { return kind == ModelKind::mrrnn; }
  bool has_prediction() const { return uses_coarse(kind); }
};

/// Registers every parameter of `config.kind` in a fixed order.
Layout register_parameters(const ModelConfig& config, Index natural_vocab, Index coarse_vocab,
                           ParameterSet<double>& params);

/// Orthogonal recurrent blocks, Gaussian input/output/embedding matrices
/// scaled by `scale`, zero biases (LSTM forget bias 1).
void initialize(ParameterSet<double>& params, const Layout& layout, double scale, neural::Rng& rng);

struct Model {
  ModelConfig config;
  corpus::Vocabulary natural_vocab;
  corpus::Vocabulary coarse_vocab;
  Layout layout;
  ParameterSet<double> params;
};

/// Parameters initialised from `config.seed`.
Model create_model(const ModelConfig& config, corpus::Vocabulary natural, corpus::Vocabulary coarse);

/// Vocabulary-free variant for synthetic models: ids are used directly.
Model create_model(const ModelConfig& config, Index natural_vocab, Index coarse_vocab);

/// Id sequences of one dialogue. Each utterance normally ends with the
/// end-of-utterance id, which is scored like any other token.
struct EncodedDialogue {
  std::vector<std::vector<int>> natural;
  std::vector<std::vector<int>> coarse;  // empty unless the model uses coarse tokens

  std::size_t size() const { return natural.size(); }
  std::size_t natural_tokens(std::size_t begin, std::size_t end) const;
  std::size_t coarse_tokens(std::size_t begin, std::size_t end) const;
};

EncodedDialogue encode_dialogue(const Model& model, const corpus::Dialogue& dialogue);
std::vector<EncodedDialogue> encode_corpus(const Model& model, const std::vector<corpus::Dialogue>& dialogues);

/// Rejects ids outside the model's vocabularies, empty utterances and
/// missing coarse alignment.
void check_dialogue(const Layout& layout, const EncodedDialogue& dialogue);

}  // namespace mrrnn::models
