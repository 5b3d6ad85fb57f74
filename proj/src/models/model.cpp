#include "mrrnn/models/model.hpp"

#include "mrrnn/errors.hpp"

namespace mrrnn::models {
namespace {

using neural::add_rnn;

EncoderLayout add_encoder(ParameterSet<double>& params, const std::string& prefix, Gating gating, Index input,
                          Index hidden, bool bidirectional) {
  EncoderLayout e;
  e.forward = add_rnn(params, prefix + ".fwd", gating, input, hidden);
  if (bidirectional) e.backward = add_rnn(params, prefix + ".bwd", gating, input, hidden);
  e.output_size = bidirectional ? 2 * hidden : hidden;
  return e;
}

struct StreamDims {
  Index vocab, embedding, encoder, context, decoder, extra_condition;
  Gating encoder_gating, context_gating, decoder_gating;
  bool bidirectional;
};

StreamLayout add_stream(ParameterSet<double>& params, const std::string& prefix, const StreamDims& d) {
  StreamLayout s;
  s.vocab = d.vocab;
  s.embedding = params.add(prefix + ".emb", d.embedding, d.vocab);
  s.encoder = add_encoder(params, prefix + ".enc", d.encoder_gating, d.embedding, d.encoder, d.bidirectional);
  s.context = add_rnn(params, prefix + ".ctx", d.context_gating, s.encoder.output_size, d.context);
  s.condition_size = d.context + d.extra_condition;
  s.decoder = add_rnn(params, prefix + ".dec", d.decoder_gating, d.embedding + s.condition_size, d.decoder);
  s.init_W = params.add(prefix + ".init.W", s.decoder.state_size(), s.condition_size);
  s.init_b = params.add_vector(prefix + ".init.b", s.decoder.state_size());
  s.output = params.add(prefix + ".out", d.decoder, d.vocab);
  return s;
}

void init_stream(ParameterSet<double>& params, const StreamLayout& s, double scale, neural::Rng& rng) {
  neural::fill_gaussian(params[s.embedding], scale, rng);
  neural::init_rnn(params, s.encoder.forward, scale, rng);
  if (s.encoder.backward) neural::init_rnn(params, *s.encoder.backward, scale, rng);
  neural::init_rnn(params, s.context, scale, rng);
  neural::init_rnn(params, s.decoder, scale, rng);
  neural::fill_gaussian(params[s.init_W], scale, rng);
  params[s.init_b].setZero();
  neural::fill_gaussian(params[s.output], scale, rng);
}

}  // namespace

Layout register_parameters(const ModelConfig& c, Index natural_vocab, Index coarse_vocab,
                           ParameterSet<double>& params) {
  c.validate();
  if (natural_vocab < 1 || (uses_coarse(c.kind) && coarse_vocab < 1)) {
    throw ConfigError("model needs non-empty vocabularies");
  }
  Layout l;
  l.kind = c.kind;
  if (c.kind == ModelKind::rnnlm) {
    l.natural.vocab = natural_vocab;
    l.natural.embedding = params.add("lm.emb", c.natural_embedding_dim, natural_vocab);
    l.natural.decoder = add_rnn(params, "lm.rnn", c.decoder_gating, c.natural_embedding_dim, c.decoder_hidden);
    l.natural.output = params.add("lm.out", c.decoder_hidden, natural_vocab);
    return l;
  }
  if (c.kind == ModelKind::mrrnn) {
    l.coarse = add_stream(params, "co",
                          StreamDims{coarse_vocab, c.coarse_embedding_dim, c.coarse_encoder_hidden,
                                     c.coarse_context_hidden, c.coarse_decoder_hidden, 0, c.coarse_encoder_gating,
                                     c.coarse_context_gating, c.coarse_decoder_gating,
                                     c.coarse_bidirectional_encoder});
  }
  if (uses_coarse(c.kind)) {
    l.coarse_vocab = coarse_vocab;
    l.prediction_embedding = params.add("pred.emb", c.coarse_embedding_dim, coarse_vocab);
    l.prediction = add_rnn(params, "pred.rnn", c.prediction_gating, c.coarse_embedding_dim, c.prediction_hidden);
  }
  l.natural = add_stream(params, "nl",
                         StreamDims{natural_vocab, c.natural_embedding_dim, c.encoder_hidden, c.context_hidden,
                                    c.decoder_hidden, uses_coarse(c.kind) ? c.prediction_hidden : 0,
                                    c.encoder_gating, c.context_gating, c.decoder_gating, c.bidirectional_encoder});
  return l;
}

void initialize(ParameterSet<double>& params, const Layout& l, double scale, neural::Rng& rng) {
  if (l.kind == ModelKind::rnnlm) {
    neural::fill_gaussian(params[l.natural.embedding], scale, rng);
    neural::init_rnn(params, l.natural.decoder, scale, rng);
    neural::fill_gaussian(params[l.natural.output], scale, rng);
    return;
  }
  if (l.has_coarse_stream()) init_stream(params, l.coarse, scale, rng);
  if (l.has_prediction()) {
    neural::fill_gaussian(params[l.prediction_embedding], scale, rng);
    neural::init_rnn(params, l.prediction, scale, rng);
  }
  init_stream(params, l.natural, scale, rng);
}

Model create_model(const ModelConfig& config, corpus::Vocabulary natural, corpus::Vocabulary coarse) {
  Model m;
  m.config = config;
  m.layout = register_parameters(config, static_cast<Index>(natural.size()), static_cast<Index>(coarse.size()),
                                 m.params);
  m.natural_vocab = std::move(natural);
  m.coarse_vocab = std::move(coarse);
  neural::Rng rng(config.seed);
  initialize(m.params, m.layout, config.init_scale, rng);
  return m;
}

Model create_model(const ModelConfig& config, Index natural_vocab, Index coarse_vocab) {
  Model m;
  m.config = config;
  m.layout = register_parameters(config, natural_vocab, coarse_vocab, m.params);
  neural::Rng rng(config.seed);
  initialize(m.params, m.layout, config.init_scale, rng);
  return m;
}

std::size_t EncodedDialogue::natural_tokens(std::size_t begin, std::size_t end) const {
  std::size_t n = 0;
  for (std::size_t i = begin; i < end; ++i) n += natural[i].size();
  return n;
}

std::size_t EncodedDialogue::coarse_tokens(std::size_t begin, std::size_t end) const {
  std::size_t n = 0;
  if (coarse.empty()) return 0;
  for (std::size_t i = begin; i < end; ++i) n += coarse[i].size();
  return n;
}

EncodedDialogue encode_dialogue(const Model& model, const corpus::Dialogue& dialogue) {
  EncodedDialogue out;
  for (const auto& u : dialogue.utterances) out.natural.push_back(model.natural_vocab.encode_sequence(u.tokens));
  if (uses_coarse(model.layout.kind)) {
    if (!dialogue.coarse) throw AlignmentError("model kind " + std::string(to_string(model.layout.kind)) +
                                               " needs aligned coarse sequences");
    if (dialogue.coarse->size() != dialogue.utterances.size()) {
      throw AlignmentError("coarse sequence count differs from utterance count");
    }
    for (const auto& c : *dialogue.coarse) out.coarse.push_back(model.coarse_vocab.encode_sequence(c.tokens));
  }
  return out;
}

std::vector<EncodedDialogue> encode_corpus(const Model& model, const std::vector<corpus::Dialogue>& dialogues) {
  std::vector<EncodedDialogue> out;
  out.reserve(dialogues.size());
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    try {
      out.push_back(encode_dialogue(model, dialogues[i]));
    } catch (const AlignmentError& e) {
      throw AlignmentError("dialogue " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

void check_dialogue(const Layout& layout, const EncodedDialogue& d) {
  if (d.natural.empty()) throw ResourceError("dialogue has no utterances");
  auto check = [](const std::vector<std::vector<int>>& seqs, Index vocab, const char* stream) {
    for (const auto& s : seqs) {
      if (s.empty()) throw ResourceError(std::string("empty ") + stream + " utterance");
      for (int id : s) {
        if (id < 0 || id >= vocab) {
          throw std::out_of_range(std::string(stream) + " token id " + std::to_string(id) + " outside vocabulary");
        }
      }
    }
  };
  check(d.natural, layout.natural.vocab, "natural");
  if (layout.has_prediction()) {
    if (d.coarse.size() != d.natural.size()) {
      throw AlignmentError("coarse sequence count differs from utterance count");
    }
    check(d.coarse, layout.coarse_vocab, "coarse");
  }
}

}  // namespace mrrnn::models
