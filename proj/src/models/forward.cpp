#include "mrrnn/models/forward.hpp"

#include "mrrnn/errors.hpp"

namespace mrrnn::models {
namespace {

void require_kind(const Model& m, ModelKind kind) {
  if (m.layout.kind != kind) {
    throw ConfigError("expected a " + std::string(to_string(kind)) + " model, got " +
                      std::string(to_string(m.layout.kind)));
  }
}

}  // namespace

double rnnlm_log_likelihood(const Model& model, const std::vector<int>& tokens) {
  require_kind(model, ModelKind::rnnlm);
  if (tokens.empty()) throw ResourceError("rnnlm_log_likelihood: empty sequence");
  EncodedDialogue d;
  d.natural.push_back(tokens);
  return log_likelihood(model.layout, model.params, d).natural;
}

LikelihoodReport hred_log_likelihood(const Model& model, const EncodedDialogue& d, std::size_t score_from) {
  require_kind(model, ModelKind::hred);
  return log_likelihood(model.layout, model.params, d, score_from);
}

LikelihoodReport hred_actent_features_log_likelihood(const Model& model, const EncodedDialogue& d,
                                                     std::size_t score_from) {
  require_kind(model, ModelKind::hred_actent);
  return log_likelihood(model.layout, model.params, d, score_from);
}

LikelihoodReport mrrnn_joint_log_likelihood(const Model& model, const EncodedDialogue& d, std::size_t score_from) {
  require_kind(model, ModelKind::mrrnn);
  return log_likelihood(model.layout, model.params, d, score_from);
}

Perplexity corpus_perplexity(const Model& model, const std::vector<EncodedDialogue>& corpus) {
  if (corpus.empty()) throw ResourceError("perplexity of an empty corpus");
  return perplexity(log_likelihood(model.layout, model.params, corpus));
}

}  // namespace mrrnn::models
