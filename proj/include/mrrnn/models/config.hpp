#pragma once

#include "mrrnn/neural/cells.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mrrnn::models {

using neural::Gating;
using neural::Index;

enum class ModelKind { rnnlm, hred, hred_actent, mrrnn };

ModelKind parse_model_kind(std::string_view text);
std::string_view to_string(ModelKind kind);

/// True for kinds that read an aligned coarse file.
inline bool uses_coarse(ModelKind k) { return k == ModelKind::hred_actent || k == ModelKind::mrrnn; }

/// Every field has a config key of the same name. RNNLM only reads the
/// natural embedding and the decoder fields. `prediction_*` is the coarse
/// prediction encoder of MrRNN and the past-coarse feature encoder of
/// hred_actent.
struct ModelConfig {
  ModelKind kind = ModelKind::mrrnn;

  std::size_t natural_vocab_size = 20000;
  std::size_t coarse_vocab_size = 10000;
  Index natural_embedding_dim = 300;
  Index coarse_embedding_dim = 300;

  Index encoder_hidden = 500;
  Index context_hidden = 1000;
  Index decoder_hidden = 2000;
  Index prediction_hidden = 500;
  Index coarse_encoder_hidden = 1000;
  Index coarse_context_hidden = 1000;
  Index coarse_decoder_hidden = 2000;

  Gating encoder_gating = Gating::gru;
  Gating context_gating = Gating::gru;
  Gating decoder_gating = Gating::lstm;
  Gating prediction_gating = Gating::gru;
  Gating coarse_encoder_gating = Gating::gru;
  Gating coarse_context_gating = Gating::gru;
  Gating coarse_decoder_gating = Gating::lstm;

  bool bidirectional_encoder = false;
  bool coarse_bidirectional_encoder = true;

  double learning_rate = 0.0002;
  double clip_threshold = 1.0;
  double init_scale = 0.01;
  std::size_t bptt_tokens = 80;
  std::size_t batch_size = 80;
  std::size_t patience = 5;
  std::size_t validate_every = 5000;
  std::size_t max_steps = 1000000;
  std::uint64_t seed = 1234;

  /// Throws ConfigError naming the first offending key.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Applies one "key = value" assignment. Unknown keys and bad values throw
/// ConfigError.
void set_config_value(ModelConfig& config, std::string_view key, std::string_view value);

/// "key = value" lines; blank lines and lines starting with '#' are ignored.
ModelConfig parse_config(std::istream& in, ModelConfig base = {});
ModelConfig load_config(const std::filesystem::path& path, ModelConfig base = {});

/// All keys in a fixed order, values printed so that parsing them back gives
/// an identical config.
std::vector<std::pair<std::string, std::string>> config_entries(const ModelConfig& config);
void write_config(std::ostream& out, const ModelConfig& config);

}  // namespace mrrnn::models
