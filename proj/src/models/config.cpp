#include "mrrnn/models/config.hpp"

#include "mrrnn/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <variant>

namespace mrrnn::models {
namespace {

using Field = std::variant<ModelKind ModelConfig::*, std::size_t ModelConfig::*, Index ModelConfig::*,
                           Gating ModelConfig::*, bool ModelConfig::*, double ModelConfig::*>;
static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed shares the size_t field kind");

const std::vector<std::pair<std::string_view, Field>>& fields() {
  static const std::vector<std::pair<std::string_view, Field>> table{
      {"kind", &ModelConfig::kind},
      {"natural_vocab_size", &ModelConfig::natural_vocab_size},
      {"coarse_vocab_size", &ModelConfig::coarse_vocab_size},
      {"natural_embedding_dim", &ModelConfig::natural_embedding_dim},
      {"coarse_embedding_dim", &ModelConfig::coarse_embedding_dim},
      {"encoder_hidden", &ModelConfig::encoder_hidden},
      {"context_hidden", &ModelConfig::context_hidden},
      {"decoder_hidden", &ModelConfig::decoder_hidden},
      {"prediction_hidden", &ModelConfig::prediction_hidden},
      {"coarse_encoder_hidden", &ModelConfig::coarse_encoder_hidden},
      {"coarse_context_hidden", &ModelConfig::coarse_context_hidden},
      {"coarse_decoder_hidden", &ModelConfig::coarse_decoder_hidden},
      {"encoder_gating", &ModelConfig::encoder_gating},
      {"context_gating", &ModelConfig::context_gating},
      {"decoder_gating", &ModelConfig::decoder_gating},
      {"prediction_gating", &ModelConfig::prediction_gating},
      {"coarse_encoder_gating", &ModelConfig::coarse_encoder_gating},
      {"coarse_context_gating", &ModelConfig::coarse_context_gating},
      {"coarse_decoder_gating", &ModelConfig::coarse_decoder_gating},
      {"bidirectional_encoder", &ModelConfig::bidirectional_encoder},
      {"coarse_bidirectional_encoder", &ModelConfig::coarse_bidirectional_encoder},
      {"learning_rate", &ModelConfig::learning_rate},
      {"clip_threshold", &ModelConfig::clip_threshold},
      {"init_scale", &ModelConfig::init_scale},
      {"bptt_tokens", &ModelConfig::bptt_tokens},
      {"batch_size", &ModelConfig::batch_size},
      {"patience", &ModelConfig::patience},
      {"validate_every", &ModelConfig::validate_every},
      {"max_steps", &ModelConfig::max_steps},
      {"seed", &ModelConfig::seed},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "': expected an integer, got '" + std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "': expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ModelKind parse_model_kind(std::string_view text) {
  if (text == "rnnlm") return ModelKind::rnnlm;
  if (text == "hred") return ModelKind::hred;
  if (text == "hred_actent") return ModelKind::hred_actent;
  if (text == "mrrnn") return ModelKind::mrrnn;
  throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::rnnlm: return "rnnlm";
    case ModelKind::hred: return "hred";
    case ModelKind::hred_actent: return "hred_actent";
    case ModelKind::mrrnn: return "mrrnn";
  }
  return "?";
}

void ModelConfig::validate() const {
  auto positive = [](std::string_view key, auto v) {
    if (!(v > 0)) throw ConfigError("config key '" + std::string(key) + "' must be positive");
  };
  positive("natural_embedding_dim", natural_embedding_dim);
  positive("decoder_hidden", decoder_hidden);
  positive("learning_rate", learning_rate);
  positive("clip_threshold", clip_threshold);
  positive("init_scale", init_scale);
  positive("bptt_tokens", bptt_tokens);
  positive("batch_size", batch_size);
  positive("validate_every", validate_every);
  if (natural_vocab_size < 4) throw ConfigError("config key 'natural_vocab_size' must be at least 4");
  if (kind != ModelKind::rnnlm) {
    positive("encoder_hidden", encoder_hidden);
    positive("context_hidden", context_hidden);
  }
  if (uses_coarse(kind)) {
    positive("prediction_hidden", prediction_hidden);
    positive("coarse_embedding_dim", coarse_embedding_dim);
    if (coarse_vocab_size < 4) throw ConfigError("config key 'coarse_vocab_size' must be at least 4");
  }
  if (kind == ModelKind::mrrnn) {
    positive("coarse_encoder_hidden", coarse_encoder_hidden);
    positive("coarse_context_hidden", coarse_context_hidden);
    positive("coarse_decoder_hidden", coarse_decoder_hidden);
  }
}

void set_config_value(ModelConfig& config, std::string_view key, std::string_view value) {
  for (const auto& [name, field] : fields()) {
    if (name != key) continue;
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(config.*member)>;
          if constexpr (std::is_same_v<T, ModelKind>) {
            config.*member = parse_model_kind(value);
          } else if constexpr (std::is_same_v<T, Gating>) {
            try {
              config.*member = neural::parse_gating(value);
            } catch (const ConfigError&) {
              throw ConfigError("config key '" + std::string(key) + "': expected gru or lstm, got '" +
                                std::string(value) + "'");
            }
          } else if constexpr (std::is_same_v<T, bool>) {
            if (value == "true" || value == "1") {
              config.*member = true;
            } else if (value == "false" || value == "0") {
              config.*member = false;
            } else {
              throw ConfigError("config key '" + std::string(key) + "': expected true or false");
            }
          } else if constexpr (std::is_same_v<T, double>) {
            config.*member = parse_real(key, value);
          } else {
            config.*member = parse_integer<T>(key, value);
          }
        },
        field);
    return;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

ModelConfig parse_config(std::istream& in, ModelConfig base) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(n) + ": expected 'key = value'");
    }
    set_config_value(base, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return base;
}

ModelConfig load_config(const std::filesystem::path& path, ModelConfig base) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open config " + path.string());
  return parse_config(in, std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const ModelConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : fields()) {
    std::string value = std::visit(
        [&](auto member) -> std::string {
          const auto& v = config.*member;
          using T = std::remove_cv_t<std::remove_reference_t<decltype(v)>>;
          if constexpr (std::is_same_v<T, ModelKind>) {
            return std::string(to_string(v));
          } else if constexpr (std::is_same_v<T, Gating>) {
            return std::string(neural::to_string(v));
          } else if constexpr (std::is_same_v<T, bool>) {
            return v ? "true" : "false";
          } else if constexpr (std::is_same_v<T, double>) {
            return format_real(v);
          } else {
            return std::to_string(v);
          }
        },
        field);
    out.emplace_back(std::string(name), std::move(value));
  }
  return out;
}

void write_config(std::ostream& out, const ModelConfig& config) {
  for (const auto& [k, v] : config_entries(config)) out << k << " = " << v << '\n';
}

}  // namespace mrrnn::models
