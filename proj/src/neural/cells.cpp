#include "mrrnn/neural/cells.hpp"

#include "mrrnn/errors.hpp"

namespace mrrnn::neural {

Gating parse_gating(std::string_view text) {
  if (text == "gru") return Gating::gru;
  if (text == "lstm") return Gating::lstm;
  throw ConfigError("unknown gating '" + std::string(text) + "' (expected gru or lstm)");
}

std::string_view to_string(Gating g) { return g == Gating::gru ? "gru" : "lstm"; }

}  // namespace mrrnn::neural
