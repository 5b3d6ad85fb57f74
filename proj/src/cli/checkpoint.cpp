#include "mrrnn/cli/checkpoint.hpp"

#include "mrrnn/errors.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mrrnn::cli {
namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string next_line(std::istream& in, std::string_view what) {
  std::string line;
  if (!std::getline(in, line)) throw ResourceError("checkpoint truncated before " + std::string(what));
  return line;
}

/// Reads "key value" and returns value.
std::string field(std::istream& in, std::string_view key) {
  const std::string line = next_line(in, key);
  if (line.size() <= key.size() || line.compare(0, key.size(), key) != 0 || line[key.size()] != ' ') {
    throw ResourceError("checkpoint: expected '" + std::string(key) + "', got '" + line + "'");
  }
  return line.substr(key.size() + 1);
}

template <typename T>
T integer_field(std::istream& in, std::string_view key) {
  const std::string v = field(in, key);
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<T>(x);
  } catch (const std::exception&) {
    throw ResourceError("checkpoint: bad value for " + std::string(key));
  }
}

double real_field(std::istream& in, std::string_view key) {
  const std::string v = field(in, key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size()) throw ResourceError("checkpoint: bad value for " + std::string(key));
  return x;
}

corpus::Vocabulary read_vocabulary(std::istream& in, std::string_view key) {
  const std::size_t n = integer_field<std::size_t>(in, key);
  std::string text;
  for (std::size_t i = 0; i < n; ++i) text += next_line(in, key) + '\n';
  std::istringstream vs(text);
  return corpus::Vocabulary::read(vs);
}

void write_vocabulary(std::ostream& out, std::string_view key, const corpus::Vocabulary& v) {
  out << key << ' ' << v.size() << '\n';
  v.write(out);
}

}  // namespace

void write_checkpoint(std::ostream& out, const models::Model& model, const models::TrainState* state) {
  out << kCheckpointMagic << '\n';
  const auto entries = models::config_entries(model.config);
  out << "config " << entries.size() << '\n';
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
  write_vocabulary(out, "natural_vocabulary", model.natural_vocab);
  write_vocabulary(out, "coarse_vocabulary", model.coarse_vocab);
  out << "natural_size " << model.layout.natural.vocab << '\n';
  out << "coarse_size " << model.layout.coarse_vocab << '\n';
  out << "train " << (state ? 1 : 0) << '\n';
  neural::ParameterSet<double> payload = model.params;
  if (state) {
    out << "step " << state->step << '\n';
    out << "best_valid " << format_real(state->best_valid) << '\n';
    out << "best_step " << state->best_step << '\n';
    out << "bad_count " << state->bad_count << '\n';
    out << "stopped " << (state->stopped ? 1 : 0) << '\n';
    out << "loss_sum " << format_real(state->loss_sum) << '\n';
    out << "loss_tokens " << state->loss_tokens << '\n';
    out << "adam_step " << state->adam.step << '\n';
    for (std::size_t i = 0; i < state->adam.first.size(); ++i) {
      auto id = payload.add("adam.m/" + state->adam.first.name(i), state->adam.first.at(i).rows(),
                            state->adam.first.at(i).cols(), state->adam.first.rank(i));
      payload[id] = state->adam.first.at(i);
    }
    for (std::size_t i = 0; i < state->adam.second.size(); ++i) {
      auto id = payload.add("adam.v/" + state->adam.second.name(i), state->adam.second.at(i).rows(),
                            state->adam.second.at(i).cols(), state->adam.second.rank(i));
      payload[id] = state->adam.second.at(i);
    }
  }
  out << "payload\n";
  neural::write_tensors(out, payload);
}

Checkpoint read_checkpoint(std::istream& in) {
  if (next_line(in, "magic") != kCheckpointMagic) throw ResourceError("not a checkpoint (bad magic line)");
  Checkpoint cp;
  models::ModelConfig config;
  const std::size_t n = integer_field<std::size_t>(in, "config");
  std::string text;
  for (std::size_t i = 0; i < n; ++i) text += next_line(in, "config") + '\n';
  std::istringstream cs(text);
  try {
    config = models::parse_config(cs);
  } catch (const ConfigError& e) {
    throw ResourceError(std::string("checkpoint config: ") + e.what());
  }
  corpus::Vocabulary natural = read_vocabulary(in, "natural_vocabulary");
  corpus::Vocabulary coarse = read_vocabulary(in, "coarse_vocabulary");
  const auto natural_size = integer_field<neural::Index>(in, "natural_size");
  const auto coarse_size = integer_field<neural::Index>(in, "coarse_size");
  const bool has_state = integer_field<int>(in, "train") != 0;
  models::TrainState state;
  if (has_state) {
    state.step = integer_field<std::uint64_t>(in, "step");
    state.best_valid = real_field(in, "best_valid");
    state.best_step = integer_field<std::uint64_t>(in, "best_step");
    state.bad_count = integer_field<std::size_t>(in, "bad_count");
    state.stopped = integer_field<int>(in, "stopped") != 0;
    state.loss_sum = real_field(in, "loss_sum");
    state.loss_tokens = integer_field<std::size_t>(in, "loss_tokens");
    state.adam.step = integer_field<std::int64_t>(in, "adam_step");
  }
  if (next_line(in, "payload") != "payload") throw ResourceError("checkpoint: missing payload marker");
  const neural::ParameterSet<double> payload = neural::read_tensors(in);

  cp.model.config = config;
  cp.model.layout = models::register_parameters(config, natural_size, coarse_size, cp.model.params);
  cp.model.natural_vocab = std::move(natural);
  cp.model.coarse_vocab = std::move(coarse);
  const std::size_t count = cp.model.params.size();
  if (payload.size() != (has_state ? 3 * count : count)) {
    throw ResourceError("checkpoint payload has " + std::to_string(payload.size()) + " tensors, expected " +
                        std::to_string(has_state ? 3 * count : count));
  }
  auto take = [&](std::size_t at, const std::string& name, neural::Matrix<double>& dst) {
    if (payload.name(at) != name || payload.at(at).rows() != dst.rows() || payload.at(at).cols() != dst.cols()) {
      throw ResourceError("checkpoint tensor " + std::to_string(at) + " ('" + payload.name(at) +
                          "') does not match parameter '" + name + "'");
    }
    dst = payload.at(at);
  };
  for (std::size_t i = 0; i < count; ++i) take(i, cp.model.params.name(i), cp.model.params.at(i));
  if (has_state) {
    state.adam.options = neural::AdamOptions{config.learning_rate};
    state.adam.first = cp.model.params.zeros_like();
    state.adam.second = cp.model.params.zeros_like();
    for (std::size_t i = 0; i < count; ++i) {
      take(count + i, "adam.m/" + cp.model.params.name(i), state.adam.first.at(i));
      take(2 * count + i, "adam.v/" + cp.model.params.name(i), state.adam.second.at(i));
    }
    cp.train = std::move(state);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ResourceError("checkpoint has trailing bytes");
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const models::Model& model, const models::TrainState* state) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write checkpoint " + tmp.string());
    write_checkpoint(out, model, state);
    if (!out) throw ResourceError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace mrrnn::cli
