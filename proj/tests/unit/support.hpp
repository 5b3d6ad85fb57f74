#pragma once

#include "mrrnn/models/forward.hpp"

#include <filesystem>
#include <random>

namespace test {

inline const std::filesystem::path kSource = MRRNN_SOURCE_DIR;
inline const std::filesystem::path kResources = kSource / "resources";
inline const std::filesystem::path kFixtures = kSource / "tests" / "fixtures";

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mrrnn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void randomize(mrrnn::neural::ParameterSet<double>& params, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = params.at(i);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  }
}

/// Tiny config of the given kind with every size set to `dim`.
inline mrrnn::models::ModelConfig tiny_config(mrrnn::models::ModelKind kind, mrrnn::neural::Index dim = 3) {
  mrrnn::models::ModelConfig c;
  c.kind = kind;
  c.natural_embedding_dim = dim;
  c.coarse_embedding_dim = dim;
  c.encoder_hidden = dim;
  c.context_hidden = dim;
  c.decoder_hidden = dim;
  c.prediction_hidden = dim;
  c.coarse_encoder_hidden = dim;
  c.coarse_context_hidden = dim;
  c.coarse_decoder_hidden = dim;
  c.batch_size = 2;
  c.validate_every = 10;
  c.max_steps = 20;
  return c;
}

/// Random dialogue with `utterances` utterances of lengths in [1, max_len],
/// each ending in the end-of-utterance id.
inline mrrnn::models::EncodedDialogue random_dialogue(std::mt19937_64& rng, std::size_t utterances, int natural_vocab,
                                                      int coarse_vocab, int max_len, bool coarse) {
  mrrnn::models::EncodedDialogue d;
  std::uniform_int_distribution<int> len(1, max_len);
  auto seq = [&](int vocab) {
    std::uniform_int_distribution<int> tok(0, vocab - 1);
    std::vector<int> s(static_cast<std::size_t>(len(rng) - 1));
    for (auto& t : s) {
      do {
        t = tok(rng);
      } while (t == mrrnn::models::kEot);
    }
    s.push_back(mrrnn::models::kEot);
    return s;
  };
  for (std::size_t n = 0; n < utterances; ++n) {
    d.natural.push_back(seq(natural_vocab));
    if (coarse) d.coarse.push_back(seq(coarse_vocab));
  }
  return d;
}

}  // namespace test
