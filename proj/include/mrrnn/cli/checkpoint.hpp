#pragma once

#include "mrrnn/models/train.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace mrrnn::cli {

inline constexpr std::string_view kCheckpointMagic = "mrrnn-checkpoint 1";

struct Checkpoint {
  models::Model model;
  std::optional<models::TrainState> train;  // present in resume checkpoints
};

/// Text header (magic, config, training counters, vocabularies) followed by
/// the binary tensor payload; optimizer moments are stored as extra tensors
/// named "adam.m/<param>" and "adam.v/<param>".
void write_checkpoint(std::ostream& out, const models::Model& model, const models::TrainState* state = nullptr);
Checkpoint read_checkpoint(std::istream& in);

/// Writes to a temporary file and renames, so readers never see a partial file.
void save_checkpoint(const std::filesystem::path& path, const models::Model& model,
                     const models::TrainState* state = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mrrnn::cli
