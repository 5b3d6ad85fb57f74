#pragma once

#include "mrrnn/models/forward.hpp"
#include "mrrnn/neural/optim.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace mrrnn::models {

enum class Precision { single, double_precision };

Precision parse_precision(std::string_view text);

/// Everything needed to continue a run exactly where it stopped.
struct TrainState {
  std::uint64_t step = 0;
  double best_valid = -std::numeric_limits<double>::infinity();
  std::uint64_t best_step = 0;
  std::size_t bad_count = 0;
  bool stopped = false;
  double loss_sum = 0.0;  // negative log-likelihood since the last validation
  std::size_t loss_tokens = 0;
  neural::AdamState<double> adam;
};

TrainState initial_train_state(const Model& model);

struct TrainHooks {
  std::ostream* log = nullptr;
  /// Called with the new best parameters after an improving validation.
  std::function<void(const Model&, const TrainState&)> on_improvement;
  /// Called after every validation with the current parameters.
  std::function<void(const Model&, const TrainState&)> on_validation;
};

struct TrainOptions {
  Precision precision = Precision::double_precision;
  std::size_t threads = 1;
};

/// Splits utterances [0, size) into consecutive runs whose natural plus coarse
/// token count stays within `budget`; an utterance longer than the budget
/// forms a run of its own.
std::vector<std::pair<std::size_t, std::size_t>> truncation_segments(const EncodedDialogue& d,
                                                                     std::size_t budget);

/// Dialogue indices of the batch used at `step` (0-based): consecutive slices
/// of a stream of per-epoch shuffles, each shuffle seeded by (seed, epoch).
std::vector<std::size_t> batch_indices(std::uint64_t seed, std::size_t corpus_size, std::size_t batch_size,
                                       std::uint64_t step);

/// Minibatch Adam on the per-token negative joint log-likelihood with
/// truncated backpropagation, global-norm clipping and early stopping on the
/// validation joint log-likelihood. Runs until `config.max_steps` or until
/// more than `config.patience` consecutive validations fail to improve.
/// `model` holds the last parameters on return.
TrainState train(Model& model, TrainState state, const std::vector<EncodedDialogue>& train_set,
                 const std::vector<EncodedDialogue>& valid_set, const TrainOptions& options = {},
                 const TrainHooks& hooks = {});

/// Gradient of the batch loss, exactly as one training step computes it.
/// Returns the summed log-likelihood of the batch.
template <typename Scalar>
double batch_gradient(const Layout& l, const ParameterSet<Scalar>& params, const std::vector<EncodedDialogue>& corpus,
                      const std::vector<std::size_t>& batch, std::size_t bptt_tokens, std::size_t threads,
                      std::vector<GradientSet<Scalar>>& scratch, GradientSet<Scalar>& total);

}  // namespace mrrnn::models
