#include "mrrnn/models/train.hpp"

#include "mrrnn/errors.hpp"
#include "mrrnn/parallel.hpp"

#include <cinttypes>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

namespace mrrnn::models {
namespace {

template <typename Scalar>
double dialogue_gradient(const Layout& l, const ParameterSet<Scalar>& params, const EncodedDialogue& d,
                         std::size_t bptt_tokens, Scalar scale, GradientSet<Scalar>& grads) {
  Carry<Scalar> carry = initial_carry<Scalar>(l);
  double ll = 0.0;
  for (auto [begin, end] : truncation_segments(d, bptt_tokens)) {
    Tape<Scalar> t(params, true);
    SegmentTerms terms = forward_segment(t, l, d, begin, end, carry);
    std::vector<Var> all = std::move(terms.coarse);
    all.insert(all.end(), terms.natural.begin(), terms.natural.end());
    for (Var v : all) ll += static_cast<double>(t.scalar(v));
    Var loss = t.sum(all, -scale);
    t.backward(loss, grads);
  }
  return ll;
}

template <typename Scalar>
LikelihoodReport validate(const Layout& l, const ParameterSet<Scalar>& params,
                          const std::vector<EncodedDialogue>& valid, std::size_t threads) {
  std::vector<LikelihoodReport> parts(valid.size());
  parallel_for(valid.size(), threads, [&](std::size_t i) { parts[i] = log_likelihood(l, params, valid[i]); });
  LikelihoodReport total;
  for (const auto& r : parts) {
    total.coarse += r.coarse;
    total.natural += r.natural;
    total.coarse_tokens += r.coarse_tokens;
    total.natural_tokens += r.natural_tokens;
  }
  total.joint = total.coarse + total.natural;
  return total;
}

template <typename Scalar>
neural::AdamState<Scalar> cast_adam(const neural::AdamState<double>& s) {
  neural::AdamState<Scalar> out;
  out.options = s.options;
  out.step = s.step;
  out.first = s.first.template cast<Scalar>();
  out.second = s.second.template cast<Scalar>();
  return out;
}

template <typename Scalar>
neural::AdamState<double> widen_adam(const neural::AdamState<Scalar>& s) {
  neural::AdamState<double> out;
  out.options = s.options;
  out.step = s.step;
  out.first = s.first.template cast<double>();
  out.second = s.second.template cast<double>();
  return out;
}

void write_log(std::ostream& log, const TrainState& s, double train_loss, const LikelihoodReport& valid) {
  char line[256];
  std::snprintf(line, sizeof line,
                "step %" PRIu64 " train_loss %.9f valid_ll %.9f valid_ppl %.9f best_step %" PRIu64 " bad %zu\n",
                s.step, train_loss, valid.joint, perplexity(valid).joint, s.best_step, s.bad_count);
  log << line << std::flush;
}

template <typename Scalar>
TrainState train_impl(Model& model, TrainState state, const std::vector<EncodedDialogue>& train_set,
                      const std::vector<EncodedDialogue>& valid_set, const TrainOptions& options,
                      const TrainHooks& hooks) {
  const ModelConfig& c = model.config;
  const Layout& l = model.layout;
  ParameterSet<Scalar> params = model.params.template cast<Scalar>();
  neural::AdamState<Scalar> adam = cast_adam<Scalar>(state.adam);
  adam.options.learning_rate = c.learning_rate;
  std::vector<GradientSet<Scalar>> scratch;
  GradientSet<Scalar> total = params.zeros_like();

  auto publish = [&](const ParameterSet<Scalar>& p) {
    model.params = p.template cast<double>();
    state.adam = widen_adam(adam);
  };

  while (!state.stopped && state.step < c.max_steps) {
    const auto batch = batch_indices(c.seed, train_set.size(), c.batch_size, state.step);
    const double ll = batch_gradient(l, params, train_set, batch, c.bptt_tokens, options.threads, scratch, total);
    std::size_t tokens = 0;
    for (std::size_t i : batch) tokens += train_set[i].natural_tokens(0, train_set[i].size()) +
                                          train_set[i].coarse_tokens(0, train_set[i].size());
    if (!std::isfinite(ll) || !total.all_finite()) {
      throw NumericalError("non-finite loss or gradient at step " + std::to_string(state.step + 1));
    }
    neural::clip_gradients(total, static_cast<Scalar>(c.clip_threshold));
    neural::adam_update(params, total, adam);
    if (!params.all_finite()) {
      throw NumericalError("non-finite parameters after step " + std::to_string(state.step + 1));
    }
    ++state.step;
    state.loss_sum -= ll;
    state.loss_tokens += tokens;

    if (state.step % c.validate_every != 0 && state.step != c.max_steps) continue;

    const LikelihoodReport valid = validate(l, params, valid_set, options.threads);
    if (!std::isfinite(valid.joint)) {
      throw NumericalError("non-finite validation log-likelihood at step " + std::to_string(state.step));
    }
    const double train_loss = state.loss_tokens ? state.loss_sum / static_cast<double>(state.loss_tokens) : 0.0;
    state.loss_sum = 0.0;
    state.loss_tokens = 0;
    publish(params);
    if (valid.joint > state.best_valid) {
      state.best_valid = valid.joint;
      state.best_step = state.step;
      state.bad_count = 0;
      if (hooks.on_improvement) hooks.on_improvement(model, state);
    } else {
      ++state.bad_count;
      if (state.bad_count > c.patience) state.stopped = true;
    }
    if (hooks.log) write_log(*hooks.log, state, train_loss, valid);
    if (hooks.on_validation) hooks.on_validation(model, state);
  }
  publish(params);
  return state;
}

}  // namespace

Precision parse_precision(std::string_view text) {
  if (text == "single") return Precision::single;
  if (text == "double") return Precision::double_precision;
  throw ConfigError("unknown precision '" + std::string(text) + "' (expected single or double)");
}

TrainState initial_train_state(const Model& model) {
  TrainState s;
  s.adam = neural::AdamState<double>(model.params, neural::AdamOptions{model.config.learning_rate});
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> truncation_segments(const EncodedDialogue& d, std::size_t budget) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  std::size_t used = 0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    const std::size_t len = d.natural[n].size() + (d.coarse.empty() ? 0 : d.coarse[n].size());
    if (n > begin && used + len > budget) {
      out.emplace_back(begin, n);
      begin = n;
      used = 0;
    }
    used += len;
  }
  if (begin < d.size()) out.emplace_back(begin, d.size());
  return out;
}

std::vector<std::size_t> batch_indices(std::uint64_t seed, std::size_t corpus_size, std::size_t batch_size,
                                       std::uint64_t step) {
  if (corpus_size == 0) throw ResourceError("training corpus is empty");
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  std::uint64_t cached_epoch = ~std::uint64_t{0};
  std::vector<std::size_t> order(corpus_size);
  for (std::size_t k = 0; k < batch_size; ++k) {
    const std::uint64_t position = step * batch_size + k;
    const std::uint64_t epoch = position / corpus_size;
    if (epoch != cached_epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (epoch + 1)));
      for (std::size_t i = corpus_size; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
      cached_epoch = epoch;
    }
    out.push_back(order[position % corpus_size]);
  }
  return out;
}

template <typename Scalar>
double batch_gradient(const Layout& l, const ParameterSet<Scalar>& params, const std::vector<EncodedDialogue>& corpus,
                      const std::vector<std::size_t>& batch, std::size_t bptt_tokens, std::size_t threads,
                      std::vector<GradientSet<Scalar>>& scratch, GradientSet<Scalar>& total) {
  std::size_t tokens = 0;
  for (std::size_t i : batch) {
    check_dialogue(l, corpus.at(i));
    tokens += corpus[i].natural_tokens(0, corpus[i].size()) + corpus[i].coarse_tokens(0, corpus[i].size());
  }
  const Scalar scale = Scalar(1) / static_cast<Scalar>(tokens);
  if (scratch.size() < batch.size()) scratch.resize(batch.size(), params.zeros_like());
  std::vector<double> lls(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t k) {
    for (std::size_t p = 0; p < scratch[k].size(); ++p) scratch[k].at(p).setZero();
    lls[k] = dialogue_gradient(l, params, corpus[batch[k]], bptt_tokens, scale, scratch[k]);
  });
  for (std::size_t p = 0; p < total.size(); ++p) total.at(p).setZero();
  double ll = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    neural::add_into(total, scratch[k]);
    ll += lls[k];
  }
  return ll;
}

template double batch_gradient<double>(const Layout&, const ParameterSet<double>&, const std::vector<EncodedDialogue>&,
                                       const std::vector<std::size_t>&, std::size_t, std::size_t,
                                       std::vector<GradientSet<double>>&, GradientSet<double>&);
template double batch_gradient<float>(const Layout&, const ParameterSet<float>&, const std::vector<EncodedDialogue>&,
                                      const std::vector<std::size_t>&, std::size_t, std::size_t,
                                      std::vector<GradientSet<float>>&, GradientSet<float>&);

TrainState train(Model& model, TrainState state, const std::vector<EncodedDialogue>& train_set,
                 const std::vector<EncodedDialogue>& valid_set, const TrainOptions& options,
                 const TrainHooks& hooks) {
  if (train_set.empty()) throw ResourceError("training corpus is empty");
  if (valid_set.empty()) throw ResourceError("validation corpus is empty");
  model.config.validate();
  if (!state.adam.first.congruent(model.params)) state.adam = initial_train_state(model).adam;
  if (options.precision == Precision::single) {
    return train_impl<float>(model, std::move(state), train_set, valid_set, options, hooks);
  }
  return train_impl<double>(model, std::move(state), train_set, valid_set, options, hooks);
}

}  // namespace mrrnn::models
