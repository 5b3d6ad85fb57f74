#pragma once

#include "mrrnn/neural/tensor.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mrrnn::generation {

using neural::Vector;

struct BeamHypothesis {
  std::vector<int> tokens;
  double log_likelihood = 0.0;
  double cost = 0.0;  // -log_likelihood / tokens.size()
  bool terminated = false;

  friend bool operator==(const BeamHypothesis&, const BeamHypothesis&) = default;
};

struct GenerationOptions {
  std::size_t beam_width = 5;
  std::size_t max_length = 50;
  bool forbid_unknown = false;
  /// At the last allowed position only end-of-utterance may be chosen, so
  /// every returned hypothesis is terminated.
  bool force_terminate = true;
  int end_token = 1;
  int unknown_token = 0;
};

struct BeamResult {
  std::vector<BeamHypothesis> hypotheses;  // ascending cost
  bool truncated = false;                  // no hypothesis terminated

  const BeamHypothesis& best() const { return hypotheses.front(); }
};

/// A view exposes `State initial()`, `Vector<double> log_probs(const State&)`
/// and `State advance(const State&, int token)`.
template <typename View>
concept ConditionalView = requires(const View& v, const typename View::State& s) {
  { v.initial() } -> std::convertible_to<typename View::State>;
  { v.log_probs(s) } -> std::convertible_to<Vector<double>>;
  { v.advance(s, 0) } -> std::convertible_to<typename View::State>;
};

inline bool ranks_before(double ll_a, const std::vector<int>& a, double ll_b, const std::vector<int>& b) {
  if (ll_a != ll_b) return ll_a > ll_b;
  return a < b;
}

inline void finish(BeamHypothesis& h) {
  h.cost = -h.log_likelihood / static_cast<double>(h.tokens.size());
}

/// Width-B search on raw log-likelihood. Each step keeps the best
/// B - |completed| extensions; those ending in the end token are retired to
/// the completed pool. Stops when the pool holds B hypotheses or at
/// `max_length`. Completed hypotheses are ranked by normalized cost; ties go to
/// the lexicographically smaller id sequence.
template <ConditionalView View>
BeamResult beam_search(const View& view, const GenerationOptions& options) {
  if (options.beam_width < 1) throw std::invalid_argument("beam width must be at least 1");
  if (options.max_length < 1) throw std::invalid_argument("max length must be at least 1");
  using State = typename View::State;
  struct Live {
    std::vector<int> tokens;
    double ll;
    State state;
  };
  struct Candidate {
    std::size_t parent;
    int token;
    double ll;
    std::vector<int> tokens;
  };

  std::vector<Live> live;
  live.push_back(Live{{}, 0.0, view.initial()});
  std::vector<BeamHypothesis> pool;

  for (std::size_t length = 1; length <= options.max_length && !live.empty(); ++length) {
    const bool last = options.force_terminate && length == options.max_length;
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Vector<double> lp = view.log_probs(live[i].state);
      for (int tok = 0; tok < static_cast<int>(lp.size()); ++tok) {
        if (last && tok != options.end_token) continue;
        if (options.forbid_unknown && tok == options.unknown_token) continue;
        std::vector<int> tokens = live[i].tokens;
        tokens.push_back(tok);
        candidates.push_back(Candidate{i, tok, live[i].ll + lp(tok), std::move(tokens)});
      }
    }
    const std::size_t keep = std::min(candidates.size(), options.beam_width - pool.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [](const Candidate& a, const Candidate& b) { return ranks_before(a.ll, a.tokens, b.ll, b.tokens); });
    std::vector<Live> next;
    for (std::size_t k = 0; k < keep; ++k) {
      Candidate& c = candidates[k];
      if (c.token == options.end_token) {
        BeamHypothesis h{std::move(c.tokens), c.ll, 0.0, true};
        finish(h);
        pool.push_back(std::move(h));
      } else {
        State s = view.advance(live[c.parent].state, c.token);
        next.push_back(Live{std::move(c.tokens), c.ll, std::move(s)});
      }
    }
    live = std::move(next);
    if (pool.size() >= options.beam_width) break;
  }

  BeamResult result;
  if (pool.empty()) {
    result.truncated = true;
    for (auto& l : live) {
      BeamHypothesis h{std::move(l.tokens), l.ll, 0.0, false};
      finish(h);
      pool.push_back(std::move(h));
    }
  }
  std::sort(pool.begin(), pool.end(), [](const BeamHypothesis& a, const BeamHypothesis& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.tokens < b.tokens;
  });
  if (pool.empty()) throw std::logic_error("beam search produced no hypotheses");
  result.hypotheses = std::move(pool);
  return result;
}

/// Arg-max decoding (lowest id on ties) until the end token or `max_length`.
template <ConditionalView View>
BeamHypothesis greedy_decode(const View& view, const GenerationOptions& options) {
  BeamHypothesis h;
  auto state = view.initial();
  for (std::size_t length = 1; length <= options.max_length; ++length) {
    const Vector<double> lp = view.log_probs(state);
    const bool last = options.force_terminate && length == options.max_length;
    int best = -1;
    for (int tok = 0; tok < static_cast<int>(lp.size()); ++tok) {
      if (last && tok != options.end_token) continue;
      if (options.forbid_unknown && tok == options.unknown_token) continue;
      if (best < 0 || lp(tok) > lp(best)) best = tok;
    }
    h.tokens.push_back(best);
    h.log_likelihood += lp(best);
    if (best == options.end_token) {
      h.terminated = true;
      break;
    }
    state = view.advance(state, best);
  }
  finish(h);
  return h;
}

}  // namespace mrrnn::generation
