#pragma once

// Independent brute-force oracles shared by the unit and acceptance tests.

#include "mrrnn/generation/beam.hpp"
#include "mrrnn/neural/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace test::oracle {

using mrrnn::generation::BeamHypothesis;
using mrrnn::generation::GenerationOptions;
using mrrnn::generation::finish;
using Vec = mrrnn::neural::Vector<double>;
using Words = std::vector<std::string>;

/// Every hypothesis the search space admits, scored from the view.
template <typename View>
std::vector<BeamHypothesis> enumerate(const View& view, const GenerationOptions& o) {
  std::vector<BeamHypothesis> out;
  std::function<void(typename View::State, std::vector<int>, double)> go = [&](auto state, std::vector<int> prefix,
                                                                             double ll) {
    const Vec lp = view.log_probs(state);
    const bool last = o.force_terminate && prefix.size() + 1 == o.max_length;
    for (int t = 0; t < lp.size(); ++t) {
      if (last && t != o.end_token) continue;
      if (o.forbid_unknown && t == o.unknown_token) continue;
      std::vector<int> tokens = prefix;
      tokens.push_back(t);
      if (t == o.end_token) {
        BeamHypothesis h{tokens, ll + lp(t), 0.0, true};
        finish(h);
        out.push_back(h);
      } else if (tokens.size() < o.max_length) {
        go(view.advance(state, t), tokens, ll + lp(t));
      }
    }
  };
  go(view.initial(), {}, 0.0);
  return out;
}

inline BeamHypothesis exhaustive_best(const std::vector<BeamHypothesis>& all) {
  BeamHypothesis best = all.front();
  for (const auto& h : all) {
    if (h.cost < best.cost || (h.cost == best.cost && h.tokens < best.tokens)) best = h;
  }
  return best;
}

// ---- metrics ---------------------------------------------------------------

/// Matched count by striking out one equal element of a copy per hit.
inline std::size_t strike_out_matches(const Words& pred, const Words& truth) {
  Words pool = truth;
  std::size_t hits = 0;
  for (const auto& p : pred) {
    for (auto it = pool.begin(); it != pool.end(); ++it) {
      if (*it == p) {
        pool.erase(it);
        ++hits;
        break;
      }
    }
  }
  return hits;
}

struct Prf {
  double p, r, f;
};

inline Prf prf(const Words& pred, const Words& truth) {
  const double m = static_cast<double>(strike_out_matches(pred, truth));
  const double p = pred.empty() ? 0.0 : m / static_cast<double>(pred.size());
  const double r = truth.empty() ? 0.0 : m / static_cast<double>(truth.size());
  return {p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0};
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += a(k) * b(k);
  return s;
}

inline double cos(const Vec& a, const Vec& b) {
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  if (na == 0 || nb == 0) return 0.0;
  return dot(a, b) / (na * nb);
}

using Table = std::map<std::string, Vec>;

inline Vec mean_vector(const Words& w, const Table& t, Eigen::Index dim) {
  Vec s = Vec::Zero(dim);
  if (w.empty()) return s;
  for (const auto& x : w) {
    auto it = t.find(x);
    if (it != t.end()) s += it->second;
  }
  return s / static_cast<double>(w.size());
}

inline double average(const Words& a, const Words& b, const Table& t, Eigen::Index dim) {
  return cos(mean_vector(a, t, dim), mean_vector(b, t, dim));
}

inline double greedy(const Words& a, const Words& b, const Table& t) {
  std::vector<Vec> va, vb;
  for (const auto& x : a)
    if (t.count(x)) va.push_back(t.at(x));
  for (const auto& x : b)
    if (t.count(x)) vb.push_back(t.at(x));
  if (va.empty() || vb.empty()) return 0.0;
  // All-pairs cosine table, then row and column maxima.
  std::vector<std::vector<double>> c(va.size(), std::vector<double>(vb.size()));
  for (std::size_t i = 0; i < va.size(); ++i)
    for (std::size_t j = 0; j < vb.size(); ++j) c[i][j] = cos(va[i], vb[j]);
  double rows = 0, cols = 0;
  for (std::size_t i = 0; i < va.size(); ++i) rows += *std::max_element(c[i].begin(), c[i].end());
  for (std::size_t j = 0; j < vb.size(); ++j) {
    double m = c[0][j];
    for (std::size_t i = 1; i < va.size(); ++i) m = std::max(m, c[i][j]);
    cols += m;
  }
  return (rows / static_cast<double>(va.size()) + cols / static_cast<double>(vb.size())) / 2;
}

inline Vec extrema_vector(const Words& w, const Table& t, Eigen::Index dim) {
  Vec e(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    double hi = 0, lo = 0;  // largest and smallest entries seen, starting from zero
    for (const auto& x : w) {
      auto it = t.find(x);
      if (it == t.end()) continue;
      hi = std::max(hi, it->second(k));
      lo = std::min(lo, it->second(k));
    }
    e(k) = hi >= -lo ? hi : lo;
  }
  return e;
}

inline double extrema(const Words& a, const Words& b, const Table& t, Eigen::Index dim) {
  return cos(extrema_vector(a, t, dim), extrema_vector(b, t, dim));
}

/// Training cross-entropy in bits from explicit count tables.
inline double unigram_bits(const std::vector<Words>& corpus) {
  std::map<std::string, double> counts;
  double n = 0;
  for (const auto& s : corpus)
    for (const auto& w : s) {
      counts[w] += 1;
      n += 1;
    }
  double bits = 0;
  for (const auto& s : corpus)
    for (const auto& w : s) bits -= std::log2(counts[w] / n);
  return bits / n;
}

inline double bigram_bits(const std::vector<Words>& corpus) {
  std::map<std::string, std::map<std::string, double>> counts;
  double n = 0;
  for (const auto& s : corpus) {
    std::string prev = "<start>";
    for (const auto& w : s) {
      counts["|" + prev][w] += 1;
      prev = w;
      n += 1;
    }
  }
  double bits = 0;
  for (const auto& s : corpus) {
    std::string prev = "<start>";
    for (const auto& w : s) {
      const auto& row = counts["|" + prev];
      double total = 0;
      for (const auto& [k, c] : row) total += c;
      bits -= std::log2(row.at(w) / total);
      prev = w;
    }
  }
  return bits / n;
}

}  // namespace test::oracle
