#include "mrrnn/evaluation/metrics.hpp"

#include "mrrnn/errors.hpp"
#include "mrrnn/extraction/extraction.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mrrnn::evaluation {
namespace {

bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

std::size_t multiset_intersection(const Tokens& a, const Tokens& b) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : a) ++counts[t];
  std::size_t n = 0;
  for (const auto& t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++n;
    }
  }
  return n;
}

std::string leading_tense(const CoarseSequence& s) {
  return !s.tokens.empty() && extraction::is_tense_token(s.tokens.front()) ? s.tokens.front() : std::string();
}

std::string trailing_flag(const CoarseSequence& s) {
  if (s.tokens.empty()) return {};
  const std::string& last = s.tokens.back();
  return last == extraction::kCmd || last == extraction::kNoCmd ? last : std::string();
}

void require_pairs(const std::vector<CoarsePair>& pairs) {
  if (pairs.empty()) throw ResourceError("accuracy over an empty set of responses");
}

}  // namespace

TokenClass parse_token_class(std::string_view text) {
  if (text == "activity") return TokenClass::activity;
  if (text == "entity") return TokenClass::entity;
  if (text == "noun") return TokenClass::noun;
  throw ConfigError("unknown token class '" + std::string(text) + "'");
}

std::string_view to_string(TokenClass c) {
  switch (c) {
    case TokenClass::activity: return "activity";
    case TokenClass::entity: return "entity";
    case TokenClass::noun: return "noun";
  }
  return "?";
}

bool in_class(std::string_view token, TokenClass c) {
  switch (c) {
    case TokenClass::activity: return ends_with(token, "_activity") && token != extraction::kNoneActivity;
    case TokenClass::entity: return ends_with(token, "_entity");
    case TokenClass::noun: return !extraction::is_special_coarse_token(token);
  }
  return false;
}

Tokens class_tokens(const CoarseSequence& s, TokenClass c) {
  Tokens out;
  for (const auto& t : s.tokens) {
    if (in_class(t, c)) out.push_back(t);
  }
  return out;
}

OverlapScore overlap_prf(const CoarseSequence& predicted, const CoarseSequence& truth, TokenClass c) {
  const Tokens p = class_tokens(predicted, c);
  const Tokens t = class_tokens(truth, c);
  OverlapScore s;
  s.predicted = p.size();
  s.truth = t.size();
  s.matched = multiset_intersection(p, t);
  if (s.predicted) s.precision = static_cast<double>(s.matched) / static_cast<double>(s.predicted);
  if (s.truth) s.recall = static_cast<double>(s.matched) / static_cast<double>(s.truth);
  if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

CorpusOverlap corpus_prf(const std::vector<CoarsePair>& pairs, TokenClass c) {
  CorpusOverlap out;
  for (const auto& [pred, truth] : pairs) {
    const OverlapScore s = overlap_prf(pred, truth, c);
    if (s.truth == 0) {
      ++out.skipped;
      continue;
    }
    out.precision += s.precision;
    out.recall += s.recall;
    out.f1 += s.f1;
    ++out.scored;
  }
  if (out.scored) {
    const double n = static_cast<double>(out.scored);
    out.precision /= n;
    out.recall /= n;
    out.f1 /= n;
  }
  return out;
}

double tense_accuracy(const std::vector<CoarsePair>& pairs) {
  require_pairs(pairs);
  std::size_t hits = 0;
  for (const auto& [pred, truth] : pairs) hits += leading_tense(pred) == leading_tense(truth) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double command_accuracy(const std::vector<CoarsePair>& pairs) {
  require_pairs(pairs);
  std::size_t hits = 0;
  for (const auto& [pred, truth] : pairs) hits += trailing_flag(pred) == trailing_flag(truth) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

EmbeddingTable EmbeddingTable::read(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto fields = corpus::split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) throw ResourceError("embedding line " + std::to_string(n) + ": no vector");
    neural::Vector<double> v(static_cast<neural::Index>(fields.size() - 1));
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::size_t used = 0;
      try {
        v(static_cast<neural::Index>(i - 1)) = std::stod(fields[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[i].size()) {
        throw ResourceError("embedding line " + std::to_string(n) + ": bad value '" + fields[i] + "'");
      }
    }
    if (table.dimension_ == 0) table.dimension_ = static_cast<std::size_t>(v.size());
    if (static_cast<std::size_t>(v.size()) != table.dimension_) {
      throw ResourceError("embedding line " + std::to_string(n) + ": dimension " + std::to_string(v.size()) +
                          ", expected " + std::to_string(table.dimension_));
    }
    table.vectors_[fields[0]] = std::move(v);
  }
  if (table.vectors_.empty()) throw ResourceError("embedding table is empty");
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open embedding table " + path.string());
  return read(in);
}

void EmbeddingTable::add(const std::string& word, neural::Vector<double> v) {
  if (dimension_ == 0) dimension_ = static_cast<std::size_t>(v.size());
  if (static_cast<std::size_t>(v.size()) != dimension_) {
    throw std::invalid_argument("embedding for '" + word + "' has the wrong dimension");
  }
  vectors_[word] = std::move(v);
}

const neural::Vector<double>* EmbeddingTable::find(std::string_view word) const {
  auto it = vectors_.find(std::string(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

neural::Vector<double> EmbeddingTable::lookup(std::string_view word) const {
  const auto* v = find(word);
  return v ? *v : neural::Vector<double>::Zero(static_cast<neural::Index>(dimension_));
}

double cosine(const neural::Vector<double>& a, const neural::Vector<double>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

double embedding_average(const Tokens& predicted, const Tokens& truth, const EmbeddingTable& table) {
  auto mean = [&](const Tokens& tokens) {
    neural::Vector<double> m = neural::Vector<double>::Zero(static_cast<neural::Index>(table.dimension()));
    for (const auto& w : tokens) m += table.lookup(w);
    if (!tokens.empty()) m /= static_cast<double>(tokens.size());
    return m;
  };
  return cosine(mean(predicted), mean(truth));
}

double embedding_greedy(const Tokens& predicted, const Tokens& truth, const EmbeddingTable& table) {
  auto known = [&](const Tokens& tokens) {
    std::vector<const neural::Vector<double>*> out;
    for (const auto& w : tokens) {
      if (const auto* v = table.find(w)) out.push_back(v);
    }
    return out;
  };
  const auto a = known(predicted);
  const auto b = known(truth);
  if (a.empty() || b.empty()) return 0.0;
  auto direction = [](const auto& from, const auto& to) {
    double total = 0.0;
    for (const auto* x : from) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto* y : to) best = std::max(best, cosine(*x, *y));
      total += best;
    }
    return total / static_cast<double>(from.size());
  };
  return (direction(a, b) + direction(b, a)) / 2.0;
}

double embedding_extrema(const Tokens& predicted, const Tokens& truth, const EmbeddingTable& table) {
  auto extrema = [&](const Tokens& tokens) {
    neural::Vector<double> e = neural::Vector<double>::Zero(static_cast<neural::Index>(table.dimension()));
    for (const auto& w : tokens) {
      const auto* v = table.find(w);
      if (!v) continue;
      for (neural::Index k = 0; k < e.size(); ++k) {
        const double x = (*v)(k);
        if (std::abs(x) > std::abs(e(k)) || (std::abs(x) == std::abs(e(k)) && x > e(k))) e(k) = x;
      }
    }
    return e;
  };
  return cosine(extrema(predicted), extrema(truth));
}

double ngram_bits_per_word(const std::vector<Tokens>& sequences, int order) {
  if (order != 1 && order != 2) throw ConfigError("n-gram order must be 1 or 2");
  std::vector<Tokens> kept;
  std::size_t total = 0;
  for (const auto& s : sequences) {
    Tokens k;
    for (const auto& t : s) {
      if (!extraction::is_special_coarse_token(t)) k.push_back(t);
    }
    total += k.size();
    kept.push_back(std::move(k));
  }
  if (total == 0) throw ResourceError("n-gram model over an empty corpus");
  const double n = static_cast<double>(total);
  double bits = 0.0;
  if (order == 1) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : kept) {
      for (const auto& t : s) ++counts[t];
    }
    for (const auto& [w, c] : counts) bits -= static_cast<double>(c) * std::log2(static_cast<double>(c) / n);
    return bits / n;
  }
  static const std::string start = "\x01<s>";
  std::map<std::pair<std::string, std::string>, std::size_t> pairs;
  std::map<std::string, std::size_t> contexts;
  for (const auto& s : kept) {
    const std::string* prev = &start;
    for (const auto& t : s) {
      ++pairs[{*prev, t}];
      ++contexts[*prev];
      prev = &t;
    }
  }
  for (const auto& [key, c] : pairs) {
    bits -= static_cast<double>(c) * std::log2(static_cast<double>(c) / static_cast<double>(contexts[key.first]));
  }
  return bits / n;
}

void MetricReport::add(std::string name, double value) { entries_.emplace_back(std::move(name), value); }

double MetricReport::at(std::string_view name) const {
  for (const auto& [k, v] : entries_) {
    if (k == name) return v;
  }
  throw std::out_of_range("no metric " + std::string(name));
}

void MetricReport::write(std::ostream& out) const {
  char buf[64];
  for (const auto& [k, v] : entries_) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    out << k << '\t' << buf << '\n';
  }
}

MetricReport evaluate(const EvaluationInput& input, const EmbeddingTable* table) {
  if (input.predicted.size() != input.truth.size()) {
    throw AlignmentError("prediction file has " + std::to_string(input.predicted.size()) + " responses, truth has " +
                         std::to_string(input.truth.size()));
  }
  if (input.predicted_coarse.size() != input.truth_coarse.size()) {
    throw AlignmentError("predicted and truth coarse sequences differ in count");
  }
  MetricReport report;
  if (!input.truth_coarse.empty()) {
    std::vector<CoarsePair> pairs;
    bool actent = false;
    for (std::size_t i = 0; i < input.truth_coarse.size(); ++i) {
      pairs.emplace_back(input.predicted_coarse[i], input.truth_coarse[i]);
      actent = actent || !trailing_flag(input.truth_coarse[i]).empty();
    }
    const std::vector<TokenClass> classes =
        actent ? std::vector<TokenClass>{TokenClass::activity, TokenClass::entity} : std::vector<TokenClass>{TokenClass::noun};
    for (TokenClass c : classes) {
      const CorpusOverlap o = corpus_prf(pairs, c);
      const std::string name(to_string(c));
      report.add(name + "_precision", o.precision);
      report.add(name + "_recall", o.recall);
      report.add(name + "_f1", o.f1);
      report.add(name + "_skipped", static_cast<double>(o.skipped));
    }
    report.add("tense_accuracy", tense_accuracy(pairs));
    if (actent) report.add("cmd_accuracy", command_accuracy(pairs));
  }
  if (table) {
    if (input.predicted.empty()) throw ResourceError("no responses to compare");
    double avg = 0, greedy = 0, extrema = 0;
    for (std::size_t i = 0; i < input.predicted.size(); ++i) {
      avg += embedding_average(input.predicted[i], input.truth[i], *table);
      greedy += embedding_greedy(input.predicted[i], input.truth[i], *table);
      extrema += embedding_extrema(input.predicted[i], input.truth[i], *table);
    }
    const double n = static_cast<double>(input.predicted.size());
    report.add("embedding_average", avg / n);
    report.add("embedding_greedy", greedy / n);
    report.add("embedding_extrema", extrema / n);
  }
  return report;
}

}  // namespace mrrnn::evaluation
