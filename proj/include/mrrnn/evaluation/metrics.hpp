#pragma once

#include "mrrnn/corpus/corpus.hpp"
#include "mrrnn/neural/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mrrnn::evaluation {

using corpus::CoarseSequence;
using Tokens = std::vector<std::string>;

enum class TokenClass { activity, entity, noun };

TokenClass parse_token_class(std::string_view text);
std::string_view to_string(TokenClass c);

/// activity: "*_activity" except none_activity; entity: "*_entity"; noun:
/// any token that is not a tense, flag or fallback token.
bool in_class(std::string_view token, TokenClass c);
Tokens class_tokens(const CoarseSequence& s, TokenClass c);

struct OverlapScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t predicted = 0;
  std::size_t truth = 0;
  std::size_t matched = 0;  // multiset intersection size
};

/// P = matched / |pred|, R = matched / |truth|, each 0 when its denominator is.
OverlapScore overlap_prf(const CoarseSequence& predicted, const CoarseSequence& truth, TokenClass c);

struct CorpusOverlap {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t scored = 0;
  std::size_t skipped = 0;  // responses whose truth has no token of the class
};

using CoarsePair = std::pair<CoarseSequence, CoarseSequence>;  // (predicted, truth)

/// Macro average over responses whose truth has at least one class token.
CorpusOverlap corpus_prf(const std::vector<CoarsePair>& pairs, TokenClass c);

/// Fraction of responses whose leading tense token matches the truth's.
double tense_accuracy(const std::vector<CoarsePair>& pairs);
/// Fraction of responses whose trailing cmd/no_cmd flag matches the truth's.
double command_accuracy(const std::vector<CoarsePair>& pairs);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  /// "word v1 ... vd" per line; every line must have the same dimension.
  static EmbeddingTable read(std::istream& in);
  static EmbeddingTable load(const std::filesystem::path& path);

  void add(const std::string& word, neural::Vector<double> v);
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  /// nullptr for out-of-vocabulary words.
  const neural::Vector<double>* find(std::string_view word) const;
  /// The word's vector, or zeros when it is missing.
  neural::Vector<double> lookup(std::string_view word) const;

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, neural::Vector<double>> vectors_;
};

/// Cosine similarity; 0 when either vector is zero.
double cosine(const neural::Vector<double>& a, const neural::Vector<double>& b);

/// Cosine between the mean word vectors.
double embedding_average(const Tokens& predicted, const Tokens& truth, const EmbeddingTable& table);
/// Mean over both directions of the average best cosine match of each
/// in-table word against the in-table words of the other side.
double embedding_greedy(const Tokens& predicted, const Tokens& truth, const EmbeddingTable& table);
/// Cosine between per-dimension extrema vectors: each entry is the value of
/// largest magnitude, the positive one on ties.
double embedding_extrema(const Tokens& predicted, const Tokens& truth, const EmbeddingTable& table);

/// Training cross-entropy in bits per token of an unsmoothed MLE unigram
/// (order 1) or bigram (order 2) model estimated on `sequences`. Special
/// coarse tokens are removed first; bigram contexts start with a
/// sentence-start symbol per sequence.
double ngram_bits_per_word(const std::vector<Tokens>& sequences, int order);

/// Ordered "metric -> value" pairs.
class MetricReport {
 public:
  void add(std::string name, double value);
  const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }
  double at(std::string_view name) const;
  /// "metric<TAB>value" with six decimals.
  void write(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

struct EvaluationInput {
  std::vector<Tokens> predicted;  // natural responses
  std::vector<Tokens> truth;
  std::vector<CoarseSequence> predicted_coarse;  // optional, aligned
  std::vector<CoarseSequence> truth_coarse;
};

/// P/R/F1 per class present in the coarse data plus tense and cmd accuracy,
/// and Average/Greedy/Extrema (means over responses) when `table` is given.
MetricReport evaluate(const EvaluationInput& input, const EmbeddingTable* table);

}  // namespace mrrnn::evaluation
