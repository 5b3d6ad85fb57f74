#pragma once

#include "mrrnn/corpus/corpus.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mrrnn::corpus {

enum class Level { natural, coarse };

inline constexpr std::size_t kNaturalVocabularySize = 20000;
inline constexpr std::size_t kCoarseVocabularySize = 10000;

/// Dense id assignment. Ids 0..2 are reserved for the unknown token,
/// end-of-utterance and padding; the rest are ordered by descending corpus
/// frequency with ties broken by surface.
class Vocabulary {
 public:
  static constexpr int kUnknown = 0;
  static constexpr int kEndOfUtterance = 1;
  static constexpr int kPadding = 2;
  static constexpr std::size_t kReserved = 3;

  static constexpr std::string_view kUnknownSurface = "<unk>";
  static constexpr std::string_view kPaddingSurface = "<pad>";

  Vocabulary();

  /// `size` counts the reserved entries.
  static Vocabulary from_counts(const std::unordered_map<std::string, std::size_t>& counts,
                                std::size_t size);

  std::size_t size() const { return surfaces_.size(); }
  int encode(std::string_view surface) const;
  const std::string& decode(int id) const;
  bool contains(std::string_view surface) const;
  static bool is_reserved(int id) { return id >= 0 && id < static_cast<int>(kReserved); }

  /// Token ids of `tokens` followed by the end-of-utterance id.
  std::vector<int> encode_sequence(const std::vector<std::string>& tokens) const;
  /// Surfaces of `ids`, dropping end-of-utterance and padding.
  std::vector<std::string> decode_sequence(const std::vector<int>& ids) const;

  /// "surface<TAB>id" per line, sorted by id.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.surfaces_ == b.surfaces_; }

 private:
  void push(std::string surface);

  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, int> ids_;
};

Vocabulary build_vocabulary(const std::vector<Dialogue>& corpus, std::size_t size, Level level);

}  // namespace mrrnn::corpus
