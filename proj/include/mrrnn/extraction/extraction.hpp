#pragma once

#include "mrrnn/corpus/corpus.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace mrrnn::extraction {

using corpus::CoarseSequence;
using corpus::Domain;

struct TaggedToken {
  std::string surface;
  std::string tag;

  friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};

/// Word lists driving both coarse procedures. Entity keys are one word or two
/// space-separated words; all keys are lower case.
struct ExtractionResources {
  std::unordered_set<std::string> stop_words;
  std::unordered_map<std::string, std::string> activity_map;
  std::unordered_map<std::string, std::string> entity_map;
  std::unordered_set<std::string> command_set;
  std::unordered_map<std::string, std::string> tagger_lexicon;

  /// Commands that are also ordinary English words ("find", "install", "if").
  /// They only count as commands in command position.
  std::unordered_set<std::string> ambiguous_commands;

  /// Loads `<root>/common/*` and `<root>/<domain>/*`. Ubuntu requires the
  /// activity, entity and command files; Twitter only needs stop words.
  static ExtractionResources load(const std::filesystem::path& root, Domain domain);

  /// Call after editing the lists by hand; seeds the tagger lexicon and the
  /// ambiguous-command set from the other lists.
  void finalize();
};

enum class Procedure { noun, activity_entity };

Procedure parse_procedure(std::string_view text);

// ---- tagging ---------------------------------------------------------------

bool is_known_tag(std::string_view tag);

/// Lexicon lookup with suffix fallback: -ing -> VBG, -ed -> VBD,
/// -s -> VBZ after a known verb stem else NNS, otherwise NN.
std::string tag_word(std::string_view word, const ExtractionResources& resources);

/// One tag per token of the tagger view, surfaces taken from `surfaces`.
std::vector<TaggedToken> pos_tag(const std::vector<std::string>& surfaces,
                                 const std::vector<std::string>& tagger_view,
                                 const ExtractionResources& resources);
std::vector<TaggedToken> pos_tag(const std::vector<std::string>& tokens,
                                 const ExtractionResources& resources);

/// Parses "surface/TAG" pairs (split at the last slash).
std::vector<TaggedToken> parse_tagged(std::string_view text);

// ---- tenses ----------------------------------------------------------------

struct TenseToken {
  bool past = false;
  bool present = false;
  bool future = false;

  /// "past_present_tenses", "future_tenses", ..., or "no_tenses".
  std::string str() const;
  friend bool operator==(const TenseToken&, const TenseToken&) = default;
};

TenseToken detect_tenses(const std::vector<TaggedToken>& tagged);
bool is_tense_token(std::string_view token);

// ---- entities and commands -------------------------------------------------

struct EntityMatch {
  std::size_t start = 0;
  std::size_t length = 0;
  std::string entity;

  friend bool operator==(const EntityMatch&, const EntityMatch&) = default;
};

/// Greedy left-to-right matching; at each position a two-word key is tried
/// before a one-word key.
std::vector<EntityMatch> match_entities(const std::vector<std::string>& tokens,
                                        const std::unordered_map<std::string, std::string>& entity_map);

/// Tokens with matched spans replaced by their entity token.
std::vector<std::string> map_entities(const std::vector<std::string>& tokens,
                                      const std::unordered_map<std::string, std::string>& entity_map);

bool is_command_at(const std::vector<std::string>& tokens, std::size_t i,
                   const ExtractionResources& resources);

inline constexpr std::string_view kCmd = "cmd";
inline constexpr std::string_view kNoCmd = "no_cmd";
inline constexpr std::string_view kNoNouns = "no_nouns";
inline constexpr std::string_view kNoneActivity = "none_activity";

/// "cmd" when any token is a command in context, else "no_cmd".
std::string detect_command(const std::vector<std::string>& tokens, const ExtractionResources& resources);

// ---- procedures ------------------------------------------------------------

/// Tagger input for an Ubuntu utterance: entity spans and commands become
/// "something"; Twitter substitutions are handled by corpus preprocessing.
corpus::PreprocessedUtterance prepare(std::string_view raw, Domain domain,
                                      const ExtractionResources& resources);
corpus::PreprocessedUtterance prepare(const std::vector<std::string>& tokens, Domain domain,
                                      const ExtractionResources& resources);

CoarseSequence extract_nouns(const std::vector<TaggedToken>& tagged, const ExtractionResources& resources);

CoarseSequence extract_activity_entity(const std::vector<TaggedToken>& tagged,
                                       const std::vector<std::string>& raw_tokens,
                                       const ExtractionResources& resources);

/// Full pipeline for one utterance. With `tags` the built-in tagger is
/// bypassed; the tag count must equal the token count.
CoarseSequence extract(const std::vector<std::string>& tokens, Procedure procedure, Domain domain,
                       const ExtractionResources& resources,
                       const std::optional<std::vector<TaggedToken>>& tags = std::nullopt);

/// Tokens that carry no source word: tense tokens, flags and fallbacks.
bool is_special_coarse_token(std::string_view token);

}  // namespace mrrnn::extraction
