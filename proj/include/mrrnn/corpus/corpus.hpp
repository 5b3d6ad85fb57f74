#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrrnn::corpus {

/// Utterance separator used by dialogue and coarse files.
inline constexpr std::string_view kEndOfUtterance = "__eot__";

struct Utterance {
  std::vector<std::string> tokens;
  std::optional<std::string> speaker;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct CoarseSequence {
  std::vector<std::string> tokens;

  friend bool operator==(const CoarseSequence&, const CoarseSequence&) = default;
};

/// When `coarse` is present it holds exactly one sequence per utterance.
struct Dialogue {
  std::vector<Utterance> utterances;
  std::optional<std::vector<CoarseSequence>> coarse;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

enum class Domain { ubuntu, twitter };

Domain parse_domain(std::string_view text);

/// Tokens kept for modelling plus an index-aligned copy fed to the tagger.
struct PreprocessedUtterance {
  Utterance utterance;
  std::vector<std::string> tagger_view;
};

/// `<...>` tokens such as `<url>` or `<first_speaker>`.
bool is_placeholder(std::string_view token);
bool is_url(std::string_view token);
bool is_path(std::string_view token);
bool is_number(std::string_view token);

/// Whitespace tokenization with placeholder-aware substitutions in the tagger
/// view: unknown markers become "something"; on Twitter numbers become "some",
/// urls "somewhere" and heart emoticons "love"; on Ubuntu every token accepted
/// by `technical` (commands, entities) becomes "something".
PreprocessedUtterance preprocess_utterance(
    std::string_view raw, Domain domain,
    const std::function<bool(std::string_view)>& technical = {});

/// Splits one dialogue line into utterance token lists. A leading
/// `<..._speaker>` token becomes the speaker label.
std::vector<Utterance> parse_dialogue_line(std::string_view line, std::size_t line_number);
std::vector<CoarseSequence> parse_coarse_line(std::string_view line, std::size_t line_number);

std::string format_dialogue_line(const std::vector<Utterance>& utterances);
std::string format_coarse_line(const std::vector<CoarseSequence>& coarse);

std::vector<Dialogue> read_corpus(std::istream& in);
std::vector<Dialogue> load_corpus(const std::filesystem::path& path);
void save_corpus(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path);

/// Attaches the coarse file to already-loaded dialogues. A line whose
/// sequence count differs from the utterance count raises AlignmentError
/// naming the line.
void attach_coarse(std::vector<Dialogue>& dialogues, std::istream& coarse);
std::vector<Dialogue> load_aligned(const std::filesystem::path& dialogues,
                                   const std::filesystem::path& coarse);
void save_coarse(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path);

std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

}  // namespace mrrnn::corpus
