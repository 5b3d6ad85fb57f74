#include "mrrnn/corpus/corpus.hpp"

#include "mrrnn/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace mrrnn::corpus {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool is_speaker_label(std::string_view token) {
  return is_placeholder(token) && token.size() > 10 &&
         token.substr(token.size() - 9) == "_speaker>";
}

bool is_unknown_marker(std::string_view token) {
  return token == "<unk>" || token == "**unknown**" || token == "__unk__";
}

bool is_heart(std::string_view token) {
  return token == "<3" || token == "\xE2\x99\xA5" || token == "\xE2\x9D\xA4" ||
         token == "\xE2\x9D\xA4\xEF\xB8\x8F";
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot write " + path.string());
  return out;
}

std::vector<std::vector<std::string>> split_segments(std::string_view line, std::size_t line_number) {
  std::vector<std::vector<std::string>> segments;
  std::vector<std::string> current;
  for (auto& tok : split_whitespace(line)) {
    if (tok == kEndOfUtterance) {
      if (current.empty()) {
        throw ResourceError("line " + std::to_string(line_number) + ": empty utterance");
      }
      segments.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(std::move(tok));
    }
  }
  if (!current.empty()) segments.push_back(std::move(current));
  if (segments.empty()) {
    throw ResourceError("line " + std::to_string(line_number) + ": no utterances");
  }
  return segments;
}

}  // namespace

Domain parse_domain(std::string_view text) {
  if (text == "ubuntu") return Domain::ubuntu;
  if (text == "twitter") return Domain::twitter;
  throw ConfigError("unknown domain '" + std::string(text) + "' (expected ubuntu or twitter)");
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

bool is_placeholder(std::string_view token) {
  if (token.size() < 3 || token.front() != '<' || token.back() != '>') return false;
  return std::all_of(token.begin() + 1, token.end() - 1, [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
  });
}

bool is_url(std::string_view token) {
  return starts_with(token, "http://") || starts_with(token, "https://") ||
         starts_with(token, "ftp://") || starts_with(token, "www.");
}

bool is_path(std::string_view token) {
  if (token.size() < 2) return false;
  const bool rooted = token.front() == '/' || starts_with(token, "~/") || starts_with(token, "./");
  return rooted && std::any_of(token.begin(), token.end(), [](char c) {
           return std::isalpha(static_cast<unsigned char>(c)) != 0;
         });
}

bool is_number(std::string_view token) {
  bool digit = false;
  for (char c : token) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.' && c != ',' && c != ':') {
      return false;
    }
  }
  return digit;
}

PreprocessedUtterance preprocess_utterance(std::string_view raw, Domain domain,
                                           const std::function<bool(std::string_view)>& technical) {
  PreprocessedUtterance out;
  out.utterance.tokens = split_whitespace(raw);
  if (out.utterance.tokens.empty()) throw ResourceError("empty utterance");
  out.tagger_view.reserve(out.utterance.tokens.size());
  for (const auto& tok : out.utterance.tokens) {
    std::string view = tok;
    if (is_unknown_marker(tok)) {
      view = "something";
    } else if (is_placeholder(tok)) {
      // Placeholders stay in place so tags remain index-aligned; the tagger
      // marks them as symbols.
    } else if (domain == Domain::twitter) {
      if (is_url(tok)) {
        view = "somewhere";
      } else if (is_number(tok)) {
        view = "some";
      } else if (is_heart(tok)) {
        view = "love";
      }
    } else if (technical && technical(tok)) {
      view = "something";
    }
    out.tagger_view.push_back(std::move(view));
  }
  return out;
}

std::vector<Utterance> parse_dialogue_line(std::string_view line, std::size_t line_number) {
  std::vector<Utterance> out;
  for (auto& seg : split_segments(line, line_number)) {
    Utterance u;
    if (is_speaker_label(seg.front()) && seg.size() > 1) {
      u.speaker = seg.front();
      seg.erase(seg.begin());
    }
    u.tokens = std::move(seg);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<CoarseSequence> parse_coarse_line(std::string_view line, std::size_t line_number) {
  std::vector<CoarseSequence> out;
  for (auto& seg : split_segments(line, line_number)) out.push_back(CoarseSequence{std::move(seg)});
  return out;
}

std::string format_dialogue_line(const std::vector<Utterance>& utterances) {
  std::string out;
  for (const auto& u : utterances) {
    if (!out.empty()) out += ' ';
    if (u.speaker) {
      out += *u.speaker;
      out += ' ';
    }
    out += join(u.tokens);
    out += ' ';
    out += kEndOfUtterance;
  }
  return out;
}

std::string format_coarse_line(const std::vector<CoarseSequence>& coarse) {
  std::string out;
  for (const auto& c : coarse) {
    if (!out.empty()) out += ' ';
    out += join(c.tokens);
    out += ' ';
    out += kEndOfUtterance;
  }
  return out;
}

std::vector<Dialogue> read_corpus(std::istream& in) {
  std::vector<Dialogue> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(Dialogue{parse_dialogue_line(line, n), std::nullopt});
  }
  return out;
}

std::vector<Dialogue> load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_corpus(in);
}

void save_corpus(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& d : dialogues) out << format_dialogue_line(d.utterances) << '\n';
}

void attach_coarse(std::vector<Dialogue>& dialogues, std::istream& coarse) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(coarse, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n > dialogues.size()) {
      throw AlignmentError("coarse file line " + std::to_string(n) + ": no matching dialogue");
    }
    auto seqs = parse_coarse_line(line, n);
    if (seqs.size() != dialogues[n - 1].utterances.size()) {
      throw AlignmentError("coarse file line " + std::to_string(n) + ": " +
                           std::to_string(seqs.size()) + " coarse sequences for " +
                           std::to_string(dialogues[n - 1].utterances.size()) + " utterances");
    }
    dialogues[n - 1].coarse = std::move(seqs);
  }
  if (n != dialogues.size()) {
    throw AlignmentError("coarse file has " + std::to_string(n) + " lines, dialogue file has " +
                         std::to_string(dialogues.size()));
  }
}

std::vector<Dialogue> load_aligned(const std::filesystem::path& dialogues,
                                   const std::filesystem::path& coarse) {
  auto out = load_corpus(dialogues);
  auto in = open_input(coarse);
  attach_coarse(out, in);
  return out;
}

void save_coarse(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    if (!dialogues[i].coarse) {
      throw AlignmentError("dialogue " + std::to_string(i + 1) + " has no coarse sequences");
    }
    out << format_coarse_line(*dialogues[i].coarse) << '\n';
  }
}

}  // namespace mrrnn::corpus
