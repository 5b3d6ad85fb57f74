#include "mrrnn/extraction/extraction.hpp"

#include "mrrnn/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>

namespace mrrnn::extraction {
namespace {

namespace fs = std::filesystem;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

bool alphabetic(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) != 0 || u >= 0x80;
  });
}

bool has_alnum(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || u >= 0x80;
  });
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("missing resource file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

std::unordered_map<std::string, std::string> read_tsv(const fs::path& path) {
  std::unordered_map<std::string, std::string> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ResourceError(path.string() + ": entry " + std::to_string(n) + " is not key<TAB>value");
    }
    out.emplace(lower(line.substr(0, tab)), line.substr(tab + 1));
  }
  return out;
}

bool is_verb_tag(std::string_view tag) { return starts_with(tag, "VB"); }

const std::unordered_set<std::string>& future_modals() {
  static const std::unordered_set<std::string> words{"will", "'ll", "shall", "wo", "gonna"};
  return words;
}

bool is_flag(std::string_view tok) {
  return tok.size() > 1 && tok.front() == '-' && std::isalpha(static_cast<unsigned char>(tok[1]));
}

bool is_quote(std::string_view tok) { return tok == "'" || tok == "\"" || tok == "`" || tok == "$"; }

}  // namespace

Procedure parse_procedure(std::string_view text) {
  if (text == "noun") return Procedure::noun;
  if (text == "actent") return Procedure::activity_entity;
  throw ConfigError("unknown extraction mode '" + std::string(text) + "' (expected noun or actent)");
}

ExtractionResources ExtractionResources::load(const fs::path& root, Domain domain) {
  ExtractionResources r;
  const fs::path common = root / "common";
  const fs::path own = root / (domain == Domain::ubuntu ? "ubuntu" : "twitter");
  if (fs::exists(common / "verb_forms.tsv")) r.tagger_lexicon = read_tsv(common / "verb_forms.tsv");
  for (auto& [k, v] : read_tsv(common / "lexicon.tsv")) r.tagger_lexicon[k] = v;
  for (const auto& w : read_lines(own / "stopwords.txt")) r.stop_words.insert(w);
  const bool ubuntu = domain == Domain::ubuntu;
  auto optional = [&](const fs::path& p) { return ubuntu || fs::exists(p); };
  if (optional(own / "activities.tsv")) r.activity_map = read_tsv(own / "activities.tsv");
  if (optional(own / "entities.tsv")) {
    for (auto& [k, v] : read_tsv(own / "entities.tsv")) {
      const auto words = corpus::split_whitespace(k);
      if (words.empty() || words.size() > 2) {
        throw ResourceError((own / "entities.tsv").string() + ": entity key '" + k + "' must have one or two words");
      }
      r.entity_map.emplace(corpus::join(words), v);
    }
  }
  if (optional(own / "commands.txt")) {
    for (const auto& c : read_lines(own / "commands.txt")) r.command_set.insert(lower(c));
  }
  r.finalize();
  return r;
}

void ExtractionResources::finalize() {
  ambiguous_commands.clear();
  for (const auto& c : command_set) {
    if (tagger_lexicon.count(c) || stop_words.count(c) || activity_map.count(c)) {
      ambiguous_commands.insert(c);
    }
  }
  for (const auto& [surface, activity] : activity_map) {
    if (tagger_lexicon.count(surface)) continue;
    std::string tag = "VB";
    if (ends_with(surface, "ing")) {
      tag = "VBG";
    } else if (ends_with(surface, "ed")) {
      tag = "VBD";
    } else if (ends_with(surface, "s")) {
      tag = "VBZ";
    }
    tagger_lexicon.emplace(surface, tag);
  }
  for (const auto& [key, entity] : entity_map) {
    if (key.find(' ') == std::string::npos) tagger_lexicon.emplace(key, "NN");
  }
  for (const auto& w : stop_words) {
    if (tagger_lexicon.count(lower(w))) continue;
    if (!has_alnum(w)) {
      tagger_lexicon.emplace(w, (w == "." || w == "?" || w == "!") ? "." : (w == "," ? "," : ":"));
    } else {
      tagger_lexicon.emplace(lower(w), "PRP");
    }
  }
}

bool is_known_tag(std::string_view tag) {
  static const std::unordered_set<std::string_view> tags{
      "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP", "NNPS",
      "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG",
      "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB", ".", ",", ":", "``", "''", "-LRB-", "-RRB-", "#", "$"};
  return tags.count(tag) != 0;
}

std::string tag_word(std::string_view word, const ExtractionResources& resources) {
  const std::string w = lower(word);
  if (auto it = resources.tagger_lexicon.find(w); it != resources.tagger_lexicon.end()) return it->second;
  if (w.size() >= 5 && ends_with(w, "ing")) return "VBG";
  if (w.size() >= 4 && ends_with(w, "ed")) return "VBD";
  if (w.size() >= 4 && ends_with(w, "s") && !ends_with(w, "ss")) {
    auto known_verb = [&](const std::string& stem) {
      auto it = resources.tagger_lexicon.find(stem);
      return (it != resources.tagger_lexicon.end() && is_verb_tag(it->second)) ||
             resources.activity_map.count(stem) != 0;
    };
    const std::string stem = w.substr(0, w.size() - 1);
    const bool verb = known_verb(stem) || (ends_with(w, "es") && known_verb(w.substr(0, w.size() - 2)));
    return verb ? "VBZ" : "NNS";
  }
  return "NN";
}

std::vector<TaggedToken> pos_tag(const std::vector<std::string>& surfaces,
                                 const std::vector<std::string>& tagger_view,
                                 const ExtractionResources& resources) {
  if (surfaces.size() != tagger_view.size()) {
    throw AlignmentError("tagger view has " + std::to_string(tagger_view.size()) + " tokens for " +
                         std::to_string(surfaces.size()) + " surfaces");
  }
  std::vector<TaggedToken> out;
  out.reserve(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const std::string& v = tagger_view[i];
    std::string tag;
    if (corpus::is_placeholder(v)) {
      tag = "SYM";
    } else if (corpus::is_url(v) || corpus::is_path(v)) {
      tag = "NN";
    } else if (corpus::is_number(v)) {
      tag = "CD";
    } else if (!has_alnum(v)) {
      auto it = resources.tagger_lexicon.find(v);
      tag = it != resources.tagger_lexicon.end() ? it->second : ":";
    } else {
      tag = tag_word(v, resources);
    }
    out.push_back(TaggedToken{surfaces[i], std::move(tag)});
  }
  return out;
}

std::vector<TaggedToken> pos_tag(const std::vector<std::string>& tokens, const ExtractionResources& resources) {
  return pos_tag(tokens, tokens, resources);
}

std::vector<TaggedToken> parse_tagged(std::string_view text) {
  std::vector<TaggedToken> out;
  for (const auto& pair : corpus::split_whitespace(text)) {
    const auto slash = pair.rfind('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == pair.size()) {
      throw ResourceError("pre-tagged token '" + pair + "' is not surface/TAG");
    }
    std::string tag = pair.substr(slash + 1);
    if (!is_known_tag(tag)) throw ResourceError("unknown tag '" + tag + "' in '" + pair + "'");
    out.push_back(TaggedToken{pair.substr(0, slash), std::move(tag)});
  }
  return out;
}

std::string TenseToken::str() const {
  if (!past && !present && !future) return "no_tenses";
  std::string out;
  if (past) out += "past_";
  if (present) out += "present_";
  if (future) out += "future_";
  return out + "tenses";
}

TenseToken detect_tenses(const std::vector<TaggedToken>& tagged) {
  TenseToken t;
  for (const auto& tok : tagged) {
    if (tok.tag == "VBD" || tok.tag == "VBN") t.past = true;
    if (tok.tag == "VBP" || tok.tag == "VBZ" || tok.tag == "VBG") t.present = true;
    if (tok.tag == "MD") {
      const std::string w = lower(tok.surface);
      if (future_modals().count(w) || ends_with(w, "'ll")) t.future = true;
    }
  }
  return t;
}

bool is_tense_token(std::string_view token) {
  static const std::array<std::string_view, 8> tokens{
      "no_tenses",          "past_tenses",         "present_tenses",         "future_tenses",
      "past_present_tenses", "past_future_tenses", "present_future_tenses", "past_present_future_tenses"};
  return std::find(tokens.begin(), tokens.end(), token) != tokens.end();
}

std::vector<EntityMatch> match_entities(const std::vector<std::string>& tokens,
                                        const std::unordered_map<std::string, std::string>& entity_map) {
  std::vector<EntityMatch> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (i + 1 < tokens.size()) {
      if (auto it = entity_map.find(lower(tokens[i]) + " " + lower(tokens[i + 1])); it != entity_map.end()) {
        out.push_back(EntityMatch{i, 2, it->second});
        i += 2;
        continue;
      }
    }
    if (auto it = entity_map.find(lower(tokens[i])); it != entity_map.end()) {
      out.push_back(EntityMatch{i, 1, it->second});
    }
    ++i;
  }
  return out;
}

std::vector<std::string> map_entities(const std::vector<std::string>& tokens,
                                      const std::unordered_map<std::string, std::string>& entity_map) {
  std::vector<std::string> out;
  std::size_t next = 0;
  for (const auto& m : match_entities(tokens, entity_map)) {
    out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(next),
               tokens.begin() + static_cast<std::ptrdiff_t>(m.start));
    out.push_back(m.entity);
    next = m.start + m.length;
  }
  out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(next), tokens.end());
  return out;
}

bool is_command_at(const std::vector<std::string>& tokens, std::size_t i, const ExtractionResources& resources) {
  const std::string w = lower(tokens.at(i));
  if (!resources.command_set.count(w)) return false;
  if (!resources.ambiguous_commands.count(w)) return true;
  // English homographs need command context: after sudo or an opening quote,
  // or followed by a flag or a path.
  if (i > 0) {
    const std::string prev = lower(tokens[i - 1]);
    if (prev == "sudo" || is_quote(prev)) return true;
  }
  if (i + 1 < tokens.size() && (is_flag(tokens[i + 1]) || corpus::is_path(tokens[i + 1]))) return true;
  return false;
}

std::string detect_command(const std::vector<std::string>& tokens, const ExtractionResources& resources) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_command_at(tokens, i, resources)) return std::string(kCmd);
  }
  return std::string(kNoCmd);
}

corpus::PreprocessedUtterance prepare(const std::vector<std::string>& tokens, Domain domain,
                                      const ExtractionResources& resources) {
  auto out = corpus::preprocess_utterance(corpus::join(tokens), domain);
  if (domain == Domain::ubuntu) {
    for (const auto& m : match_entities(out.utterance.tokens, resources.entity_map)) {
      for (std::size_t k = m.start; k < m.start + m.length; ++k) out.tagger_view[k] = "something";
    }
    for (std::size_t i = 0; i < out.utterance.tokens.size(); ++i) {
      if (is_command_at(out.utterance.tokens, i, resources)) out.tagger_view[i] = "something";
    }
  }
  return out;
}

corpus::PreprocessedUtterance prepare(std::string_view raw, Domain domain, const ExtractionResources& resources) {
  auto tokens = corpus::split_whitespace(raw);
  if (tokens.empty()) throw ResourceError("empty utterance");
  return prepare(tokens, domain, resources);
}

CoarseSequence extract_nouns(const std::vector<TaggedToken>& tagged, const ExtractionResources& resources) {
  CoarseSequence out;
  out.tokens.push_back(detect_tenses(tagged).str());
  std::unordered_set<std::string> seen;
  for (const auto& tok : tagged) {
    const std::string& s = tok.surface;
    if (corpus::is_placeholder(s)) continue;
    const bool keep = corpus::is_url(s) || corpus::is_path(s) || (starts_with(tok.tag, "NN") && alphabetic(s));
    if (!keep) continue;
    if (resources.stop_words.count(s) || resources.stop_words.count(lower(s))) continue;
    if (seen.insert(s).second) out.tokens.push_back(s);
  }
  if (out.tokens.size() == 1) out.tokens.emplace_back(kNoNouns);
  return out;
}

CoarseSequence extract_activity_entity(const std::vector<TaggedToken>& tagged,
                                       const std::vector<std::string>& raw_tokens,
                                       const ExtractionResources& resources) {
  if (tagged.size() != raw_tokens.size()) {
    throw AlignmentError("tag count " + std::to_string(tagged.size()) + " differs from token count " +
                         std::to_string(raw_tokens.size()));
  }
  const auto matches = match_entities(raw_tokens, resources.entity_map);
  std::vector<bool> covered(raw_tokens.size(), false);
  std::vector<std::pair<std::size_t, std::string>> items;
  for (const auto& m : matches) {
    for (std::size_t k = m.start; k < m.start + m.length; ++k) covered[k] = true;
    items.emplace_back(m.start, m.entity);
  }

  std::vector<std::size_t> verbs;
  for (std::size_t i = 0; i < tagged.size(); ++i) {
    if (is_verb_tag(tagged[i].tag)) verbs.push_back(i);
  }
  // Imperatives ("upgrade firefox") are often tagged as nouns.
  if (verbs.empty() && !tagged.empty() && starts_with(tagged[0].tag, "NN")) verbs.push_back(0);
  for (std::size_t i : verbs) {
    if (covered[i]) continue;
    if (auto it = resources.activity_map.find(lower(tagged[i].surface)); it != resources.activity_map.end()) {
      items.emplace_back(i, it->second);
    }
  }
  for (std::size_t i = 0; i < raw_tokens.size(); ++i) {
    if (!covered[i] && (corpus::is_url(raw_tokens[i]) || corpus::is_path(raw_tokens[i]))) {
      items.emplace_back(i, raw_tokens[i]);
    }
  }
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  CoarseSequence out;
  out.tokens.push_back(detect_tenses(tagged).str());
  std::vector<std::string> content;
  std::unordered_set<std::string> seen;
  bool activity = false;
  for (auto& [pos, tok] : items) {
    if (!seen.insert(tok).second) continue;
    activity = activity || ends_with(tok, "_activity");
    content.push_back(std::move(tok));
  }
  if (!activity) out.tokens.emplace_back(kNoneActivity);
  out.tokens.insert(out.tokens.end(), content.begin(), content.end());
  out.tokens.push_back(detect_command(raw_tokens, resources));
  return out;
}

CoarseSequence extract(const std::vector<std::string>& tokens, Procedure procedure, Domain domain,
                       const ExtractionResources& resources, const std::optional<std::vector<TaggedToken>>& tags) {
  if (tokens.empty()) throw ResourceError("empty utterance");
  std::vector<TaggedToken> tagged;
  if (tags) {
    if (tags->size() != tokens.size()) {
      throw AlignmentError(std::to_string(tags->size()) + " tags for " + std::to_string(tokens.size()) + " tokens");
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if ((*tags)[i].surface != tokens[i]) {
        throw AlignmentError("tagged surface '" + (*tags)[i].surface + "' does not match token '" + tokens[i] + "'");
      }
    }
    tagged = *tags;
  } else {
    const auto prepared = prepare(tokens, domain, resources);
    tagged = pos_tag(prepared.utterance.tokens, prepared.tagger_view, resources);
  }
  return procedure == Procedure::noun ? extract_nouns(tagged, resources)
                                      : extract_activity_entity(tagged, tokens, resources);
}

bool is_special_coarse_token(std::string_view token) {
  return is_tense_token(token) || token == kCmd || token == kNoCmd || token == kNoNouns || token == kNoneActivity ||
         token == corpus::kEndOfUtterance || corpus::is_placeholder(token);
}

}  // namespace mrrnn::extraction
