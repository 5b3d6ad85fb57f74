#include "mrrnn/corpus/vocabulary.hpp"

#include "mrrnn/errors.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace mrrnn::corpus {

Vocabulary::Vocabulary() {
  push(std::string(kUnknownSurface));
  push(std::string(corpus::kEndOfUtterance));
  push(std::string(kPaddingSurface));
}

void Vocabulary::push(std::string surface) {
  ids_.emplace(surface, static_cast<int>(surfaces_.size()));
  surfaces_.push_back(std::move(surface));
}

Vocabulary Vocabulary::from_counts(const std::unordered_map<std::string, std::size_t>& counts,
                                   std::size_t size) {
  if (size < kReserved + 1) {
    throw ConfigError("vocabulary size must be at least " + std::to_string(kReserved + 1));
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (const auto& [surface, count] : counts) {
    if (surface == kUnknownSurface || surface == corpus::kEndOfUtterance || surface == kPaddingSurface) {
      continue;
    }
    ranked.emplace_back(surface, count);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary v;
  for (std::size_t i = 0; i < ranked.size() && v.size() < size; ++i) v.push(ranked[i].first);
  return v;
}

int Vocabulary::encode(std::string_view surface) const {
  auto it = ids_.find(std::string(surface));
  return it == ids_.end() ? kUnknown : it->second;
}

const std::string& Vocabulary::decode(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= surfaces_.size()) {
    throw std::out_of_range("vocabulary id " + std::to_string(id) + " out of range");
  }
  return surfaces_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(std::string_view surface) const { return ids_.count(std::string(surface)) != 0; }

std::vector<int> Vocabulary::encode_sequence(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  for (const auto& t : tokens) ids.push_back(encode(t));
  ids.push_back(kEndOfUtterance);
  return ids;
}

std::vector<std::string> Vocabulary::decode_sequence(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == kEndOfUtterance || id == kPadding) continue;
    out.push_back(decode(id));
  }
  return out;
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = 0; i < surfaces_.size(); ++i) out << surfaces_[i] << '\t' << i << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary v;
  v.surfaces_.clear();
  v.ids_.clear();
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ResourceError("vocabulary line " + std::to_string(n) + ": missing tab");
    const std::string surface = line.substr(0, tab);
    std::size_t id = 0;
    try {
      id = std::stoul(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ResourceError("vocabulary line " + std::to_string(n) + ": bad id");
    }
    if (id != v.surfaces_.size() || surface.empty() || v.ids_.count(surface)) {
      throw ResourceError("vocabulary line " + std::to_string(n) + ": ids must be dense and surfaces unique");
    }
    v.push(surface);
  }
  if (v.size() < kReserved || v.surfaces_[kUnknown] != kUnknownSurface ||
      v.surfaces_[kEndOfUtterance] != corpus::kEndOfUtterance || v.surfaces_[kPadding] != kPaddingSurface) {
    throw ResourceError("vocabulary does not start with the reserved tokens");
  }
  return v;
}

Vocabulary build_vocabulary(const std::vector<Dialogue>& corpus, std::size_t size, Level level) {
  if (corpus.empty()) throw ResourceError("cannot build a vocabulary from an empty corpus");
  std::unordered_map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& d = corpus[i];
    if (level == Level::natural) {
      for (const auto& u : d.utterances) {
        for (const auto& t : u.tokens) ++counts[t];
      }
    } else {
      if (!d.coarse) throw AlignmentError("dialogue " + std::to_string(i + 1) + " has no coarse sequences");
      for (const auto& c : *d.coarse) {
        for (const auto& t : c.tokens) ++counts[t];
      }
    }
  }
  return Vocabulary::from_counts(counts, size);
}

}  // namespace mrrnn::corpus
