#include <doctest.h>

#include "mrrnn/corpus/corpus.hpp"
#include "mrrnn/errors.hpp"
#include "mrrnn/extraction/extraction.hpp"

#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <set>

using namespace mrrnn::extraction;
using mrrnn::corpus::split_whitespace;

namespace {

const ExtractionResources& ubuntu() {
  static const ExtractionResources r = ExtractionResources::load(test::kResources, Domain::ubuntu);
  return r;
}

const ExtractionResources& twitter() {
  static const ExtractionResources r = ExtractionResources::load(test::kResources, Domain::twitter);
  return r;
}

std::string joined(const CoarseSequence& c) { return mrrnn::corpus::join(c.tokens); }

std::vector<std::vector<TaggedToken>> fixture_tags(const std::string& name) {
  std::ifstream in(test::kFixtures / name);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<TaggedToken>> out(1);
  for (const auto& tok : split_whitespace(line)) {
    if (tok == "__eot__") {
      out.emplace_back();
    } else {
      auto t = parse_tagged(tok);
      out.back().push_back(t.at(0));
    }
  }
  return out;
}

// Brute-force entity matching: enumerate every set of non-overlapping
// dictionary spans; greedy leftmost-longest is the one whose per-position
// labels (2 = starts a two-word match, 1 = one-word match, 0 = unmatched,
// -1 = continuation) are lexicographically largest.
std::vector<EntityMatch> brute_force_matches(const std::vector<std::string>& tokens,
                                             const std::unordered_map<std::string, std::string>& map) {
  std::vector<int> best_labels;
  std::vector<EntityMatch> best;
  std::vector<int> labels;
  std::vector<EntityMatch> chosen;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i >= tokens.size()) {
      if (best_labels.empty() || labels > best_labels) {
        best_labels = labels;
        best = chosen;
      }
      return;
    }
    labels.push_back(0);
    go(i + 1);
    labels.pop_back();
    if (auto it = map.find(tokens[i]); it != map.end()) {
      labels.push_back(1);
      chosen.push_back({i, 1, it->second});
      go(i + 1);
      chosen.pop_back();
      labels.pop_back();
    }
    if (i + 1 < tokens.size()) {
      if (auto it = map.find(tokens[i] + " " + tokens[i + 1]); it != map.end()) {
        labels.push_back(2);
        labels.push_back(-1);
        chosen.push_back({i, 2, it->second});
        go(i + 2);
        chosen.pop_back();
        labels.pop_back();
        labels.pop_back();
      }
    }
  };
  go(0);
  return best;
}

}  // namespace

TEST_SUITE("extraction") {
  TEST_CASE("resource lists load") {
    CHECK(ubuntu().stop_words.count("whatever") == 1);
    CHECK(ubuntu().command_set.size() == 230);
    CHECK(ubuntu().command_set.count("sudo") == 1);
    CHECK(ubuntu().activity_map.at("find") == "discover_activity");
    CHECK(ubuntu().entity_map.at("lsb-base") == "lsb_entity");
    CHECK(twitter().stop_words.size() > 700);
    CHECK_THROWS_AS(ExtractionResources::load(test::kSource / "nowhere", Domain::ubuntu), mrrnn::ResourceError);
  }

  TEST_CASE("worked example rows with the supplied tags") {
    const auto tags = fixture_tags("worked_ubuntu.tags");
    REQUIRE(tags.size() == 3);
    const std::vector<std::string> expected{
        "no_tenses upgrade_activity lsb_entity acpid_entity no_cmd",
        "present_tenses get_activity no_cmd",
        "present_tenses discover_activity no_cmd",
    };
    for (std::size_t i = 0; i < 3; ++i) {
      std::vector<std::string> tokens;
      for (const auto& t : tags[i]) tokens.push_back(t.surface);
      CHECK(joined(extract(tokens, Procedure::activity_entity, Domain::ubuntu, ubuntu(), tags[i])) == expected[i]);
    }
    const auto tw = fixture_tags("worked_twitter.tags");
    std::vector<std::string> tokens;
    for (const auto& t : tw[0]) tokens.push_back(t.surface);
    CHECK(joined(extract(tokens, Procedure::noun, Domain::twitter, twitter(), tw[0])) ==
          "present_tenses pinkberry princess moment");
  }

  TEST_CASE("worked example rows with the built-in tagger") {
    auto run = [](const std::string& text, Procedure p, Domain d, const ExtractionResources& r) {
      return joined(extract(split_whitespace(text), p, d, r));
    };
    CHECK(run("upgrade lsb-base and acpid", Procedure::activity_entity, Domain::ubuntu, ubuntu()) ==
          "no_tenses upgrade_activity lsb_entity acpid_entity no_cmd");
    CHECK(run("what error do you get ?", Procedure::activity_entity, Domain::ubuntu, ubuntu()) ==
          "present_tenses get_activity no_cmd");
    CHECK(run("i don't find error :/ where do i search from ?", Procedure::activity_entity, Domain::ubuntu,
              ubuntu()) == "present_tenses discover_activity no_cmd");
    CHECK(run("at pinkberry with my pink princess enjoying a precious moment", Procedure::noun, Domain::twitter,
              twitter()) == "present_tenses pinkberry princess moment");
  }

  TEST_CASE("tagging") {
    CHECK(tag_word("install", ubuntu()) == "VB");
    CHECK(tag_word("frobnicating", ubuntu()) == "VBG");
    CHECK(tag_word("frobnicated", ubuntu()) == "VBD");
    CHECK(tag_word("frobnicator", ubuntu()) == "NN");
    const auto parsed = parse_tagged("firefox/NN crashed/VBD");
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0] == TaggedToken{"firefox", "NN"});
    CHECK(parsed[1] == TaggedToken{"crashed", "VBD"});
    CHECK(parse_tagged("and/or/CC")[0] == TaggedToken{"and/or", "CC"});
    const auto tagged = pos_tag(split_whitespace("see http://x.org or /etc/fstab !"), ubuntu());
    REQUIRE(tagged.size() == 5);
    for (const auto& t : tagged) CHECK(is_known_tag(t.tag));
  }

  TEST_CASE("tenses") {
    CHECK(detect_tenses(parse_tagged("they/PRP are/VBP adorable/JJ")).str() == "present_tenses");
    CHECK(detect_tenses(parse_tagged("ok/UH !/.")).str() == "no_tenses");
    CHECK(detect_tenses(parse_tagged("i/PRP will/MD install/VB it/PRP")).str() == "future_tenses");
    CHECK(detect_tenses(parse_tagged("i/PRP could/MD install/VB it/PRP")).str() == "no_tenses");
    CHECK(detect_tenses(parse_tagged("it/PRP broke/VBD and/CC is/VBZ down/RB")).str() == "past_present_tenses");
    CHECK(detect_tenses(parse_tagged("it/PRP had/VBD broken/VBN ,/, is/VBZ ,/, and/CC will/MD")).str() ==
          "past_present_future_tenses");
    // All eight renderings are distinct tense tokens.
    std::set<std::string> seen;
    for (int mask = 0; mask < 8; ++mask) {
      TenseToken t{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
      CHECK(is_tense_token(t.str()));
      seen.insert(t.str());
    }
    CHECK(seen.size() == 8);
  }

  TEST_CASE("noun procedure examples") {
    CHECK(joined(extract_nouns(parse_tagged("ok/UH !/."), twitter())) == "no_tenses no_nouns");
    CHECK(joined(extract_nouns(parse_tagged("cat/NN cat/NN dog/NN cat/NN"), twitter())) == "no_tenses cat dog");
  }

  TEST_CASE("entity matching") {
    const auto& m = ubuntu().entity_map;
    CHECK(map_entities({"lsb-base"}, m) == std::vector<std::string>{"lsb_entity"});
    CHECK(map_entities({"hello", "there"}, m) == std::vector<std::string>{"hello", "there"});
    CHECK(map_entities({"install", "ubuntu", "studio", "now"}, m) ==
          std::vector<std::string>{"install", "ubuntu_studio_entity", "now"});
    const std::vector<std::string> five{"ubuntu", "studio", "ubuntu", "lsb", "firefox"};
    CHECK(match_entities(five, m) == brute_force_matches(five, m));
  }

  TEST_CASE("entity matching agrees with brute force on random dictionaries") {
    std::mt19937_64 rng(21);
    const std::vector<std::string> words{"a", "b", "c", "d"};
    for (int trial = 0; trial < 300; ++trial) {
      std::unordered_map<std::string, std::string> map;
      for (int k = 0; k < 4; ++k) {
        std::string key = words[rng() % 4];
        if (rng() % 2) key += " " + words[rng() % 4];
        map[key] = "e" + std::to_string(k);
      }
      std::vector<std::string> tokens(1 + rng() % 7);
      for (auto& t : tokens) t = words[rng() % 4];
      CHECK(match_entities(tokens, map) == brute_force_matches(tokens, map));
    }
  }

  TEST_CASE("command detection") {
    auto cmd = [](const std::string& s) { return detect_command(split_whitespace(s), ubuntu()); };
    CHECK(cmd("just use sudo") == "cmd");
    CHECK(cmd("hello there") == "no_cmd");
    CHECK(cmd("apt-get install -f") == "cmd");
    // English homographs of commands need command context.
    CHECK(cmd("i can't find it") == "no_cmd");
    CHECK(cmd("find /home -name foo") == "cmd");
    CHECK(cmd("sudo find") == "cmd");
    CHECK(cmd("find -name foo") == "cmd");
  }

  TEST_CASE("activity-entity edge cases") {
    // No verbs and a leading noun: the first token is read as a verb.
    const auto first = extract_activity_entity(parse_tagged("install/NN firefox/NN"),
                                               {"install", "firefox"}, ubuntu());
    CHECK(joined(first) == "no_tenses install_activity firefox_entity no_cmd");
    const auto none = extract_activity_entity(parse_tagged("hello/UH there/RB"), {"hello", "there"}, ubuntu());
    CHECK(joined(none) == "no_tenses none_activity no_cmd");
  }

  TEST_CASE("pre-tagged input must align") {
    CHECK_THROWS_AS(extract({"a", "b"}, Procedure::noun, Domain::twitter, twitter(), parse_tagged("a/NN")),
                    mrrnn::AlignmentError);
  }

  TEST_CASE("coarse sequence invariants on random utterances") {
    std::vector<std::string> pool;
    for (const auto& [k, v] : ubuntu().activity_map) pool.push_back(k);
    for (const auto& [k, v] : ubuntu().entity_map) {
      if (k.find(' ') == std::string::npos) pool.push_back(k);
    }
    for (const auto& w : ubuntu().stop_words) pool.push_back(w);
    for (const char* w : {"sudo", "apt-get", "-f", "/etc/fstab", "http://x.org", "<url>", "error", "cats", "it's",
                          "will", "was", "is", "ok", "!", "?", "ubuntu", "studio"}) {
      pool.push_back(w);
    }
    std::sort(pool.begin(), pool.end());
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 400; ++trial) {
      std::vector<std::string> tokens(1 + rng() % 10);
      for (auto& t : tokens) t = pool[rng() % pool.size()];
      const std::set<std::string> source(tokens.begin(), tokens.end());

      for (Procedure p : {Procedure::noun, Procedure::activity_entity}) {
        const auto& res = p == Procedure::noun ? twitter() : ubuntu();
        const Domain dom = p == Procedure::noun ? Domain::twitter : Domain::ubuntu;
        const auto out = extract(tokens, p, dom, res);
        CHECK(out == extract(tokens, p, dom, res));
        REQUIRE(out.tokens.size() >= 2);
        CHECK(is_tense_token(out.tokens.front()));
        std::set<std::string> content;
        for (const auto& t : out.tokens) {
          if (is_special_coarse_token(t)) continue;
          CHECK_MESSAGE(content.insert(t).second, "duplicate ", t);
        }
        if (p == Procedure::noun) {
          for (const auto& t : content) {
            CHECK_MESSAGE(source.count(t) == 1, "ungrounded noun ", t);
            CHECK(res.stop_words.count(t) == 0);
          }
        } else {
          const auto& last = out.tokens.back();
          CHECK((last == "cmd" || last == "no_cmd"));
          CHECK(std::count(out.tokens.begin(), out.tokens.end(), "cmd") +
                    std::count(out.tokens.begin(), out.tokens.end(), "no_cmd") ==
                1);
          std::set<std::string> entities;
          for (const auto& m : match_entities(tokens, res.entity_map)) entities.insert(m.entity);
          std::set<std::string> activities;
          for (const auto& t : tokens) {
            if (auto it = res.activity_map.find(t); it != res.activity_map.end()) activities.insert(it->second);
          }
          for (const auto& t : content) {
            const bool ok = entities.count(t) || activities.count(t) || source.count(t);
            CHECK_MESSAGE(ok, "ungrounded token ", t);
          }
        }
      }
    }
  }
}
