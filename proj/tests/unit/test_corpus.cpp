#include <doctest.h>

#include "mrrnn/corpus/corpus.hpp"
#include "mrrnn/corpus/vocabulary.hpp"
#include "mrrnn/errors.hpp"

#include "support.hpp"

#include <fstream>
#include <map>
#include <random>
#include <sstream>

using namespace mrrnn::corpus;

TEST_SUITE("corpus") {
  TEST_CASE("dialogue lines parse into utterances with speakers") {
    const auto u = parse_dialogue_line(
        "<first_speaker> how do i install vlc ? __eot__ <second_speaker> sudo apt-get install vlc __eot__", 1);
    REQUIRE(u.size() == 2);
    CHECK(u[0].speaker == "<first_speaker>");
    CHECK(u[0].tokens == std::vector<std::string>{"how", "do", "i", "install", "vlc", "?"});
    CHECK(u[1].tokens.front() == "sudo");

    const auto bare = parse_dialogue_line("hello there __eot__ hi", 1);
    REQUIRE(bare.size() == 2);
    CHECK_FALSE(bare[0].speaker.has_value());
    CHECK(bare[1].tokens == std::vector<std::string>{"hi"});
  }

  TEST_CASE("malformed lines") {
    CHECK_THROWS_AS(parse_dialogue_line("", 3), mrrnn::ResourceError);
    CHECK_THROWS_AS(parse_dialogue_line("a __eot__ __eot__ b", 3), mrrnn::ResourceError);
    try {
      parse_dialogue_line("   ", 7);
      FAIL("expected an error");
    } catch (const mrrnn::ResourceError& e) {
      CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    }
  }

  TEST_CASE("format and parse round trip") {
    std::mt19937_64 rng(1);
    const std::vector<std::string> words{"a", "b", "sudo", "<url>", "?", "it's"};
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Utterance> dialogue(1 + rng() % 4);
      for (auto& u : dialogue) {
        u.tokens.resize(1 + rng() % 5);
        for (auto& t : u.tokens) t = words[rng() % words.size()];
        if (rng() % 2) u.speaker = rng() % 2 ? "<first_speaker>" : "<second_speaker>";
      }
      const std::string line = format_dialogue_line(dialogue);
      CHECK(parse_dialogue_line(line, 1) == dialogue);
      CHECK(format_dialogue_line(parse_dialogue_line(line, 1)) == line);
    }
  }

  TEST_CASE("coarse alignment") {
    std::istringstream dialogues("a b __eot__ c __eot__\nd __eot__\n");
    auto corpus = read_corpus(dialogues);
    {
      std::istringstream coarse("x __eot__ y __eot__\nz __eot__\n");
      auto copy = corpus;
      attach_coarse(copy, coarse);
      REQUIRE(copy[0].coarse.has_value());
      CHECK(copy[0].coarse->size() == 2);
      CHECK((*copy[1].coarse)[0].tokens == std::vector<std::string>{"z"});
    }
    {
      std::istringstream coarse("x __eot__\nz __eot__\n");
      auto copy = corpus;
      try {
        attach_coarse(copy, coarse);
        FAIL("expected misalignment");
      } catch (const mrrnn::AlignmentError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
      }
    }
    {
      std::istringstream coarse("x __eot__ y __eot__\n");
      auto copy = corpus;
      CHECK_THROWS_AS(attach_coarse(copy, coarse), mrrnn::AlignmentError);
    }
  }

  TEST_CASE("corpus files round trip") {
    const auto dir = test::scratch_dir("corpus");
    auto corpus = load_aligned(test::kFixtures / "toy_dialogues.txt", test::kFixtures / "toy_coarse.txt");
    CHECK(corpus.size() == 5);
    save_corpus(corpus, dir / "d.txt");
    save_coarse(corpus, dir / "c.txt");
    CHECK(load_aligned(dir / "d.txt", dir / "c.txt") == corpus);
    CHECK_THROWS_AS(load_corpus(dir / "missing.txt"), mrrnn::ResourceError);
  }

  TEST_CASE("token classes") {
    CHECK(is_placeholder("<url>"));
    CHECK(is_placeholder("<first_speaker>"));
    CHECK_FALSE(is_placeholder("<3"));
    CHECK_FALSE(is_placeholder("a<b>"));
    CHECK(is_url("http://x.org"));
    CHECK(is_url("www.example.com"));
    CHECK_FALSE(is_url("example"));
    CHECK(is_path("/etc/apt/sources.list"));
    CHECK(is_path("~/bin"));
    CHECK_FALSE(is_path("/"));
    CHECK(is_number("3"));
    CHECK(is_number("10:30"));
    CHECK_FALSE(is_number("3d"));
    CHECK(parse_domain("twitter") == Domain::twitter);
    CHECK_THROWS_AS(parse_domain("reddit"), mrrnn::ConfigError);
  }

  TEST_CASE("preprocessing keeps tokens and rewrites the tagger view") {
    const auto t = preprocess_utterance("i <3 it 2 much http://a.b <unk> <url>", Domain::twitter);
    CHECK(t.utterance.tokens.size() == t.tagger_view.size());
    CHECK(t.tagger_view == std::vector<std::string>{"i", "love", "it", "some", "much", "somewhere", "something", "<url>"});
    CHECK(t.utterance.tokens[1] == "<3");

    auto technical = [](std::string_view w) { return w == "apt-get"; };
    const auto u = preprocess_utterance("run apt-get now", Domain::ubuntu, technical);
    CHECK(u.tagger_view == std::vector<std::string>{"run", "something", "now"});
    CHECK_THROWS_AS(preprocess_utterance("  ", Domain::ubuntu), mrrnn::ResourceError);
  }

  TEST_CASE("vocabulary ordering and reserved ids") {
    std::unordered_map<std::string, std::size_t> counts{{"b", 5}, {"a", 5}, {"c", 9}, {"d", 1}, {"<unk>", 50}};
    const auto v = Vocabulary::from_counts(counts, 6);
    CHECK(v.size() == 6);
    CHECK(v.decode(0) == "<unk>");
    CHECK(v.decode(1) == "__eot__");
    CHECK(v.decode(2) == "<pad>");
    CHECK(v.decode(3) == "c");
    CHECK(v.decode(4) == "a");
    CHECK(v.decode(5) == "b");
    CHECK(v.encode("d") == Vocabulary::kUnknown);
    CHECK(v.encode_sequence({"a", "zzz"}) == std::vector<int>{4, 0, 1});
    CHECK(v.decode_sequence({4, 0, 1, 2}) == std::vector<std::string>{"a", "<unk>"});
    CHECK_THROWS_AS(v.decode(6), std::out_of_range);
    CHECK_THROWS_AS(Vocabulary::from_counts(counts, 3), mrrnn::ConfigError);

    std::stringstream s;
    v.write(s);
    CHECK(Vocabulary::read(s) == v);
    std::istringstream bad("<unk>\t0\n__eot__\t2\n");
    CHECK_THROWS_AS(Vocabulary::read(bad), mrrnn::ResourceError);
  }

  TEST_CASE("vocabulary matches a brute-force frequency ranking") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Dialogue> corpus(3);
      std::map<std::string, std::size_t> counts;
      for (auto& d : corpus) {
        d.utterances.resize(2);
        for (auto& u : d.utterances) {
          u.tokens.resize(1 + rng() % 6);
          for (auto& t : u.tokens) {
            t = std::string(1, static_cast<char>('a' + rng() % 8));
            ++counts[t];
          }
        }
      }
      const std::size_t size = 4 + rng() % 6;
      const auto v = build_vocabulary(corpus, size, Level::natural);
      CHECK(v.size() == std::min(size, counts.size() + 3));
      // Every kept word outranks every dropped word.
      for (const auto& [w, c] : counts) {
        if (v.contains(w)) continue;
        for (std::size_t id = 3; id < v.size(); ++id) {
          const auto& kept = v.decode(static_cast<int>(id));
          CHECK((counts[kept] > c || (counts[kept] == c && kept < w)));
        }
      }
      for (std::size_t id = 4; id < v.size(); ++id) {
        const auto& a = v.decode(static_cast<int>(id - 1));
        const auto& b = v.decode(static_cast<int>(id));
        CHECK((counts[a] > counts[b] || (counts[a] == counts[b] && a < b)));
      }
    }
    CHECK_THROWS_AS(build_vocabulary({}, 10, Level::natural), mrrnn::ResourceError);
  }

  TEST_CASE("coarse vocabulary requires coarse sequences") {
    std::istringstream in("a __eot__\n");
    auto corpus = read_corpus(in);
    CHECK_THROWS_AS(build_vocabulary(corpus, 10, Level::coarse), mrrnn::AlignmentError);
  }
}
