#include <doctest.h>

#include "mrrnn/errors.hpp"
#include "mrrnn/models/config.hpp"
#include "mrrnn/models/forward.hpp"
#include "mrrnn/models/model.hpp"
#include "mrrnn/models/train.hpp"
#include "mrrnn/neural/gradcheck.hpp"

#include "reference.hpp"
#include "support.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

using namespace mrrnn::models;
using mrrnn::neural::GradientSet;
using mrrnn::neural::ParameterSet;

namespace {

constexpr ModelKind kAllKinds[] = {ModelKind::rnnlm, ModelKind::hred, ModelKind::hred_actent, ModelKind::mrrnn};

Model random_model(ModelKind kind, std::uint64_t seed, int vocab = 5, Index dim = 3, double scale = 0.5) {
  ModelConfig c = test::tiny_config(kind, dim);
  Model m = create_model(c, vocab, vocab);
  std::mt19937_64 rng(seed);
  test::randomize(m.params, rng, scale);
  return m;
}

bool bitwise_equal(const ParameterSet<double>& a, const ParameterSet<double>& b) {
  if (!a.congruent(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(a.at(i).data(), b.at(i).data(), sizeof(double) * a.at(i).size()) != 0) return false;
  }
  return true;
}

/// Per-utterance natural and coarse terms from the library forward pass.
test::reference::Terms library_terms(const Model& m, const EncodedDialogue& d) {
  Tape<double> t(m.params, false);
  auto carry = initial_carry<double>(m.layout);
  const auto terms = forward_segment(t, m.layout, d, 0, d.size(), carry);
  test::reference::Terms out;
  out.natural.resize(d.size());
  out.coarse.resize(d.size());
  std::size_t k = 0, kc = 0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (m.layout.has_coarse_stream()) {
      for (std::size_t j = 0; j < d.coarse[n].size(); ++j) out.coarse[n].push_back(t.scalar(terms.coarse[kc++]));
    }
    for (std::size_t j = 0; j < d.natural[n].size(); ++j) out.natural[n].push_back(t.scalar(terms.natural[k++]));
  }
  return out;
}

std::vector<EncodedDialogue> random_corpus(std::mt19937_64& rng, std::size_t n, bool coarse, int vocab = 6) {
  std::vector<EncodedDialogue> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(test::random_dialogue(rng, 2 + rng() % 2, vocab, vocab, 4, coarse));
  return out;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("config defaults, parsing and round trip") {
    ModelConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.decoder_hidden == 2000);
    CHECK(c.learning_rate == 0.0002);
    CHECK(c.bptt_tokens == 80);
    CHECK(c.natural_vocab_size == 20000);
    CHECK(c.coarse_vocab_size == 10000);

    std::istringstream in("# comment\nkind = hred\n\ndecoder_hidden = 7\nlearning_rate=0.5\n");
    const ModelConfig p = parse_config(in);
    CHECK(p.kind == ModelKind::hred);
    CHECK(p.decoder_hidden == 7);
    CHECK(p.learning_rate == 0.5);

    std::istringstream unknown("colour = blue\n");
    CHECK_THROWS_AS(parse_config(unknown), mrrnn::ConfigError);
    std::istringstream bad("decoder_hidden = many\n");
    CHECK_THROWS_AS(parse_config(bad), mrrnn::ConfigError);
    ModelConfig neg;
    set_config_value(neg, "learning_rate", "-1");
    CHECK_THROWS_AS(neg.validate(), mrrnn::ConfigError);

    ModelConfig odd = p;
    odd.learning_rate = 0.1 + 0.2;
    odd.coarse_decoder_gating = Gating::gru;
    odd.seed = 18446744073709551615ull;
    std::stringstream s;
    write_config(s, odd);
    CHECK(parse_config(s) == odd);
  }

  TEST_CASE("bundled configs load and validate") {
    std::size_t seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(test::kSource / "configs")) {
      if (entry.path().extension() != ".cfg") continue;
      ++seen;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW(load_config(entry.path()).validate());
    }
    CHECK(seen >= 2);
  }

  TEST_CASE("library forward pass matches the reference on every kind") {
    std::mt19937_64 rng(31);
    for (ModelKind kind : kAllKinds) {
      for (int variant = 0; variant < 4; ++variant) {
        ModelConfig c = test::tiny_config(kind, 3);
        c.coarse_embedding_dim = 2;
        c.prediction_hidden = 4;
        c.bidirectional_encoder = variant % 2 == 1;
        c.coarse_bidirectional_encoder = variant % 2 == 0;
        if (variant >= 2) {
          c.decoder_gating = Gating::gru;
          c.context_gating = Gating::lstm;
          c.encoder_gating = Gating::lstm;
          c.prediction_gating = Gating::lstm;
        }
        Model m = create_model(c, 6, 5);
        test::randomize(m.params, rng, 0.7);
        for (int trial = 0; trial < 5; ++trial) {
          const auto d = test::random_dialogue(rng, 3, 6, 5, 4, uses_coarse(kind));
          const auto expect = test::reference::forward(m.layout, m.params, d);
          const auto got = library_terms(m, d);
          for (std::size_t n = 0; n < d.size(); ++n) {
            REQUIRE(got.natural[n].size() == expect.natural[n].size());
            for (std::size_t j = 0; j < got.natural[n].size(); ++j) {
              CHECK(got.natural[n][j] == doctest::Approx(expect.natural[n][j]).epsilon(1e-12));
            }
            REQUIRE(got.coarse[n].size() == expect.coarse[n].size());
            for (std::size_t j = 0; j < got.coarse[n].size(); ++j) {
              CHECK(got.coarse[n][j] == doctest::Approx(expect.coarse[n][j]).epsilon(1e-12));
            }
          }
          CHECK(log_likelihood(m.layout, m.params, d).joint == doctest::Approx(expect.total()).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("zero parameters give uniform predictions") {
    Model lm = create_model(test::tiny_config(ModelKind::rnnlm), 4, 4);
    for (std::size_t i = 0; i < lm.params.size(); ++i) lm.params.at(i).setZero();
    CHECK(rnnlm_log_likelihood(lm, {3, 2, 1}) == doctest::Approx(3 * std::log(0.25)).epsilon(1e-15));

    Model mr = create_model(test::tiny_config(ModelKind::mrrnn), 7, 5);
    for (std::size_t i = 0; i < mr.params.size(); ++i) mr.params.at(i).setZero();
    EncodedDialogue d{{{3, 4, 1}, {5, 1}}, {{2, 1}, {3, 4, 1}}};
    const auto r = mrrnn_joint_log_likelihood(mr, d);
    CHECK(r.natural == doctest::Approx(5 * std::log(1.0 / 7)).epsilon(1e-14));
    CHECK(r.coarse == doctest::Approx(5 * std::log(1.0 / 5)).epsilon(1e-14));
    CHECK(r.tokens() == 10);
    CHECK(perplexity(r).natural == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(perplexity(r).coarse == doctest::Approx(5.0).epsilon(1e-12));
  }

  TEST_CASE("named entry points check the model kind") {
    Model hred = random_model(ModelKind::hred, 1);
    EncodedDialogue d{{{2, 1}}, {}};
    CHECK_NOTHROW(hred_log_likelihood(hred, d));
    CHECK_THROWS_AS(mrrnn_joint_log_likelihood(hred, d), mrrnn::ConfigError);
    CHECK_THROWS_AS(rnnlm_log_likelihood(hred, {2, 1}), mrrnn::ConfigError);
    Model mr = random_model(ModelKind::mrrnn, 1);
    CHECK_THROWS_AS(log_likelihood(mr.layout, mr.params, d), mrrnn::AlignmentError);
    EncodedDialogue oov{{{9, 1}}, {{2, 1}}};
    CHECK_THROWS_AS(log_likelihood(mr.layout, mr.params, oov), std::out_of_range);
  }

  TEST_CASE("joint log-likelihood is the sum of the two streams") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      Model m = random_model(ModelKind::mrrnn, rng());
      const auto d = test::random_dialogue(rng, 1 + rng() % 3, 5, 5, 5, true);
      const auto r = mrrnn_joint_log_likelihood(m, d);
      CHECK(r.joint == r.coarse + r.natural);
      const auto terms = library_terms(m, d);
      double c = 0, n = 0;
      for (const auto& u : terms.coarse)
        for (double v : u) c += v;
      for (const auto& u : terms.natural)
        for (double v : u) n += v;
      CHECK(r.coarse == c);
      CHECK(r.natural == n);
    }
  }

  TEST_CASE("causality: later utterances never change earlier terms") {
    std::mt19937_64 rng(12);
    for (ModelKind kind : kAllKinds) {
      for (int trial = 0; trial < 20; ++trial) {
        Model m = random_model(kind, rng());
        auto d = test::random_dialogue(rng, 3, 5, 5, 4, uses_coarse(kind));
        const auto base = library_terms(m, d);
        auto e = d;
        e.natural[2] = test::random_dialogue(rng, 1, 5, 5, 4, false).natural[0];
        if (uses_coarse(kind)) e.coarse[2] = test::random_dialogue(rng, 1, 5, 5, 4, false).natural[0];
        const auto moved = library_terms(m, e);
        for (std::size_t n = 0; n < 2; ++n) {
          CHECK(moved.natural[n] == base.natural[n]);
          CHECK(moved.coarse[n] == base.coarse[n]);
        }
      }
    }
  }

  TEST_CASE("hred_actent: w_n depends on past coarse sequences only") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
      Model m = random_model(ModelKind::hred_actent, rng());
      auto d = test::random_dialogue(rng, 3, 5, 5, 4, true);
      const auto base = library_terms(m, d);
      auto e = d;
      e.coarse[1] = {4, 3, 2, 1};
      const auto moved = library_terms(m, e);
      CHECK(moved.natural[0] == base.natural[0]);
      CHECK(moved.natural[1] == base.natural[1]);
      if (d.coarse[1] != e.coarse[1]) CHECK(moved.natural[2] != base.natural[2]);
    }
  }

  TEST_CASE("mrrnn: w_n is conditioned on z_n and not on later coarse sequences") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 20; ++trial) {
      Model m = random_model(ModelKind::mrrnn, rng());
      auto d = test::random_dialogue(rng, 3, 5, 5, 4, true);
      const auto base = library_terms(m, d);
      auto later = d;
      later.coarse[2] = {4, 3, 2, 1};
      const auto l = library_terms(m, later);
      CHECK(l.natural[1] == base.natural[1]);
      CHECK(l.coarse[1] == base.coarse[1]);
      auto now = d;
      now.coarse[1] = d.coarse[1] == std::vector<int>{4, 3, 2, 1} ? std::vector<int>{2, 1} : std::vector<int>{4, 3, 2, 1};
      const auto c = library_terms(m, now);
      CHECK(c.natural[0] == base.natural[0]);
      CHECK(c.natural[1] != base.natural[1]);
    }
  }

  TEST_CASE("truncated segments reproduce the full forward values") {
    std::mt19937_64 rng(15);
    for (ModelKind kind : kAllKinds) {
      Model m = random_model(kind, rng());
      for (int trial = 0; trial < 10; ++trial) {
        const auto d = test::random_dialogue(rng, 5, 5, 5, 5, uses_coarse(kind));
        const auto full = log_likelihood(m.layout, m.params, d);
        for (std::size_t budget : {1u, 4u, 9u, 100u}) {
          const auto segments = truncation_segments(d, budget);
          REQUIRE(!segments.empty());
          CHECK(segments.front().first == 0);
          CHECK(segments.back().second == d.size());
          auto carry = initial_carry<double>(m.layout);
          double c = 0, n = 0;
          for (std::size_t s = 0; s < segments.size(); ++s) {
            if (s) CHECK(segments[s].first == segments[s - 1].second);
            const auto [b, e] = segments[s];
            const std::size_t tokens = d.natural_tokens(b, e) + (uses_coarse(kind) ? d.coarse_tokens(b, e) : 0);
            CHECK((tokens <= budget || e - b == 1));
            Tape<double> t(m.params, false);
            const auto terms = forward_segment(t, m.layout, d, b, e, carry);
            for (Var v : terms.coarse) c += t.scalar(v);
            for (Var v : terms.natural) n += t.scalar(v);
          }
          CHECK(c == full.coarse);
          CHECK(n == full.natural);
        }
      }
    }
  }

  TEST_CASE("untruncated batch gradient equals the dialogue gradient") {
    std::mt19937_64 rng(16);
    for (ModelKind kind : kAllKinds) {
      Model m = random_model(kind, rng());
      const std::vector<EncodedDialogue> corpus{test::random_dialogue(rng, 3, 5, 5, 4, uses_coarse(kind))};
      std::vector<GradientSet<double>> scratch;
      GradientSet<double> total = m.params.zeros_like();
      const double ll = batch_gradient(m.layout, m.params, corpus, {0}, 1000, 1, scratch, total);
      GradientSet<double> direct = m.params.zeros_like();
      const double nll = negative_log_likelihood(m.layout, m.params, corpus[0], &direct);
      CHECK(ll == doctest::Approx(-nll).epsilon(1e-13));
      const double tokens = static_cast<double>(corpus[0].natural_tokens(0, 3) + corpus[0].coarse_tokens(0, 3));
      for (std::size_t i = 0; i < total.size(); ++i) {
        CHECK((total.at(i) * tokens - direct.at(i)).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  TEST_CASE("model gradients match finite differences") {
    for (ModelKind kind : kAllKinds) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        std::mt19937_64 rng(seed + 100);
        Model m = random_model(kind, seed, 5, 2);
        const auto d = test::random_dialogue(rng, 2, 5, 5, 3, uses_coarse(kind));
        auto loss = [&](const auto& p, auto* grads) { return negative_log_likelihood(m.layout, p, d, grads); };
        const auto r = mrrnn::neural::check_gradients(m.params, loss);
        CHECK_MESSAGE(r.max_relative_error < 1e-5, to_string(kind), " worst ", r.worst_parameter);
      }
    }
  }

  TEST_CASE("batch order is a deterministic stream of shuffles") {
    const auto a = batch_indices(5, 7, 3, 4);
    CHECK(a == batch_indices(5, 7, 3, 4));
    for (std::uint64_t epoch = 0; epoch < 5; ++epoch) {
      // With batch size dividing the corpus, each epoch visits every dialogue once.
      std::vector<int> seen(6, 0);
      for (std::uint64_t s = 0; s < 3; ++s) {
        for (std::size_t i : batch_indices(9, 6, 2, epoch * 3 + s)) ++seen.at(i);
      }
      CHECK(seen == std::vector<int>(6, 1));
    }
  }

  TEST_CASE("training is deterministic and thread-count independent") {
    std::mt19937_64 rng(17);
    const auto train_set = random_corpus(rng, 6, true);
    const auto valid_set = random_corpus(rng, 2, true);
    ModelConfig c = test::tiny_config(ModelKind::mrrnn, 4);
    c.learning_rate = 0.01;
    c.bptt_tokens = 6;
    c.batch_size = 3;
    c.max_steps = 12;
    c.validate_every = 4;
    c.patience = 100;
    auto run = [&](std::size_t threads, std::string& log) {
      Model m = create_model(c, 6, 6);
      std::ostringstream out;
      TrainHooks hooks;
      hooks.log = &out;
      const TrainState s = train(m, initial_train_state(m), train_set, valid_set, {Precision::double_precision, threads}, hooks);
      log = out.str();
      CHECK(s.step == 12);
      return m;
    };
    std::string l1, l2, l3;
    const Model a = run(1, l1);
    const Model b = run(1, l2);
    const Model t = run(3, l3);
    CHECK(bitwise_equal(a.params, b.params));
    CHECK(bitwise_equal(a.params, t.params));
    CHECK(l1 == l2);
    CHECK(l1 == l3);
    CHECK(l1.find("step 4 ") == 0);
  }

  TEST_CASE("resuming from a saved state matches an uninterrupted run") {
    std::mt19937_64 rng(18);
    const auto train_set = random_corpus(rng, 5, false);
    const auto valid_set = random_corpus(rng, 2, false);
    ModelConfig c = test::tiny_config(ModelKind::hred, 3);
    c.learning_rate = 0.01;
    c.batch_size = 2;
    c.validate_every = 3;
    c.max_steps = 9;
    Model full = create_model(c, 6, 6);
    const TrainState fs = train(full, initial_train_state(full), train_set, valid_set);

    ModelConfig half = c;
    half.max_steps = 6;
    Model part = create_model(half, 6, 6);
    TrainState ps = train(part, initial_train_state(part), train_set, valid_set);
    part.config.max_steps = 9;
    ps = train(part, ps, train_set, valid_set);
    CHECK(ps.step == fs.step);
    CHECK(ps.best_valid == fs.best_valid);
    CHECK(bitwise_equal(part.params, full.params));
  }

  TEST_CASE("patience 0 stops at the first validation without improvement") {
    std::mt19937_64 rng(19);
    const auto train_set = random_corpus(rng, 4, false);
    const auto valid_set = random_corpus(rng, 2, false);
    ModelConfig c = test::tiny_config(ModelKind::hred, 3);
    c.learning_rate = 1e-300;  // updates vanish below one ulp, so validation never improves
    c.patience = 0;
    c.validate_every = 2;
    c.max_steps = 100;
    Model m = create_model(c, 6, 6);
    const TrainState s = train(m, initial_train_state(m), train_set, valid_set);
    CHECK(s.stopped);
    CHECK(s.step == 4);
    CHECK(s.best_step == 2);
    CHECK(s.bad_count == 1);
  }

  TEST_CASE("training lowers the loss in both precisions") {
    std::mt19937_64 rng(20);
    const auto train_set = random_corpus(rng, 3, true);
    for (Precision p : {Precision::double_precision, Precision::single}) {
      ModelConfig c = test::tiny_config(ModelKind::hred_actent, 6);
      c.learning_rate = 0.05;
      c.batch_size = 3;
      c.validate_every = 100;
      c.max_steps = 100;
      Model m = create_model(c, 6, 6);
      const double before = log_likelihood(m.layout, m.params, train_set).joint;
      train(m, initial_train_state(m), train_set, train_set, {p, 1});
      const double after = log_likelihood(m.layout, m.params, train_set).joint;
      CHECK(after > before + 1.0);
    }
    CHECK(parse_precision("single") == Precision::single);
    CHECK_THROWS_AS(parse_precision("half"), mrrnn::ConfigError);
  }

  TEST_CASE("non-finite parameters abort training") {
    std::mt19937_64 rng(21);
    const auto train_set = random_corpus(rng, 2, false);
    Model m = create_model(test::tiny_config(ModelKind::hred), 6, 6);
    m.params.at(0)(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train(m, initial_train_state(m), train_set, train_set), mrrnn::NumericalError);
  }
}
