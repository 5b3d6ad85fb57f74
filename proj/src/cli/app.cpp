#include "mrrnn/cli/app.hpp"

#include "mrrnn/cli/checkpoint.hpp"
#include "mrrnn/errors.hpp"
#include "mrrnn/evaluation/metrics.hpp"
#include "mrrnn/extraction/extraction.hpp"
#include "mrrnn/generation/generate.hpp"
#include "mrrnn/parallel.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace mrrnn::cli {
namespace {

namespace fs = std::filesystem;
using corpus::Dialogue;

struct Globals {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string precision = "double";
};

void require_file(const std::string& path, std::string_view what) {
  if (path.empty()) return;
  if (!fs::is_regular_file(path)) throw ResourceError(std::string(what) + " not found: " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

/// Output file or the given stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      out_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw ResourceError("cannot write " + path);
      out_ = file_.get();
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

models::ModelConfig effective_config(const Globals& g) {
  models::ModelConfig c;
  if (!g.config.empty()) {
    require_file(g.config, "config file");
    c = models::load_config(g.config);
  }
  for (const auto& o : g.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
    auto trim = [](std::string s) {
      while (!s.empty() && s.back() == ' ') s.pop_back();
      while (!s.empty() && s.front() == ' ') s.erase(s.begin());
      return s;
    };
    models::set_config_value(c, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  if (g.seed) c.seed = *g.seed;
  c.validate();
  return c;
}

std::vector<Dialogue> load_dialogues(const std::string& path, const std::string& coarse_path, bool need_coarse,
                                     std::string_view what) {
  require_file(path, what);
  auto dialogues = corpus::load_corpus(path);
  if (dialogues.empty()) throw ResourceError(std::string(what) + " is empty: " + path);
  if (need_coarse) {
    if (coarse_path.empty()) throw ConfigError(std::string(what) + ": this model needs an aligned coarse file");
    require_file(coarse_path, "coarse file");
    std::ifstream in(coarse_path, std::ios::binary);
    corpus::attach_coarse(dialogues, in);
  } else if (!coarse_path.empty()) {
    throw ConfigError(std::string(what) + ": a coarse file was given but the model does not read coarse tokens");
  }
  return dialogues;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---- extract ---------------------------------------------------------------

struct ExtractArgs {
  std::string input, output, resources, mode = "actent", domain = "ubuntu", tags;
};

std::vector<std::vector<extraction::TaggedToken>> parse_tag_line(const std::string& line, std::size_t n) {
  std::vector<std::vector<extraction::TaggedToken>> segments(1);
  for (const auto& tok : corpus::split_whitespace(line)) {
    if (tok == corpus::kEndOfUtterance) {
      segments.emplace_back();
      continue;
    }
    try {
      auto parsed = extraction::parse_tagged(tok);
      segments.back().push_back(std::move(parsed.front()));
    } catch (const ResourceError& e) {
      throw ResourceError("tags line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (segments.back().empty()) segments.pop_back();
  return segments;
}

void cmd_extract(const Globals& g, const ExtractArgs& a, std::ostream& out) {
  require_file(a.input, "input file");
  require_file(a.tags, "tags file");
  if (!fs::is_directory(a.resources)) throw ResourceError("resource directory not found: " + a.resources);
  const auto procedure = extraction::parse_procedure(a.mode);
  const auto domain = corpus::parse_domain(a.domain);
  const auto resources = extraction::ExtractionResources::load(a.resources, domain);
  const auto dialogues = corpus::load_corpus(a.input);
  if (dialogues.empty()) throw ResourceError("input file is empty: " + a.input);
  std::vector<std::string> tag_lines;
  if (!a.tags.empty()) {
    tag_lines = read_lines(a.tags);
    if (tag_lines.size() != dialogues.size()) {
      throw AlignmentError("tags file has " + std::to_string(tag_lines.size()) + " lines, input has " +
                           std::to_string(dialogues.size()));
    }
  }
  std::vector<std::string> lines(dialogues.size());
  parallel_for(dialogues.size(), g.threads, [&](std::size_t i) {
    const auto& d = dialogues[i];
    std::vector<std::vector<extraction::TaggedToken>> tags;
    if (!tag_lines.empty()) {
      tags = parse_tag_line(tag_lines[i], i + 1);
      if (tags.size() != d.utterances.size()) {
        throw AlignmentError("line " + std::to_string(i + 1) + ": " + std::to_string(tags.size()) +
                             " tagged utterances for " + std::to_string(d.utterances.size()));
      }
    }
    std::vector<corpus::CoarseSequence> coarse;
    for (std::size_t u = 0; u < d.utterances.size(); ++u) {
      std::optional<std::vector<extraction::TaggedToken>> t;
      if (!tags.empty()) t = tags[u];
      try {
        coarse.push_back(extraction::extract(d.utterances[u].tokens, procedure, domain, resources, t));
      } catch (const AlignmentError& e) {
        throw AlignmentError("line " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    lines[i] = corpus::format_coarse_line(coarse);
  });
  Sink sink(a.output, out);
  for (const auto& l : lines) *sink << l << '\n';
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string train, train_coarse, valid, valid_coarse, output, log;
  bool resume = false;
};

void cmd_train(const Globals& g, const TrainArgs& a, std::ostream& out) {
  models::ModelConfig config = effective_config(g);
  const fs::path last = a.output + ".last";
  const std::string log_path = a.log.empty() ? a.output + ".log" : a.log;
  const bool resuming = a.resume && fs::exists(last);

  models::Model model;
  models::TrainState state;
  if (resuming) {
    Checkpoint cp = load_checkpoint(last);
    if (!cp.train) throw ResourceError(last.string() + " has no training state");
    const std::size_t max_steps = config.max_steps;
    config = cp.model.config;
    config.max_steps = max_steps;
    model = std::move(cp.model);
    model.config = config;
    state = std::move(*cp.train);
  }
  const bool coarse = models::uses_coarse(config.kind);
  const auto train_dialogues = load_dialogues(a.train, a.train_coarse, coarse, "training corpus");
  const auto valid_dialogues = load_dialogues(a.valid, a.valid_coarse, coarse, "validation corpus");
  if (!resuming) {
    auto natural = corpus::build_vocabulary(train_dialogues, config.natural_vocab_size, corpus::Level::natural);
    corpus::Vocabulary coarse_vocab;
    if (coarse) coarse_vocab = corpus::build_vocabulary(train_dialogues, config.coarse_vocab_size, corpus::Level::coarse);
    model = models::create_model(config, std::move(natural), std::move(coarse_vocab));
    state = models::initial_train_state(model);
  }
  const auto train_set = models::encode_corpus(model, train_dialogues);
  const auto valid_set = models::encode_corpus(model, valid_dialogues);

  std::ofstream log(log_path, std::ios::binary | (resuming ? std::ios::app : std::ios::trunc));
  if (!log) throw ResourceError("cannot write log " + log_path);
  models::TrainHooks hooks;
  hooks.log = &log;
  hooks.on_improvement = [&](const models::Model& m, const models::TrainState&) { save_checkpoint(a.output, m); };
  hooks.on_validation = [&](const models::Model& m, const models::TrainState& s) { save_checkpoint(last, m, &s); };
  models::TrainOptions options{models::parse_precision(g.precision), g.threads};
  state = models::train(model, std::move(state), train_set, valid_set, options, hooks);
  save_checkpoint(last, model, &state);
  out << "steps\t" << state.step << '\n';
  out << "best_step\t" << state.best_step << '\n';
  out << "best_valid_ll\t" << fixed6(state.best_valid) << '\n';
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
  std::string checkpoint, input, coarse, output;
  std::size_t beam = 5, max_len = 50, coarse_max_len = 20;
  bool no_unk = false;
};

void cmd_generate(const Globals& g, const GenerateArgs& a, std::ostream& out) {
  require_file(a.checkpoint, "checkpoint");
  require_file(a.input, "context file");
  if (a.beam < 1 || a.max_len < 1 || a.coarse_max_len < 1) throw ConfigError("beam and lengths must be positive");
  const Checkpoint cp = load_checkpoint(a.checkpoint);
  const models::Model& model = cp.model;
  const auto contexts = load_dialogues(a.input, a.coarse, models::uses_coarse(model.config.kind), "context file");
  const auto encoded = models::encode_corpus(model, contexts);
  generation::ResponseOptions options;
  options.natural = generation::GenerationOptions{a.beam, a.max_len, a.no_unk};
  options.coarse = generation::GenerationOptions{a.beam, a.coarse_max_len, a.no_unk};
  std::vector<std::string> lines(encoded.size());
  parallel_for(encoded.size(), g.threads, [&](std::size_t i) {
    const auto r = generation::generate_response(model, encoded[i], options);
    std::string coarse_text = r.coarse.tokens.empty() ? "" : generation::render(model.coarse_vocab, r.coarse.tokens);
    lines[i] = coarse_text + '\t' + generation::render(model.natural_vocab, r.natural.tokens) + '\t' +
               fixed6(r.natural.cost);
  });
  Sink sink(a.output, out);
  for (const auto& l : lines) *sink << l << '\n';
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string pred, truth, pred_coarse, truth_coarse, resources, mode = "actent", domain = "ubuntu", embeddings,
      output;
};

evaluation::Tokens response_tokens(const std::string& text) {
  evaluation::Tokens out;
  for (auto& t : corpus::split_whitespace(text)) {
    if (t != corpus::kEndOfUtterance) out.push_back(std::move(t));
  }
  return out;
}

corpus::CoarseSequence coarse_tokens(const std::string& text) { return corpus::CoarseSequence{response_tokens(text)}; }

void cmd_evaluate(const Globals&, const EvaluateArgs& a, std::ostream& out) {
  require_file(a.pred, "prediction file");
  require_file(a.truth, "truth file");
  require_file(a.pred_coarse, "predicted coarse file");
  require_file(a.truth_coarse, "truth coarse file");
  require_file(a.embeddings, "embedding file");
  if (!a.resources.empty() && !fs::is_directory(a.resources)) {
    throw ResourceError("resource directory not found: " + a.resources);
  }
  const auto pred_lines = read_lines(a.pred);
  const auto truth_lines = read_lines(a.truth);
  if (pred_lines.size() != truth_lines.size()) {
    throw AlignmentError("prediction file has " + std::to_string(pred_lines.size()) + " lines, truth file has " +
                         std::to_string(truth_lines.size()));
  }
  if (pred_lines.empty()) throw ResourceError("prediction file is empty: " + a.pred);
  evaluation::EvaluationInput input;
  std::vector<std::string> generated_coarse;
  for (const auto& l : pred_lines) {
    // generate output: coarse<TAB>utterance<TAB>cost
    const auto tab = l.find('\t');
    if (tab != std::string::npos) {
      const auto tab2 = l.find('\t', tab + 1);
      generated_coarse.push_back(l.substr(0, tab));
      input.predicted.push_back(response_tokens(l.substr(tab + 1, tab2 == std::string::npos ? std::string::npos
                                                                                           : tab2 - tab - 1)));
    } else {
      input.predicted.push_back(response_tokens(l));
    }
  }
  for (const auto& l : truth_lines) input.truth.push_back(response_tokens(l));

  auto aligned = [&](const std::string& path, std::size_t n) {
    auto lines = read_lines(path);
    if (lines.size() != n) {
      throw AlignmentError(path + " has " + std::to_string(lines.size()) + " lines, expected " + std::to_string(n));
    }
    std::vector<corpus::CoarseSequence> out;
    for (const auto& l : lines) out.push_back(coarse_tokens(l));
    return out;
  };
  std::optional<extraction::ExtractionResources> resources;
  const auto domain = corpus::parse_domain(a.domain);
  const auto procedure = extraction::parse_procedure(a.mode);
  if (!a.resources.empty()) resources = extraction::ExtractionResources::load(a.resources, domain);
  auto extract_all = [&](const std::vector<evaluation::Tokens>& responses) {
    std::vector<corpus::CoarseSequence> out;
    for (const auto& r : responses) {
      out.push_back(r.empty() ? corpus::CoarseSequence{}
                              : extraction::extract(r, procedure, domain, *resources));
    }
    return out;
  };
  if (!a.truth_coarse.empty()) {
    input.truth_coarse = aligned(a.truth_coarse, truth_lines.size());
  } else if (resources) {
    input.truth_coarse = extract_all(input.truth);
  }
  if (!a.pred_coarse.empty()) {
    input.predicted_coarse = aligned(a.pred_coarse, pred_lines.size());
  } else if (resources) {
    input.predicted_coarse = extract_all(input.predicted);
  } else if (generated_coarse.size() == pred_lines.size() && !input.truth_coarse.empty()) {
    for (const auto& c : generated_coarse) input.predicted_coarse.push_back(coarse_tokens(c));
  }
  if (input.truth_coarse.empty() != input.predicted_coarse.empty()) {
    throw ConfigError("coarse metrics need coarse sequences for both predictions and truth");
  }
  std::optional<evaluation::EmbeddingTable> table;
  if (!a.embeddings.empty()) table = evaluation::EmbeddingTable::load(a.embeddings);
  if (input.truth_coarse.empty() && !table) {
    throw ConfigError("nothing to evaluate: give coarse files, --resources or --embeddings");
  }
  const auto report = evaluation::evaluate(input, table ? &*table : nullptr);
  Sink sink(a.output, out);
  report.write(*sink);
}

// ---- perplexity ------------------------------------------------------------

struct PerplexityArgs {
  std::string checkpoint, input, coarse;
};

void cmd_perplexity(const Globals& g, const PerplexityArgs& a, std::ostream& out) {
  require_file(a.checkpoint, "checkpoint");
  const Checkpoint cp = load_checkpoint(a.checkpoint);
  const auto dialogues = load_dialogues(a.input, a.coarse, models::uses_coarse(cp.model.config.kind), "input corpus");
  const auto encoded = models::encode_corpus(cp.model, dialogues);
  std::vector<models::LikelihoodReport> parts(encoded.size());
  const bool single = models::parse_precision(g.precision) == models::Precision::single;
  const auto params_f = single ? cp.model.params.cast<float>() : neural::ParameterSet<float>{};
  parallel_for(encoded.size(), g.threads, [&](std::size_t i) {
    parts[i] = single ? models::log_likelihood(cp.model.layout, params_f, encoded[i])
                      : models::log_likelihood(cp.model.layout, cp.model.params, encoded[i]);
  });
  models::LikelihoodReport total;
  for (const auto& r : parts) {
    total.coarse += r.coarse;
    total.natural += r.natural;
    total.coarse_tokens += r.coarse_tokens;
    total.natural_tokens += r.natural_tokens;
  }
  total.joint = total.coarse + total.natural;
  const auto p = models::perplexity(total);
  evaluation::MetricReport report;
  report.add("natural_ll", total.natural);
  report.add("natural_tokens", static_cast<double>(total.natural_tokens));
  report.add("natural_perplexity", p.natural);
  if (total.coarse_tokens) {
    report.add("coarse_ll", total.coarse);
    report.add("coarse_tokens", static_cast<double>(total.coarse_tokens));
    report.add("coarse_perplexity", p.coarse);
    report.add("joint_ll", total.joint);
    report.add("joint_perplexity", p.joint);
  }
  report.write(out);
}

// ---- ngram-bits ------------------------------------------------------------

struct NgramArgs {
  std::string input;
  int order = 0;
};

void cmd_ngram(const Globals&, const NgramArgs& a, std::ostream& out) {
  require_file(a.input, "coarse file");
  std::vector<evaluation::Tokens> sequences;
  std::size_t n = 0;
  for (const auto& line : read_lines(a.input)) {
    ++n;
    for (auto& c : corpus::parse_coarse_line(line, n)) sequences.push_back(std::move(c.tokens));
  }
  if (sequences.empty()) throw ResourceError("coarse file is empty: " + a.input);
  evaluation::MetricReport report;
  if (a.order == 0 || a.order == 1) report.add("unigram_bits", evaluation::ngram_bits_per_word(sequences, 1));
  if (a.order == 0 || a.order == 2) report.add("bigram_bits", evaluation::ngram_bits_per_word(sequences, 2));
  report.write(out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiresolution dialogue models: coarse token extraction, training, generation, evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Model/training config file (key = value lines)");
  app.add_option("--set", g.overrides, "Override one config key: key=value (repeatable)");
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads; 1 gives bit-reproducible runs")->check(CLI::PositiveNumber);
  app.add_option("--precision", g.precision, "single or double")->check(CLI::IsMember({"single", "double"}));

  ExtractArgs ea;
  auto* extract = app.add_subcommand("extract", "Write the coarse sequence of every utterance");
  extract->add_option("--input", ea.input, "Dialogue file")->required();
  extract->add_option("--output", ea.output, "Coarse file (default: stdout)");
  extract->add_option("--resources", ea.resources, "Resource directory")->required();
  extract->add_option("--mode", ea.mode, "noun or actent");
  extract->add_option("--domain", ea.domain, "ubuntu or twitter");
  extract->add_option("--tags", ea.tags, "Pre-tagged file aligned with the input (surface/TAG tokens)");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model and write the best checkpoint");
  train->add_option("--train", ta.train, "Training dialogues")->required();
  train->add_option("--train-coarse", ta.train_coarse, "Coarse file aligned with --train");
  train->add_option("--valid", ta.valid, "Validation dialogues")->required();
  train->add_option("--valid-coarse", ta.valid_coarse, "Coarse file aligned with --valid");
  train->add_option("--output", ta.output, "Best checkpoint; <output>.last holds the resume state")->required();
  train->add_option("--log", ta.log, "Training log (default: <output>.log)");
  train->add_flag("--resume", ta.resume, "Continue from <output>.last when it exists");

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "Generate the next utterance for every context");
  generate->add_option("--checkpoint", ga.checkpoint, "Model checkpoint")->required();
  generate->add_option("--input", ga.input, "Context dialogues")->required();
  generate->add_option("--coarse", ga.coarse, "Coarse file aligned with the contexts");
  generate->add_option("--output", ga.output, "Output file (default: stdout)");
  generate->add_option("--beam", ga.beam, "Beam width");
  generate->add_option("--max-len", ga.max_len, "Maximum natural-language length, end token included");
  generate->add_option("--coarse-max-len", ga.coarse_max_len, "Maximum coarse length, end token included");
  generate->add_flag("--no-unk", ga.no_unk, "Never generate the unknown token");

  EvaluateArgs va;
  auto* evaluate = app.add_subcommand("evaluate", "Score responses against ground truth");
  evaluate->add_option("--pred", va.pred, "Predicted responses, one per line (generate output accepted)")->required();
  evaluate->add_option("--truth", va.truth, "Ground-truth responses, one per line")->required();
  evaluate->add_option("--pred-coarse", va.pred_coarse, "Coarse sequences of the predictions");
  evaluate->add_option("--truth-coarse", va.truth_coarse, "Coarse sequences of the ground truth");
  evaluate->add_option("--resources", va.resources, "Extract coarse sequences with these resources");
  evaluate->add_option("--mode", va.mode, "noun or actent (with --resources)");
  evaluate->add_option("--domain", va.domain, "ubuntu or twitter (with --resources)");
  evaluate->add_option("--embeddings", va.embeddings, "Word vectors, 'word v1 ... vd' per line");
  evaluate->add_option("--output", va.output, "Report file (default: stdout)");

  PerplexityArgs pa;
  auto* perplexity = app.add_subcommand("perplexity", "Per-token perplexity per stream");
  perplexity->add_option("--checkpoint", pa.checkpoint, "Model checkpoint")->required();
  perplexity->add_option("--input", pa.input, "Dialogues")->required();
  perplexity->add_option("--coarse", pa.coarse, "Coarse file aligned with --input");

  NgramArgs na;
  auto* ngram = app.add_subcommand("ngram-bits", "Unigram/bigram training bits per word of a coarse file");
  ngram->add_option("--input", na.input, "Coarse file")->required();
  ngram->add_option("--order", na.order, "1 or 2 (default: both)")->check(CLI::Range(1, 2));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*extract) cmd_extract(g, ea, out);
    if (*train) cmd_train(g, ta, out);
    if (*generate) cmd_generate(g, ga, out);
    if (*evaluate) cmd_evaluate(g, va, out);
    if (*perplexity) cmd_perplexity(g, pa, out);
    if (*ngram) cmd_ngram(g, na, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  }
  return 0;
}

}  // namespace mrrnn::cli
