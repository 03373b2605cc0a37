// lemming: train, annotate, evaluate and inspect models from the command line.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lemming/annotate.hpp"
#include "lemming/baselines.hpp"
#include "lemming/corpus.hpp"
#include "lemming/joint.hpp"
#include "lemming/lemmatizer.hpp"
#include "lemming/log.hpp"
#include "lemming/model_io.hpp"
#include "lemming/synthetic.hpp"
#include "lemming/tagger.hpp"

namespace {

using namespace lemming;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kFormats = {"conll09", "tsv"};

struct TrainArgs {
  std::string model;
  std::string train;
  std::string format = "conll09";
  std::string pretrained_tagger;
  std::vector<std::string> lexicons;
  std::vector<std::string> rewrites;
  std::size_t max_train_tokens = 0;
  std::uint64_t seed = 42;
  std::size_t order = 2;
  double prune_threshold = 1e-4;
  std::size_t tagger_epochs = 10;
  std::size_t joint_epochs = 10;
  std::size_t jck_iterations = 10;
  std::size_t min_tree_count = 2;
  double l2 = -1.0;
  bool init_theta = false;
  bool no_pretrain = false;
  std::string output;
};

std::pair<std::string, std::string> split_assignment(const std::string& s, const char* what) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
    throw UsageError(std::string(what) + " must look like name=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

ReadOptions read_options(const std::vector<std::string>& rewrites) {
  ReadOptions opt;
  for (const auto& r : rewrites) {
    auto [form, lemma] = split_assignment(r, "--lemma-rewrite");
    opt.lemma_rewrites[to_lower(form)] = lemma;
  }
  return opt;
}

int cmd_train(const TrainArgs& a) {
  const auto format = parse_format(a.format);
  Corpus corpus = read_corpus(a.train, format, std::nullopt, read_options(a.rewrites));
  if (a.max_train_tokens > 0) corpus = limit_tokens(corpus, a.max_train_tokens);
  log::info("read " + std::to_string(token_count(corpus)) + " training tokens");

  std::vector<Lexicon> lexicons;
  for (const auto& spec : a.lexicons) {
    auto [name, path] = split_assignment(spec, "--lexicon");
    lexicons.push_back(Lexicon::load(name, path));
  }

  TaggerConfig tc;
  tc.order = a.order;
  tc.prune_threshold = a.prune_threshold;
  tc.epochs = a.tagger_epochs;
  tc.seed = a.seed;
  LemmatizerConfig lc;
  lc.min_pair_count = a.min_tree_count;
  if (a.l2 >= 0.0) lc.l2 = a.l2;
  JckConfig jc;
  jc.iterations = a.jck_iterations;
  jc.seed = a.seed;

  std::optional<TaggerModel> pretrained;
  if (!a.pretrained_tagger.empty()) {
    auto m = load_model(a.pretrained_tagger);
    if (!m.tagger) throw ModelError("model " + a.pretrained_tagger + " contains no tagger");
    pretrained = std::move(*m.tagger);
  }
  auto tagger = [&] { return pretrained ? *pretrained : train_tagger(corpus, tc); };

  ModelFile out;
  out.kind = a.model == "pipeline" ? "lemmatizer" : a.model;
  out.config = {{"train", a.train},
                {"format", a.format},
                {"seed", a.seed},
                {"max_train_tokens", a.max_train_tokens},
                {"order", a.order},
                {"prune_threshold", a.prune_threshold},
                {"tagger_epochs", a.tagger_epochs},
                {"min_tree_count", a.min_tree_count},
                {"lexicons", a.lexicons},
                {"pretrained_tagger", a.pretrained_tagger}};
  if (out.kind == "tagger") {
    out.tagger = tagger();
  } else if (out.kind == "lemmatizer") {
    out.tagger = tagger();
    out.lemmatizer = train_lemmatizer(lemma_instances(corpus), lc, lexicons);
  } else if (out.kind == "joint") {
    JointConfig cfg;
    cfg.epochs = a.joint_epochs;
    cfg.seed = a.seed;
    cfg.init_theta_from_lemmatizer = a.init_theta;
    cfg.lemmatizer = lc;
    cfg.tagger = tc;
    std::optional<LemmatizerModel> pipeline;
    if (a.init_theta) pipeline = train_lemmatizer(lemma_instances(corpus), lc, lexicons);
    std::optional<TaggerModel> start;
    if (!a.no_pretrain) start = tagger();
    auto joint = train_joint(corpus, start, cfg, lexicons, pipeline ? &*pipeline : nullptr);
    out.tagger = std::move(joint.tagger);
    out.lemmatizer = std::move(joint.lemmatizer);
    out.provenance = joint.provenance;
    out.config["joint_epochs"] = a.joint_epochs;
    out.config["init_theta_from_lemmatizer"] = a.init_theta;
  } else {
    out.baseline = train_baseline(corpus, out.kind == "jck", jc);
    if (pretrained) out.tagger = *pretrained;
    out.config["jck_iterations"] = a.jck_iterations;
  }
  save_model(out, a.output);
  log::info("wrote " + a.output);
  return 0;
}

int cmd_annotate(const std::string& model_path, const std::string& input, const std::string& output,
                 const std::string& format_name, std::size_t threads) {
  const auto format = parse_format(format_name);
  const Annotator annotator(load_model(model_path));
  const auto corpus = read_corpus(input, format);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  write_corpus(output, annotator.annotate(corpus, threads), format);
  return 0;
}

json accuracy_json(const Accuracy& a) {
  json j{{"correct", a.correct}, {"total", a.total}};
  j["accuracy"] = a.value() ? json(*a.value()) : json(nullptr);
  return j;
}

std::string percent(const Accuracy& a) {
  if (!a.value()) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * *a.value();
  return s.str();
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path, const std::string& vocab_path,
                 const std::string& format_name, bool as_json) {
  const auto format = parse_format(format_name);
  const auto gold = read_corpus(gold_path, format);
  const auto pred = read_corpus(pred_path, format);
  const auto vocab = vocabulary(read_corpus(vocab_path, format));
  const auto r = evaluate(gold, pred, vocab);
  if (as_json) {
    json j{{"tokens", r.tokens},
           {"unknown_tokens", r.unknown_tokens},
           {"unknown_rate", r.unknown_rate()},
           {"tag", {{"all", accuracy_json(r.tag_all)}, {"unk", accuracy_json(r.tag_unk)}}},
           {"lemma", {{"all", accuracy_json(r.lemma_all)}, {"unk", accuracy_json(r.lemma_unk)}}},
           {"tag+lemma", {{"all", accuracy_json(r.joint_all)}, {"unk", accuracy_json(r.joint_unk)}}}};
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::cout << std::left << std::setw(12) << "metric" << std::right << std::setw(8) << "all" << std::setw(8) << "unk"
            << '\n';
  auto row = [](const char* name, const Accuracy& all, const Accuracy& unk) {
    std::cout << std::left << std::setw(12) << name << std::right << std::setw(8) << percent(all) << std::setw(8)
              << percent(unk) << '\n';
  };
  row("tag", r.tag_all, r.tag_unk);
  row("lemma", r.lemma_all, r.lemma_unk);
  row("tag+lemma", r.joint_all, r.joint_unk);
  std::cout << "tokens " << r.tokens << ", unknown " << r.unknown_tokens << " (" << std::fixed << std::setprecision(2)
            << 100.0 * r.unknown_rate() << "%)\n";
  return 0;
}

template <class Name>
void print_top(const std::vector<double>& w, std::size_t k, Name name) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] != 0.0) idx.push_back(i);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), [&](auto a, auto b) {
    if (std::abs(w[a]) != std::abs(w[b])) return std::abs(w[a]) > std::abs(w[b]);
    return a < b;
  });
  for (std::size_t r = 0; r < k; ++r)
    std::cout << "  " << std::setw(12) << std::setprecision(6) << w[idx[r]] << "  " << name(idx[r]) << '\n';
}

int cmd_inspect(const std::string& model_path, std::size_t top, bool trees) {
  const auto m = load_model(model_path);
  std::cout << "kind: " << m.kind << '\n';
  if (!m.provenance.empty()) std::cout << "provenance: " << m.provenance << '\n';
  std::cout << "config: " << m.config.dump() << '\n';
  if (m.tagger) {
    const auto& t = *m.tagger;
    std::cout << "tagger: " << t.tag_count() << " tags, order " << t.order << ", prune threshold "
              << t.prune_threshold << ", " << t.observations.size() << " observation features, "
              << t.trigrams.size() << " trigrams, gold survival " << t.gold_survival << '\n';
    if (top > 0) {
      std::cout << "heaviest tagger weights:\n";
      print_top(t.weights, top, [&](std::size_t i) { return t.weight_name(i); });
    }
  }
  if (m.lemmatizer) {
    const auto& l = *m.lemmatizer;
    std::cout << "lemmatizer: " << l.inventory.size() << " edit trees, " << l.seen.size() << " seen forms, "
              << l.space.base.size() << " base features x " << l.space.conjunction_count() << " conjunctions, "
              << l.lexicons.size() << " lexicons\n";
    if (trees)
      for (const auto& e : l.inventory.entries()) std::cout << "  " << std::setw(8) << e.count << "  " << e.tree.render() << '\n';
    if (top > 0) {
      std::cout << "heaviest lemmatizer weights:\n";
      print_top(l.theta, top, [&](std::size_t i) { return l.space.name(static_cast<std::uint32_t>(i)); });
    }
  }
  if (m.baseline) {
    std::cout << "simple: " << m.baseline->simple.counts().size() << " form-POS pairs\n";
    if (const auto& j = m.baseline->jck) {
      std::cout << "jck: " << j->symbol_count() << " output symbols, " << j->features.size() << " context features\n ";
      for (const auto& s : j->alphabet) std::cout << ' ' << render_jck_symbol(s);
      std::cout << '\n';
      if (top > 0) {
        std::cout << "heaviest jck weights:\n";
        print_top(j->weights, top, [&](std::size_t i) {
          const std::size_t y_count = j->symbol_count();
          if (i < j->emission_offset()) {
            const std::size_t prev = i / y_count;
            return "transition:" + (prev == 0 ? std::string("<s>") : render_jck_symbol(j->alphabet[prev - 1])) + ">" +
                   render_jck_symbol(j->alphabet[i % y_count]);
          }
          const std::size_t e = i - j->emission_offset();
          return j->features.name(static_cast<std::uint32_t>(e / y_count)) + "&" +
                 render_jck_symbol(j->alphabet[e % y_count]);
        });
      }
    }
  }
  return 0;
}

int cmd_generate(std::uint64_t seed, const SyntheticSpec& spec, const std::string& dir, const std::string& format_name) {
  const auto format = parse_format(format_name);
  const auto data = generate_synthetic_corpus(seed, spec);
  std::filesystem::create_directories(dir);
  const std::string ext = format == CorpusFormat::kTsv ? ".tsv" : ".conll";
  write_corpus(dir + "/train" + ext, data.train, format);
  write_corpus(dir + "/dev" + ext, data.dev, format);
  write_corpus(dir + "/test" + ext, data.test, format);
  std::ofstream lex(dir + "/lexicon.txt");
  for (const auto& w : data.lexicon) lex << w << '\n';
  if (!lex) throw std::runtime_error("cannot write " + dir + "/lexicon.txt");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lemming: joint lemmatization and morphological tagging"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--model", ta.model, "Model type")
      ->required()
      ->check(CLI::IsMember({"simple", "jck", "lemmatizer", "pipeline", "tagger", "joint"}));
  train->add_option("--train", ta.train, "Training corpus")->required()->check(CLI::ExistingFile);
  train->add_option("--format", ta.format, "Corpus format")->check(CLI::IsMember(kFormats))->capture_default_str();
  train->add_option("--pretrained-tagger", ta.pretrained_tagger, "Model file whose tagger is reused")
      ->check(CLI::ExistingFile);
  train->add_option("--lexicon", ta.lexicons, "Word list as name=path (repeatable)");
  train->add_option("--lemma-rewrite", ta.rewrites, "Replace the lemma of a form at read time, form=lemma");
  train->add_option("--max-train-tokens", ta.max_train_tokens, "Use only the first N tokens (0: all)");
  train->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
  train->add_option("--order", ta.order, "Tagger order")->check(CLI::Range(1, 2))->capture_default_str();
  train->add_option("--prune-threshold", ta.prune_threshold, "Tagger pruning threshold (0: none)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train->add_option("--tagger-epochs", ta.tagger_epochs, "SGD epochs per tagger stage")->capture_default_str();
  train->add_option("--joint-epochs", ta.joint_epochs, "SGD epochs for the joint model")->capture_default_str();
  train->add_option("--jck-iterations", ta.jck_iterations, "Perceptron iterations")->capture_default_str();
  train->add_option("--min-tree-count", ta.min_tree_count, "Minimum form-lemma pairs per edit tree")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--l2", ta.l2, "Lemmatizer L2 strength (default 1/#tokens)")->check(CLI::NonNegativeNumber);
  train->add_flag("--init-theta-from-lemmatizer", ta.init_theta, "Start joint lemma weights from a pipeline lemmatizer");
  train->add_flag("--no-pretrain", ta.no_pretrain, "Joint model: start tagger weights at zero");
  train->add_option("-o,--output", ta.output, "Output model file")->required();

  std::string a_model, a_input, a_output, a_format = "conll09";
  std::size_t a_threads = 0;
  auto* annotate = app.add_subcommand("annotate", "Fill tag and lemma columns");
  annotate->add_option("-m,--model", a_model, "Model file")->required()->check(CLI::ExistingFile);
  annotate->add_option("--input", a_input, "Input corpus")->required()->check(CLI::ExistingFile);
  annotate->add_option("--output", a_output, "Output corpus")->required();
  annotate->add_option("--format", a_format, "Corpus format")->check(CLI::IsMember(kFormats))->capture_default_str();
  annotate->add_option("--threads", a_threads, "Worker threads (0: all cores)");

  std::string e_gold, e_pred, e_vocab, e_format = "conll09";
  bool e_json = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold");
  evaluate_cmd->add_option("--gold", e_gold, "Gold corpus")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--pred", e_pred, "Predicted corpus")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--train-vocab", e_vocab, "Training corpus defining known forms")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--format", e_format, "Corpus format")->check(CLI::IsMember(kFormats))->capture_default_str();
  evaluate_cmd->add_flag("--json", e_json, "Machine-readable output");

  std::string i_model;
  std::size_t i_top = 20;
  bool i_trees = false;
  auto* inspect = app.add_subcommand("inspect", "Describe a model file");
  inspect->add_option("-m,--model", i_model, "Model file")->required()->check(CLI::ExistingFile);
  inspect->add_option("--top-features", i_top, "Heaviest weights to list")->capture_default_str();
  inspect->add_flag("--trees", i_trees, "List the edit-tree inventory");

  std::uint64_t g_seed = 42;
  SyntheticSpec g_spec;
  std::string g_dir, g_format = "tsv";
  auto* generate = app.add_subcommand("generate", "Write a synthetic corpus");
  generate->add_option("--seed", g_seed, "Random seed")->capture_default_str();
  generate->add_option("--out-dir", g_dir, "Output directory")->required();
  generate->add_option("--format", g_format, "Corpus format")->check(CLI::IsMember(kFormats))->capture_default_str();
  generate->add_option("--train-tokens", g_spec.train_tokens)->capture_default_str();
  generate->add_option("--dev-tokens", g_spec.dev_tokens)->capture_default_str();
  generate->add_option("--test-tokens", g_spec.test_tokens)->capture_default_str();
  generate->add_option("--verbs", g_spec.verbs)->capture_default_str();
  generate->add_option("--nouns", g_spec.nouns)->capture_default_str();
  generate->add_option("--syncretism", g_spec.syncretism_rate, "Share of plural noun phrases")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  generate->add_option("--ambiguity", g_spec.ambiguity_rate, "Share of er/ir verbs")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (train->parsed()) return cmd_train(ta);
    if (annotate->parsed()) return cmd_annotate(a_model, a_input, a_output, a_format, a_threads);
    if (evaluate_cmd->parsed()) return cmd_evaluate(e_gold, e_pred, e_vocab, e_format, e_json);
    if (inspect->parsed()) return cmd_inspect(i_model, i_top, i_trees);
    if (generate->parsed()) return cmd_generate(g_seed, g_spec, g_dir, g_format);
  } catch (const UsageError& e) {
    log::error(e.what());
    return 1;
  } catch (const std::exception& e) {
    log::error(e.what());
    return 2;
  }
  return 1;
}
