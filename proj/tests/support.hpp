#pragma once

// Small random models and brute-force oracles shared by the unit tests and
// the acceptance binary.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lemming/joint.hpp"
#include "lemming/tagger.hpp"

namespace lemming::test {

// Tag set {A..}, every tag sequence pattern of the corpus becomes a trigram.
inline TaggerModel random_model(std::size_t tags, std::size_t order, std::mt19937& rng, double sd = 1.0) {
  Corpus c;
  const char* names[] = {"A", "B", "C", "D", "E"};
  const char* words[] = {"x", "y", "z", "xy", "zz"};
  Sentence s;
  for (std::size_t t = 0; t < tags; ++t) s.push_back({words[t], std::string(words[t]), MorphTag(names[t]), {}});
  c.push_back(s);
  std::reverse(s.begin(), s.end());
  c.push_back(s);
  TaggerConfig cfg;
  cfg.order = order;
  cfg.prune_threshold = 0.0;
  auto model = prepare_tagger(c, cfg).first;
  std::normal_distribution<double> n(0.0, sd);
  for (auto& w : model.weights) w = n(rng);
  return model;
}

struct Enumerated {
  double log_z = kNegInf;
  std::vector<std::uint32_t> best;
  double best_score = kNegInf;
  std::vector<std::vector<double>> marginals;
  std::vector<std::vector<double>> transitions;
};

// Brute force over all T^n sequences; the first (lexicographically) sequence
// tied with the maximum wins.
inline Enumerated enumerate_tags(const TaggerModel& m, const Observations& obs, std::size_t order) {
  const std::size_t n = obs.size(), t_count = m.tag_count();
  std::vector<std::uint32_t> seq(n, 0);
  std::vector<double> scores;
  std::vector<std::vector<std::uint32_t>> seqs;
  while (true) {
    seqs.push_back(seq);
    scores.push_back(m.sequence_score(obs, seq, order));
    std::size_t k = n;
    while (k > 0 && seq[k - 1] + 1 == t_count) seq[--k] = 0;
    if (k == 0) break;
    ++seq[k - 1];
  }
  Enumerated e;
  e.log_z = log_sum_exp(scores);
  e.marginals.assign(n, std::vector<double>(t_count, 0.0));
  e.transitions.assign(n, std::vector<double>(t_count * t_count, 0.0));
  e.best_score = *std::max_element(scores.begin(), scores.end());
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    if (e.best.empty() && !beats(e.best_score, scores[k])) e.best = seqs[k];
    const double p = std::exp(scores[k] - e.log_z);
    for (std::size_t i = 0; i < n; ++i) {
      e.marginals[i][seqs[k][i]] += p;
      if (i > 0) e.transitions[i][seqs[k][i - 1] * t_count + seqs[k][i]] += p;
    }
  }
  return e;
}

inline std::vector<std::string> random_sentence(std::size_t n, std::mt19937& rng) {
  const char* words[] = {"x", "y", "z", "xy", "zz", "q"};
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(words[rng() % 6]);
  return s;
}

inline const char* kTagNames[] = {"A", "B|x=1", "B|x=2", "C"};

// Small joint model: up to 4 tags, trees {identity, -ed, -d, -s}, random weights.
inline JointModel random_joint(std::size_t tags, std::size_t order, std::mt19937& rng, double sd = 1.0) {
  Corpus c;
  Sentence s;
  const char* pairs[][2] = {{"walked", "walk"}, {"talked", "talk"}, {"baked", "bake"}, {"faked", "fake"},
                            {"walks", "walk"},  {"talks", "talk"},  {"abed", "abed"}};
  for (std::size_t k = 0; k < 7; ++k)
    s.push_back({pairs[k][0], std::string(pairs[k][1]), MorphTag::parse(kTagNames[k % tags]), {}});
  c.push_back(s);
  TaggerConfig tc;
  tc.order = order;
  tc.prune_threshold = 0.0;
  JointModel m;
  m.tagger = prepare_tagger(c, tc).first;
  std::vector<LemmaInstance> inst;
  for (const auto& t : s) inst.push_back({t.form, *t.tag, *t.lemma});
  LemmatizerConfig lc;
  lc.min_pair_count = 2;
  m.lemmatizer = make_lemmatizer(inst, lc);
  compile_training_set(m.lemmatizer, inst);
  m.lemmatizer.space.base.freeze();
  std::normal_distribution<double> n(0.0, sd);
  m.lemmatizer.theta.resize(m.lemmatizer.space.dimension());
  for (auto& w : m.lemmatizer.theta) w = n(rng);
  for (auto& w : m.tagger.weights) w = n(rng);
  return m;
}

inline std::vector<std::string> random_forms(std::size_t n, std::mt19937& rng) {
  const char* words[] = {"abed", "walked", "jumps", "x", "faked", "oded"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(words[rng() % 6]);
  return out;
}

struct Enumeration {
  double log_z = kNegInf;
  double best = kNegInf;
  std::vector<std::uint32_t> map_tags;
  std::vector<std::size_t> map_lemmas;
  std::vector<std::vector<double>> tag_marg;    // [i][tag id]
  std::vector<std::vector<double>> lemma_marg;  // [i][candidate]
};

// All tag sequences times all lemma sequences. Tag part from the tagger's
// sequence score, lemma part from the lemmatizer's candidate scores.
inline Enumeration enumerate_joint(const JointModel& m, std::span<const std::string> forms) {
  const std::size_t n = forms.size(), t_count = m.tagger.tag_count();
  const auto obs = m.tagger.observe(forms);
  std::vector<CandidateSet> cs;
  for (const auto& f : forms) cs.push_back(m.lemmatizer.candidates(f));
  std::vector<std::vector<std::vector<double>>> lemma_scores(n);  // [i][tag][cand]
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < t_count; ++t) lemma_scores[i].push_back(m.lemmatizer.candidate_scores(cs[i], m.tagger.tags[t]));

  struct Item {
    std::vector<std::uint32_t> tags;
    std::vector<std::size_t> lemmas;
    double score;
  };
  std::vector<Item> items;
  std::vector<std::uint32_t> tags(n, 0);
  while (true) {
    const double ts = m.tagger.sequence_score(obs, tags, m.tagger.order);
    std::vector<std::size_t> lem(n, 0);
    while (true) {
      double s = ts;
      for (std::size_t i = 0; i < n; ++i) s += lemma_scores[i][tags[i]][lem[i]];
      items.push_back({tags, lem, s});
      std::size_t k = n;
      while (k > 0 && lem[k - 1] + 1 == cs[k - 1].size()) lem[--k] = 0;
      if (k == 0) break;
      ++lem[k - 1];
    }
    std::size_t k = n;
    while (k > 0 && tags[k - 1] + 1 == t_count) tags[--k] = 0;
    if (k == 0) break;
    ++tags[k - 1];
  }
  Enumeration e;
  std::vector<double> scores;
  for (const auto& it : items) scores.push_back(it.score);
  e.log_z = log_sum_exp(scores);
  e.best = *std::max_element(scores.begin(), scores.end());
  // Lexicographic order over (tag_1, lemma_1, tag_2, lemma_2, ...).
  auto key = [&](const Item& it) {
    std::vector<std::size_t> k;
    for (std::size_t i = 0; i < n; ++i) {
      k.push_back(it.tags[i]);
      k.push_back(it.lemmas[i]);
    }
    return k;
  };
  const Item* arg = nullptr;
  for (const auto& it : items)
    if (!beats(e.best, it.score) && (!arg || key(it) < key(*arg))) arg = &it;
  e.map_tags = arg->tags;
  e.map_lemmas = arg->lemmas;
  e.tag_marg.assign(n, std::vector<double>(t_count, 0.0));
  e.lemma_marg.resize(n);
  for (std::size_t i = 0; i < n; ++i) e.lemma_marg[i].assign(cs[i].size(), 0.0);
  for (const auto& it : items) {
    const double p = std::exp(it.score - e.log_z);
    for (std::size_t i = 0; i < n; ++i) {
      e.tag_marg[i][it.tags[i]] += p;
      e.lemma_marg[i][it.lemmas[i]] += p;
    }
  }
  return e;
}

}  // namespace lemming::test
