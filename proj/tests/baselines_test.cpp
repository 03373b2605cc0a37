#include <gtest/gtest.h>

#include <random>

#include "lemming/baselines.hpp"

using namespace lemming;

namespace {

Token tok(std::string form, std::string lemma, std::string tag) {
  return Token{std::move(form), std::move(lemma), MorphTag::parse(tag), {}};
}

const std::u32string kC(1, kCopyMark);

// Regular toy verbs: stem, stem+s, stem+ed, stem+ing, all with lemma stem.
Corpus paradigm_corpus(const std::vector<std::string>& stems) {
  Corpus c;
  for (const auto& s : stems)
    c.push_back({tok(s + "s", s, "V"), tok(s + "ed", s, "V"), tok(s + "ing", s, "V"), tok(s, s, "V")});
  return c;
}

const std::vector<std::string> kStems = {"walk", "talk", "jump", "play", "kick", "pull",
                                         "push", "look", "cook", "mark", "park", "lift"};

}  // namespace

TEST(Simple, MostFrequentLemma) {
  Corpus c{{tok("saw", "see", "V"), tok("saw", "see", "V"), tok("saw", "see", "V"), tok("saw", "saw", "V"),
            tok("saw", "saw", "N")}};
  const auto m = simple_train(c);
  EXPECT_EQ(simple_predict(m, "saw", "V"), "see");
  EXPECT_EQ(simple_predict(m, "saw", "N"), "saw");
  EXPECT_EQ(m.lookup("saw", "V")->count, 3u);
}

TEST(Simple, UnknownPairReturnsForm) {
  const auto m = simple_train(Corpus{{tok("saw", "see", "V")}});
  EXPECT_EQ(simple_predict(m, "Häuser", "N"), "Häuser");
  EXPECT_EQ(simple_predict(m, "saw", "N"), "saw");  // POS is part of the key
  EXPECT_EQ(simple_predict(m, "Saw", "V"), "Saw");
  EXPECT_FALSE(m.lookup("saw", "N"));
}

TEST(Simple, TiesGoToSmallerLemma) {
  Corpus c{{tok("x", "b", "N"), tok("x", "a", "N"), tok("x", "b", "N"), tok("x", "a", "N")}};
  EXPECT_EQ(simple_predict(simple_train(c), "x", "N"), "a");
}

TEST(Simple, IdempotentAndTotal) {
  const auto m = simple_train(paradigm_corpus(kStems));
  for (const std::string f : {"walked", "walk", "zzz", ""}) {
    const auto once = simple_predict(m, f, "V");
    EXPECT_EQ(simple_predict(m, f, "V"), once);
    EXPECT_EQ(simple_predict(m, once, "V"), once);
  }
}

TEST(JckSymbols, CopyAndDeletionBlock) {
  EXPECT_EQ(jck_symbols(U"worked", U"work"), (std::vector<std::u32string>{kC, kC, kC, kC, U"", U""}));
  EXPECT_EQ(jck_symbols(U"umgeschaut", U"umschauen"),
            (std::vector<std::u32string>{kC, kC, U"", U"", kC, kC, kC, kC, kC, U"en"}));
}

TEST(JckSymbols, InsertionsAttachToNeighbours) {
  EXPECT_EQ(jck_symbols(U"work", U"works"), (std::vector<std::u32string>{kC, kC, kC, kC + U"s"}));
  EXPECT_EQ(jck_symbols(U"macht", U"gemacht").front(), U"ge" + kC);
}

TEST(JckSymbols, ApplyingReproducesLemma) {
  std::mt19937 rng(3);
  auto word = [&] {
    std::u32string s;
    const std::size_t n = 1 + rng() % 7;
    for (std::size_t i = 0; i < n; ++i) s.push_back(U"abcdeäß"[rng() % 7]);
    return s;
  };
  for (int k = 0; k < 2000; ++k) {
    const auto x = word(), y = word();
    const auto syms = jck_symbols(x, y);
    ASSERT_EQ(syms.size(), x.size());
    EXPECT_EQ(apply_jck_symbols(x, syms), y);
  }
}

TEST(JckAlign, IdentityCorpusHasOnlyCopy) {
  Corpus c;
  for (const auto& s : kStems) c.push_back({tok(s, s, "V")});
  const auto a = jck_align(c);
  EXPECT_EQ(a.alphabet, std::vector<std::u32string>{kC});
  EXPECT_EQ(a.examples.size(), kStems.size());
}

TEST(JckAlign, RareSymbolsArePruned) {
  Corpus c;
  for (std::size_t k = 0; k < 4; ++k) c.push_back({tok(kStems[k] + "ed", kStems[k], "V")});
  auto a = jck_align(c);
  EXPECT_EQ(a.alphabet, std::vector<std::u32string>{kC});  // "" used by 4 pairs only
  EXPECT_EQ(a.dropped, 4u);
  c.push_back({tok(kStems[4] + "ed", kStems[4], "V")});
  a = jck_align(c);
  EXPECT_EQ(a.alphabet, (std::vector<std::u32string>{kC, U""}));
  EXPECT_EQ(a.dropped, 0u);
}

TEST(JckAlign, TypesAreCountedOnce) {
  Corpus c;
  for (int k = 0; k < 10; ++k) c.push_back({tok("walked", "walk", "V")});
  const auto a = jck_align(c);
  // one pair uses the deletion symbol, so it is pruned however often the token occurs
  EXPECT_EQ(a.alphabet.size(), 1u);
  EXPECT_EQ(a.dropped, 1u);
}

TEST(AveragedPerceptron, MeanOfIntermediateWeights) {
  AveragedWeights w(3);
  std::vector<std::vector<double>> snapshots;
  // example 1: update
  w.add(0, 1.0);
  w.add(2, -1.0);
  w.tick();
  snapshots.push_back(w.current());
  // example 2: no update
  w.tick();
  snapshots.push_back(w.current());
  // example 3: update
  w.add(0, -1.0);
  w.add(1, 2.0);
  w.tick();
  snapshots.push_back(w.current());
  const auto avg = w.averaged();
  for (std::size_t i = 0; i < 3; ++i) {
    double mean = 0.0;
    for (const auto& s : snapshots) mean += s[i] / 3.0;
    EXPECT_NEAR(avg[i], mean, 1e-15);
  }
  EXPECT_NEAR(avg[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(avg[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(avg[2], -1.0, 1e-15);
}

TEST(Jck, ZeroIterationsCopies) {
  JckConfig cfg;
  cfg.iterations = 0;
  const auto m = jck_train(jck_align(paradigm_corpus(kStems), cfg), cfg);
  EXPECT_GT(m.alphabet.size(), 1u);
  EXPECT_EQ(jck_predict(m, "walked", "V"), "walked");
  EXPECT_EQ(jck_predict(m, "Jumping", "V"), "jumping");
}

TEST(Jck, LearnsSeparableParadigm) {
  const auto corpus = paradigm_corpus(kStems);
  const auto aligned = jck_align(corpus);
  ASSERT_EQ(aligned.dropped, 0u);
  const auto m = jck_train(aligned);
  for (const auto& ex : aligned.examples)
    EXPECT_EQ(jck_predict(m, utf8_encode(ex.form), ex.pos), utf8_encode(ex.lemma));
  EXPECT_EQ(jck_predict(m, "hunted", "V"), "hunt");
  EXPECT_EQ(jck_predict(m, "Hunting", "V"), "hunt");
  EXPECT_EQ(jck_predict(m, "hunts", "V"), "hunt");
  EXPECT_EQ(jck_predict(m, "hunt", "V"), "hunt");
}

TEST(Baseline, CombinedEqualsSimpleOnSeenPairs) {
  auto corpus = paradigm_corpus(kStems);
  corpus.push_back({tok("went", "go", "V"), tok("Walked", "WALK", "V")});
  const auto m = train_baseline(corpus, true);
  for (const auto& s : corpus)
    for (const auto& t : s) EXPECT_EQ(m.predict(t.form, t.tag->pos()), simple_predict(m.simple, t.form, t.tag->pos()));
  EXPECT_EQ(m.predict("went", "V"), "go");
  EXPECT_EQ(m.predict("hunted", "V"), "hunt");
  EXPECT_EQ(train_baseline(corpus, false).predict("hunted", "V"), "hunted");
}

TEST(Jck, BestRivalMatchesEnumeration) {
  Corpus c = paradigm_corpus(kStems);
  for (const auto& s : kStems) c.push_back({tok(s + "ies", s + "y", "N")});
  auto m = jck_train(jck_align(c));
  ASSERT_GE(m.alphabet.size(), 3u);
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (auto& w : m.weights) w = nd(rng);
  for (const std::u32string x : {U"ab", U"kes", U"walk"}) {
    const auto obs = m.observe(x, "V");
    const std::size_t n = x.size(), y_count = m.symbol_count();
    std::vector<std::uint32_t> gold(n);
    for (auto& g : gold) g = rng() % y_count;
    const auto node = m.node_scores(obs, m.weights);
    double best = kNegInf;
    std::vector<std::uint32_t> path(n, 0);
    while (true) {
      if (path != gold) best = std::max(best, m.path_score(node, m.weights, path));
      std::size_t k = n;
      while (k > 0 && path[k - 1] + 1 == y_count) path[--k] = 0;
      if (k == 0) break;
      ++path[k - 1];
    }
    const auto [rival, score] = m.best_rival(obs, m.weights, gold);
    EXPECT_NE(rival, gold);
    EXPECT_NEAR(score, best, 1e-9);
    EXPECT_NEAR(m.path_score(node, m.weights, rival), score, 1e-9);
  }
}
