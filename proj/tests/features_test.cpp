#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "lemming/candidates.hpp"
#include "lemming/features.hpp"

using namespace lemming;

namespace {

std::size_t count_of(const std::vector<std::string>& names, const std::string& n) {
  return static_cast<std::size_t>(std::count(names.begin(), names.end(), n));
}

bool has_prefix(const std::vector<std::string>& names, const std::string& p) {
  return std::any_of(names.begin(), names.end(), [&](const std::string& s) { return s.rfind(p, 0) == 0; });
}

}  // namespace

TEST(FeatureDictionary, InternGrowsThenFreezes) {
  FeatureDictionary d;
  EXPECT_EQ(d.intern("treeX"), 0u);
  EXPECT_EQ(d.intern("treeY"), 1u);
  EXPECT_EQ(d.intern("treeX"), 0u);
  d.freeze();
  EXPECT_FALSE(d.intern("unseen"));
  EXPECT_EQ(d.intern("treeY"), 1u);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.name(1), "treeY");
}

TEST(FeatureVector, CountsRepeatedIndices) {
  const auto fv = FeatureVector::from_indices({3, 1, 3, 3});
  ASSERT_EQ(fv.size(), 2u);
  EXPECT_EQ(fv.value(1), 1.0);
  EXPECT_EQ(fv.value(3), 3.0);
  EXPECT_EQ(fv.value(2), 0.0);
  const std::vector<double> w{0, 2, 0, 5};
  EXPECT_EQ(fv.dot(w), 17.0);
}

TEST(LemmaFeatures, IdentityTreeBaseFeatures) {
  const auto tree = identity_tree();
  const auto tree_str = tree.render();
  const auto names = lemma_feature_names(U"work", U"work", &tree, MorphTag("V"), {}, FeatureConfig{});
  for (const std::string& n :
       {"t:" + tree_str, "tw:" + tree_str + "|work", "tp1:w|" + tree_str, "ts1:k|" + tree_str,
        "tp4:work|" + tree_str, std::string("l:work"), std::string("lp1:w"), std::string("ls1:k"),
        std::string("ls4:work"), std::string("a:w>w"), std::string("t:") + tree_str + "&V"}) {
    EXPECT_EQ(count_of(names, n), 1u) << n;
  }
  EXPECT_FALSE(has_prefix(names, "seen"));
  EXPECT_FALSE(has_prefix(names, "d:"));
}

TEST(LemmaFeatures, ConjoinsWithPosAndEachAttribute) {
  const MorphTag tag("Noun", {"Common", "Plural", "Feminine"});
  const auto tree = extract_tree("medidas", "medida");
  const FeatureConfig cfg;
  const auto base = base_lemma_features(U"medidas", U"medida", &tree, {}, cfg);
  const auto all = lemma_feature_names(U"medidas", U"medida", &tree, tag, {}, cfg);
  EXPECT_EQ(all.size(), base.size() * (2 + tag.attrs().size()));
  for (const auto& b : base) {
    for (const char* c : {"", "&Noun", "&Noun+Common", "&Noun+Plural", "&Noun+Feminine"}) {
      EXPECT_GE(count_of(all, b + c), 1u) << b << c;
    }
  }
}

TEST(LemmaFeatures, AlignmentContextCapturesPrefixDeletion) {
  const auto tree = extract_tree("umgeschaut", "umschauen");
  const auto names = base_lemma_features(U"umgeschaut", U"umschauen", &tree, {}, FeatureConfig{});
  EXPECT_EQ(count_of(names, "a:ge>"), 1u);
  EXPECT_EQ(count_of(names, "afl2:um|ge>"), 1u);
  EXPECT_EQ(count_of(names, "afl3:^um|ge>"), 1u);
  EXPECT_EQ(count_of(names, "a:t>en"), 1u);
  EXPECT_EQ(count_of(names, "afr1:$|t>en"), 1u);
  // 'u' is aligned twice (u-m-... and ...-a-u-t).
  EXPECT_EQ(count_of(names, "a:u>u"), 2u);
}

TEST(LemmaFeatures, LengthCaps) {
  const std::u32string form = U"abcdefghijklmnopqrs";
  const auto tree = extract_tree(form, form);
  const auto names = base_lemma_features(form, form, &tree, {}, FeatureConfig{});
  EXPECT_TRUE(has_prefix(names, "tp10:"));
  EXPECT_FALSE(has_prefix(names, "tp11:"));
  EXPECT_FALSE(has_prefix(names, "ls11:"));
  EXPECT_TRUE(has_prefix(names, "afl6:"));
  EXPECT_FALSE(has_prefix(names, "afl7:"));
  EXPECT_FALSE(has_prefix(names, "alr7:"));
}

TEST(LemmaFeatures, LexiconCapitalizationVariants) {
  const std::vector<Lexicon> lex{Lexicon("aspell", {"Haus", "haus"}), Lexicon("wiki", {"HAUS"})};
  const auto tree = extract_tree("häuser", "haus");
  const auto names = base_lemma_features(U"Häuser", U"Haus", &tree, lex, FeatureConfig{});
  EXPECT_EQ(count_of(names, "d:aspell:lower"), 1u);
  EXPECT_EQ(count_of(names, "d:aspell:first"), 1u);
  EXPECT_EQ(count_of(names, "d:aspell:mixed"), 1u);
  EXPECT_EQ(count_of(names, "d:aspell:upper"), 0u);
  EXPECT_EQ(count_of(names, "d:wiki:upper"), 1u);
  EXPECT_EQ(count_of(names, "d:wiki:lower"), 0u);
}

TEST(LemmaFeatures, SeenOnlyCandidateGetsLemmaGroupsOnly) {
  const std::vector<Lexicon> lex{Lexicon("dict", {"be"})};
  const auto names = base_lemma_features(U"was", U"be", nullptr, lex, FeatureConfig{});
  EXPECT_EQ(count_of(names, "seen"), 1u);
  EXPECT_EQ(count_of(names, "l:be"), 1u);
  EXPECT_EQ(count_of(names, "d:dict:lower"), 1u);
  EXPECT_FALSE(has_prefix(names, "t:"));
  EXPECT_FALSE(has_prefix(names, "a:"));
}

TEST(LemmaFeatures, RejectsIncompatibleTree) {
  const auto tree = extract_tree("worked", "work");
  EXPECT_THROW(base_lemma_features(U"walks", U"walk", &tree, {}, FeatureConfig{}), std::invalid_argument);
}

TEST(LemmaFeatures, GroupsCanBeDisabled) {
  FeatureConfig cfg;
  cfg.alignment_features = false;
  cfg.lemma_features = false;
  const auto tree = extract_tree("worked", "work");
  const auto names = base_lemma_features(U"worked", U"work", &tree, {}, cfg);
  EXPECT_TRUE(has_prefix(names, "t:"));
  EXPECT_FALSE(has_prefix(names, "a:"));
  EXPECT_FALSE(has_prefix(names, "l:"));
}

TEST(LemmaFeatures, DeterministicAndGroupPrefixed) {
  const auto tree = extract_tree("umgeschaut", "umschauen");
  const MorphTag tag("V", {"Tense=Past"});
  const auto a = lemma_feature_names(U"umgeschaut", U"umschauen", &tree, tag, {}, FeatureConfig{});
  const auto b = lemma_feature_names(U"umgeschaut", U"umschauen", &tree, tag, {}, FeatureConfig{});
  EXPECT_EQ(a, b);
  static const std::vector<std::string> groups{"t:", "tw:", "tp", "ts", "a:", "afl", "afr",
                                               "all", "alr", "l:", "lp", "ls", "d:", "seen"};
  for (const auto& n : a) {
    EXPECT_TRUE(std::any_of(groups.begin(), groups.end(), [&](const std::string& g) { return n.rfind(g, 0) == 0; })) << n;
  }
}

TEST(LemmaFeatureSpace, CombineMatchesConjoinedNames) {
  const FeatureConfig cfg;
  const MorphTag tag("V", {"Number=Sg", "Tense=Past"});
  LemmaFeatureSpace space;
  space.register_tag(tag, cfg);
  space.register_tag(MorphTag("N"), cfg);
  space.conj.freeze();
  const auto tree = extract_tree("worked", "work");
  const auto base = base_lemma_features(U"worked", U"work", &tree, {}, cfg);
  const auto fv = space.combine(space.base_ids_growing(base), space.conj_ids(tag, cfg));

  std::map<std::string, double> expected;
  for (const auto& n : lemma_feature_names(U"worked", U"work", &tree, tag, {}, cfg)) expected[n] += 1.0;
  std::map<std::string, double> got;
  for (const auto& e : fv.entries()) got[space.name(e.index)] += e.value;
  EXPECT_EQ(got, expected);
}

TEST(LemmaFeatureSpace, UnseenConjunctionsAndFrozenBaseAreDropped) {
  const FeatureConfig cfg;
  LemmaFeatureSpace space;
  space.register_tag(MorphTag("V"), cfg);
  space.conj.freeze();
  EXPECT_EQ(space.conj_ids(MorphTag("N", {"Case=Nom"}), cfg), std::vector<std::uint32_t>{0});
  space.base_ids_growing({"a", "b"});
  space.base.freeze();
  EXPECT_EQ(space.base_ids({"b", "c", "a"}), (std::vector<std::uint32_t>{1, 0}));
  EXPECT_EQ(space.dimension(), 4u);
}

TEST(LemmaFeatureSpace, ScoreAndAddAgreeWithCombine) {
  LemmaFeatureSpace space;
  space.register_tag(MorphTag("V", {"X=1"}), FeatureConfig{});
  space.base_ids_growing({"a", "b", "c"});
  std::vector<double> w(space.dimension());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.25 * static_cast<double>(i) - 1.0;
  const std::vector<std::uint32_t> base{2, 0, 2}, conj{0, 2};
  const auto fv = space.combine(base, conj);
  EXPECT_DOUBLE_EQ(space.score(base, conj, w), fv.dot(w));
  std::vector<double> g1(w.size()), g2(w.size());
  space.add(base, conj, 1.5, g1);
  fv.add_to(g2, 1.5);
  EXPECT_EQ(g1, g2);
}
