#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "lemming/synthetic.hpp"

using namespace lemming;

namespace {

std::string dump(const SyntheticCorpus& c) {
  std::ostringstream out;
  for (const auto* part : {&c.train, &c.dev, &c.test}) write_corpus(out, *part, CorpusFormat::kTsv);
  for (const auto& w : c.lexicon) out << w << '\n';
  return out.str();
}

// form -> set of tag renderings over all splits
std::map<std::string, std::set<std::string>> form_tags(const SyntheticCorpus& c) {
  std::map<std::string, std::set<std::string>> m;
  for (const auto* part : {&c.train, &c.dev, &c.test})
    for (const auto& s : *part)
      for (const auto& t : s) m[to_lower(t.form)].insert(t.tag->render());
  return m;
}

}  // namespace

TEST(Synthetic, SameSeedSameBytes) {
  EXPECT_EQ(dump(generate_synthetic_corpus(42)), dump(generate_synthetic_corpus(42)));
  EXPECT_NE(dump(generate_synthetic_corpus(42)), dump(generate_synthetic_corpus(43)));
}

TEST(Synthetic, ParadigmArithmetic) {
  SyntheticSpec spec;
  spec.verbs = 100;
  spec.verb_cells = 5;
  spec.nouns = 0;
  spec.train_tokens = spec.dev_tokens = spec.test_tokens = 50;
  const auto c = generate_synthetic_corpus(1, spec);
  EXPECT_EQ(c.paradigms.size(), 500u);
  std::set<std::string> forms;
  for (const auto& e : c.paradigms) forms.insert(e.form);
  EXPECT_EQ(forms.size(), 500u);
  EXPECT_EQ(c.lexicon.size(), 100u);
}

TEST(Synthetic, SplitSizes) {
  const SyntheticSpec spec;
  const auto c = generate_synthetic_corpus(3, spec);
  EXPECT_GE(token_count(c.train), spec.train_tokens);
  EXPECT_LT(token_count(c.train), spec.train_tokens + 10);
  EXPECT_GE(token_count(c.test), spec.test_tokens);
  for (const auto* part : {&c.train, &c.dev, &c.test})
    for (const auto& s : *part)
      for (const auto& t : s) {
        ASSERT_TRUE(t.lemma && t.tag);
        EXPECT_FALSE(t.form.empty());
      }
}

TEST(Synthetic, NoSyncretismMeansUnambiguousForms) {
  SyntheticSpec spec;
  spec.syncretism_rate = 0.0;
  for (const auto& [form, tags] : form_tags(generate_synthetic_corpus(5, spec)))
    EXPECT_EQ(tags.size(), 1u) << form;
}

TEST(Synthetic, SyncretismMakesLosAmbiguous) {
  SyntheticSpec spec;
  spec.syncretism_rate = 0.4;
  const auto tags = form_tags(generate_synthetic_corpus(5, spec));
  EXPECT_EQ(tags.at("los").size(), 2u);
  std::size_t ambiguous = 0;
  for (const auto& [form, t] : tags) ambiguous += t.size() > 1;
  EXPECT_EQ(ambiguous, 1u);
}

TEST(Synthetic, ErAndIrShareThirdPersonPlural) {
  const auto c = generate_synthetic_corpus(9);
  std::set<std::string> endings;
  for (const auto& e : c.paradigms) {
    if (e.tag.render() != "V|Number=Pl|Person=3") continue;
    const auto cls = e.lemma.substr(e.lemma.size() - 2);
    if (cls == "er" || cls == "ir") endings.insert(cls + ":" + e.form.substr(e.form.size() - 2));
  }
  EXPECT_EQ(endings, (std::set<std::string>{"er:en", "ir:en"}));
}

TEST(Synthetic, LemmataFollowTheParadigms) {
  const auto c = generate_synthetic_corpus(11);
  std::map<std::string, std::string> lemma_of;
  for (const auto& e : c.paradigms) lemma_of[e.form] = e.lemma;
  const std::set<std::string> lexicon(c.lexicon.begin(), c.lexicon.end());
  for (const auto& s : c.train)
    for (const auto& t : s) {
      auto it = lemma_of.find(to_lower(t.form));
      if (it == lemma_of.end()) continue;  // closed class
      EXPECT_EQ(*t.lemma, it->second);
      EXPECT_TRUE(lexicon.count(*t.lemma));
    }
}

TEST(Synthetic, InvalidSpecThrows) {
  SyntheticSpec spec;
  spec.syncretism_rate = 1.5;
  EXPECT_THROW(generate_synthetic_corpus(1, spec), std::invalid_argument);
  spec = {};
  spec.verb_cells = 7;
  EXPECT_THROW(generate_synthetic_corpus(1, spec), std::invalid_argument);
  spec = {};
  spec.verbs = 0;
  EXPECT_THROW(generate_synthetic_corpus(1, spec), std::invalid_argument);
}
