#include <gtest/gtest.h>

#include <sstream>

#include "lemming/corpus.hpp"

using namespace lemming;

namespace {

const char* kConll =
    "1\tDie\tder\tder\tART\tART\tcase=nom|number=sg\tcase=nom|number=sg\t2\t2\tNK\tNK\t_\t_\n"
    "2\tHäuser\thaus\thaus\tNN\tNN\tcase=nom|number=pl\tcase=nom|number=pl\t0\t0\tSB\tSB\t_\t_\n"
    "\n"
    "1\tGeh\tgehen\tgehen\tVVIMP\tVVIMP\t_\t_\t0\t0\t--\t--\tY\tgehen.01\t_\n"
    "\n";

Corpus parse(const std::string& text, CorpusFormat f = CorpusFormat::kConll09,
             const ReadOptions& opts = {}) {
  std::istringstream in(text);
  return parse_corpus(in, f, ColumnMap::defaults(f), opts);
}

Sentence sentence(std::initializer_list<std::tuple<const char*, const char*, const char*>> toks) {
  Sentence s;
  for (const auto& [f, l, t] : toks) s.push_back({f, std::string(l), MorphTag::parse(t), {}});
  return s;
}

}  // namespace

TEST(ReadCorpus, Conll09Columns) {
  const auto c = parse(kConll);
  ASSERT_EQ(c.size(), 2u);
  ASSERT_EQ(c[0].size(), 2u);
  EXPECT_EQ(c[0][1].form, "Häuser");
  EXPECT_EQ(c[0][1].lemma, "haus");
  EXPECT_EQ(c[0][1].tag, MorphTag("NN", {"number=pl", "case=nom"}));
  EXPECT_EQ(c[1][0].tag, MorphTag("VVIMP"));  // "_" feats
  EXPECT_EQ(c[1][0].columns.size(), 15u);
}

TEST(ReadCorpus, RaggedRowReportsLine) {
  try {
    parse("1\ta\ta\ta\tX\tX\t_\t_\t0\t0\t_\t_\t_\t_\n2\tb\tb\n");
    FAIL() << "expected CorpusError";
  } catch (const CorpusError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("a\tb\n", CorpusFormat::kTsv), CorpusError);  // too few columns
}

TEST(ReadCorpus, InvalidUtf8AndMissingFile) {
  EXPECT_THROW(parse("a\xff\tb\tN\n", CorpusFormat::kTsv), CorpusError);
  EXPECT_THROW(read_corpus("/nonexistent/file.conll", CorpusFormat::kConll09), CorpusError);
}

TEST(ReadCorpus, UnknownFormatName) {
  EXPECT_EQ(parse_format("tsv"), CorpusFormat::kTsv);
  EXPECT_THROW(parse_format("conllu"), CorpusError);
}

TEST(ReadCorpus, TsvAndUnannotatedTokens) {
  const auto c = parse("Dogs\tdog\tN|Number=Pl\nbark\t_\t_\n", CorpusFormat::kTsv);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0][0].tag, MorphTag("N", {"Number=Pl"}));
  EXPECT_FALSE(c[0][1].lemma);
  EXPECT_FALSE(c[0][1].tag);
}

TEST(ReadCorpus, LemmaRewrites) {
  ReadOptions opts;
  opts.lemma_rewrites = {{"se", "se"}};
  const auto c = parse("Se\tél\tP\nva\tir\tV\n", CorpusFormat::kTsv, opts);
  EXPECT_EQ(c[0][0].lemma, "se");
  EXPECT_EQ(c[0][1].lemma, "ir");
}

TEST(WriteCorpus, RoundTripsBothFormats) {
  for (auto f : {CorpusFormat::kConll09, CorpusFormat::kTsv}) {
    Corpus c{sentence({{"Die", "der", "ART|case=nom"}, {"Häuser", "haus", "NN|number=pl"}}),
             sentence({{"Geh", "gehen", "VVIMP"}})};
    std::ostringstream out;
    write_corpus(out, c, f);
    EXPECT_EQ(parse(out.str(), f), c);
  }
}

TEST(WriteCorpus, KeepsOtherColumns) {
  auto c = parse(kConll);
  c[0][1].lemma = "Haus";
  std::ostringstream out;
  write_corpus(out, c, CorpusFormat::kConll09);
  const auto back = parse(out.str());
  EXPECT_EQ(back[0][1].lemma, "Haus");
  EXPECT_EQ(back[0][1].columns[11], "SB");
  EXPECT_EQ(back[1][0].columns[14], "_");
}

TEST(LimitTokens, KeepsWholeSentences) {
  Corpus c{sentence({{"a", "a", "X"}, {"b", "b", "X"}}), sentence({{"c", "c", "X"}}),
           sentence({{"d", "d", "X"}})};
  EXPECT_EQ(token_count(limit_tokens(c, 3)), 3u);
  EXPECT_EQ(limit_tokens(c, 2).size(), 1u);
  EXPECT_TRUE(limit_tokens(c, 1).empty());
}

TEST(Evaluate, IdenticalPredictionIsPerfect) {
  const auto gold = parse(kConll);
  const auto r = evaluate(gold, gold, vocabulary(gold));
  EXPECT_EQ(r.tag_all.value(), 1.0);
  EXPECT_EQ(r.lemma_all.value(), 1.0);
  EXPECT_EQ(r.joint_all.value(), 1.0);
  EXPECT_FALSE(r.tag_unk.value());  // no unknown forms
  EXPECT_EQ(r.unknown_tokens, 0u);
}

TEST(Evaluate, LemmaCaseIsIgnored) {
  const auto gold = parse(kConll);
  auto pred = gold;
  pred[0][1].lemma = "Haus";
  EXPECT_EQ(evaluate(gold, pred, {}).lemma_all.value(), 1.0);
}

TEST(Evaluate, UnknownSplit) {
  Corpus gold{sentence({{"the", "the", "D"}, {"Cats", "cat", "N"}, {"sat", "sit", "V"}})};
  Corpus pred{sentence({{"the", "the", "D"}, {"Cats", "cats", "N"}, {"sat", "sit", "N"}})};
  const std::unordered_set<std::string> vocab{"the", "cats"};
  const auto r = evaluate(gold, pred, vocab);
  EXPECT_EQ(r.tokens, 3u);
  EXPECT_EQ(r.unknown_tokens, 1u);
  EXPECT_DOUBLE_EQ(*r.tag_all.value(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.tag_unk.value(), 0.0);
  EXPECT_DOUBLE_EQ(*r.lemma_all.value(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.lemma_unk.value(), 1.0);
  EXPECT_DOUBLE_EQ(*r.joint_all.value(), 1.0 / 3.0);
  EXPECT_EQ(r.joint_unk.total, 1u);
}

TEST(Evaluate, MismatchesThrow) {
  const auto gold = parse(kConll);
  auto pred = gold;
  pred.pop_back();
  EXPECT_THROW(evaluate(gold, pred, {}), CorpusError);
  pred = gold;
  pred[0].pop_back();
  EXPECT_THROW(evaluate(gold, pred, {}), CorpusError);
  pred = gold;
  pred[0][0].form = "Das";
  EXPECT_THROW(evaluate(gold, pred, {}), CorpusError);
}
