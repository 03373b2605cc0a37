#pragma once

// Annotated corpora (CoNLL-09 and form/lemma/tag TSV) and token-level
// evaluation with the all / unknown-form split.

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lemming/morph_tag.hpp"
#include "lemming/text.hpp"

namespace lemming {

struct Token {
  std::string form;
  std::optional<std::string> lemma;
  std::optional<MorphTag> tag;
  /// All columns of the source row, kept so that writing preserves them.
  std::vector<std::string> columns;

  friend bool operator==(const Token& a, const Token& b) {
    return a.form == b.form && a.lemma == b.lemma && a.tag == b.tag;
  }
};

using Sentence = std::vector<Token>;
using Corpus = std::vector<Sentence>;

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CorpusFormat { kConll09, kTsv };

inline CorpusFormat parse_format(std::string_view name) {
  if (name == "conll09") return CorpusFormat::kConll09;
  if (name == "tsv") return CorpusFormat::kTsv;
  throw CorpusError("unknown corpus format '" + std::string(name) + "' (expected conll09 or tsv)");
}

/// 1-based column positions. For TSV, `pos` holds the full tag rendering and
/// `feats` is unused.
struct ColumnMap {
  std::size_t form = 2;
  std::size_t lemma = 3;
  std::size_t pos = 5;
  std::size_t feats = 7;

  static ColumnMap defaults(CorpusFormat f) {
    if (f == CorpusFormat::kTsv) return {1, 2, 3, 0};
    return {};
  }
};

struct ReadOptions {
  /// form (lowercased) -> lemma, applied at read time, e.g. {"se": "se"}.
  std::map<std::string, std::string> lemma_rewrites;
};

namespace detail {

inline std::optional<std::string> field(const std::vector<std::string>& cols, std::size_t col) {
  if (col == 0 || col > cols.size()) return std::nullopt;
  const auto& v = cols[col - 1];
  if (v.empty() || v == "_") return std::nullopt;
  return v;
}

inline std::size_t needed_columns(CorpusFormat f, const ColumnMap& m) {
  std::size_t n = std::max({m.form, m.lemma, m.pos});
  if (f == CorpusFormat::kConll09) n = std::max(n, m.feats);
  return n;
}

}  // namespace detail

inline Corpus parse_corpus(std::istream& in, CorpusFormat format, const ColumnMap& map,
                           const ReadOptions& opts = {}) {
  Corpus corpus;
  Sentence current;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  const std::size_t needed = detail::needed_columns(format, map);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      if (!current.empty()) corpus.push_back(std::move(current));
      current.clear();
      width = 0;  // CoNLL-09 rows are as wide as the sentence has predicates
      continue;
    }
    try {
      utf8_decode(line);
    } catch (const Utf8Error& e) {
      throw CorpusError("line " + std::to_string(line_no) + ": " + e.what());
    }
    auto cols = split(line, '\t');
    if (width == 0) width = cols.size();
    if (cols.size() != width || cols.size() < needed) {
      throw CorpusError("line " + std::to_string(line_no) + ": ragged row with " +
                        std::to_string(cols.size()) + " columns (expected " +
                        std::to_string(std::max(width, needed)) + ")");
    }
    Token tok;
    auto form = detail::field(cols, map.form);
    if (!form) throw CorpusError("line " + std::to_string(line_no) + ": empty form");
    tok.form = *form;
    tok.lemma = detail::field(cols, map.lemma);
    if (auto pos = detail::field(cols, map.pos)) {
      try {
        if (format == CorpusFormat::kTsv) {
          tok.tag = MorphTag::parse(*pos);
        } else {
          std::vector<std::string> attrs;
          if (auto feats = detail::field(cols, map.feats)) attrs = split(*feats, '|');
          tok.tag = MorphTag(*pos, std::move(attrs));
        }
      } catch (const std::invalid_argument& e) {
        throw CorpusError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (!opts.lemma_rewrites.empty()) {
      auto it = opts.lemma_rewrites.find(to_lower(tok.form));
      if (it != opts.lemma_rewrites.end()) tok.lemma = it->second;
    }
    tok.columns = std::move(cols);
    current.push_back(std::move(tok));
  }
  if (!current.empty()) corpus.push_back(std::move(current));
  return corpus;
}

inline Corpus read_corpus(const std::string& path, CorpusFormat format,
                          std::optional<ColumnMap> map = std::nullopt,
                          const ReadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file " + path);
  try {
    return parse_corpus(in, format, map.value_or(ColumnMap::defaults(format)), opts);
  } catch (const CorpusError& e) {
    throw CorpusError(path + ": " + e.what());
  }
}

/// Writes the corpus, filling the mapped lemma/tag columns from the tokens and
/// keeping any other source columns.
inline void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format,
                         std::optional<ColumnMap> map_opt = std::nullopt) {
  const ColumnMap map = map_opt.value_or(ColumnMap::defaults(format));
  const std::size_t needed = format == CorpusFormat::kConll09
                                 ? std::max<std::size_t>(detail::needed_columns(format, map), 14)
                                 : detail::needed_columns(format, map);
  for (const auto& sent : corpus) {
    for (std::size_t i = 0; i < sent.size(); ++i) {
      const auto& tok = sent[i];
      std::vector<std::string> cols = tok.columns;
      if (cols.size() < needed) cols.resize(needed, "_");
      if (format == CorpusFormat::kConll09 && tok.columns.empty()) cols[0] = std::to_string(i + 1);
      cols[map.form - 1] = tok.form;
      cols[map.lemma - 1] = tok.lemma.value_or("_");
      if (format == CorpusFormat::kTsv) {
        cols[map.pos - 1] = tok.tag ? tok.tag->render() : "_";
      } else {
        cols[map.pos - 1] = tok.tag ? tok.tag->pos() : "_";
        std::string feats;
        if (tok.tag) {
          for (const auto& a : tok.tag->attrs()) {
            if (!feats.empty()) feats += '|';
            feats += a;
          }
        }
        cols[map.feats - 1] = feats.empty() ? "_" : feats;
      }
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out << '\t';
        out << cols[c];
      }
      out << '\n';
    }
    out << '\n';
  }
}

inline void write_corpus(const std::string& path, const Corpus& corpus, CorpusFormat format,
                         std::optional<ColumnMap> map = std::nullopt) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write corpus file " + path);
  write_corpus(out, corpus, format, map);
}

/// Keeps leading whole sentences while the token total stays within max_tokens.
inline Corpus limit_tokens(const Corpus& corpus, std::size_t max_tokens) {
  Corpus out;
  std::size_t n = 0;
  for (const auto& s : corpus) {
    if (n + s.size() > max_tokens) break;
    n += s.size();
    out.push_back(s);
  }
  return out;
}

inline std::size_t token_count(const Corpus& corpus) {
  std::size_t n = 0;
  for (const auto& s : corpus) n += s.size();
  return n;
}

/// Lowercased forms of a corpus, the reference for "unknown form".
inline std::unordered_set<std::string> vocabulary(const Corpus& corpus) {
  std::unordered_set<std::string> v;
  for (const auto& s : corpus)
    for (const auto& t : s) v.insert(to_lower(t.form));
  return v;
}

struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;

  /// nullopt when there is nothing to score.
  std::optional<double> value() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
  }
  void add(bool ok) {
    ++total;
    correct += ok ? 1 : 0;
  }
};

struct EvalReport {
  Accuracy tag_all, tag_unk;
  Accuracy lemma_all, lemma_unk;
  Accuracy joint_all, joint_unk;  // tag and lemma both correct
  std::size_t tokens = 0;
  std::size_t unknown_tokens = 0;

  double unknown_rate() const {
    return tokens == 0 ? 0.0 : static_cast<double>(unknown_tokens) / static_cast<double>(tokens);
  }
};

/// Lemma match ignores capitalization; tag match compares canonical renderings.
inline EvalReport evaluate(const Corpus& gold, const Corpus& pred,
                           const std::unordered_set<std::string>& train_vocab) {
  if (gold.size() != pred.size()) {
    throw CorpusError("evaluate: gold has " + std::to_string(gold.size()) +
                      " sentences but prediction has " + std::to_string(pred.size()));
  }
  EvalReport r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) {
      throw CorpusError("evaluate: token count mismatch in sentence " + std::to_string(s + 1));
    }
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      const auto& g = gold[s][i];
      const auto& p = pred[s][i];
      if (g.form != p.form) {
        throw CorpusError("evaluate: form mismatch in sentence " + std::to_string(s + 1) +
                          ": '" + g.form + "' vs '" + p.form + "'");
      }
      const bool unknown = train_vocab.count(to_lower(g.form)) == 0;
      ++r.tokens;
      if (unknown) ++r.unknown_tokens;
      const bool tag_ok = g.tag && p.tag && *g.tag == *p.tag;
      const bool lemma_ok = g.lemma && p.lemma && equals_ignore_case(*g.lemma, *p.lemma);
      if (g.tag) {
        r.tag_all.add(tag_ok);
        if (unknown) r.tag_unk.add(tag_ok);
      }
      if (g.lemma) {
        r.lemma_all.add(lemma_ok);
        if (unknown) r.lemma_unk.add(lemma_ok);
      }
      if (g.tag && g.lemma) {
        r.joint_all.add(tag_ok && lemma_ok);
        if (unknown) r.joint_unk.add(tag_ok && lemma_ok);
      }
    }
  }
  return r;
}

}  // namespace lemming
