#pragma once

// Sparse features for scoring a lemma candidate l of a form w under tag m.
//
// Base groups:
//   t:   the edit tree             tw:  tree + form
//   tp/ts: form prefix/suffix + tree
//   a:   alignment pair            af/al: alignment pair + form/lemma context
//   l:   lemma                     lp/ls: lemma prefix/suffix
//   d:   lexicon membership per capitalization variant
//   seen: candidate only known from training (no tree applies)
// Every base feature is emitted three ways: bare, conjoined with the POS,
// and conjoined with POS+attribute for each attribute.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lemming/edit_tree.hpp"
#include "lemming/morph_tag.hpp"
#include "lemming/text.hpp"

namespace lemming {

/// Bijective feature-name <-> dense index mapping.
class FeatureDictionary {
 public:
  /// Index of name, assigning the next one when growing. Frozen dictionaries
  /// return nullopt for unseen names.
  std::optional<std::uint32_t> intern(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    if (frozen_) return std::nullopt;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  void freeze() { frozen_ = true; }
  void unfreeze() { frozen_ = false; }
  bool frozen() const { return frozen_; }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
  bool frozen_ = false;
};

/// Sparse index -> count vector, sorted by index, no zero entries.
class FeatureVector {
 public:
  struct Entry {
    std::uint32_t index;
    double value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  FeatureVector() = default;

  static FeatureVector from_indices(std::vector<std::uint32_t> ids) {
    std::sort(ids.begin(), ids.end());
    FeatureVector fv;
    for (auto id : ids) {
      if (!fv.entries_.empty() && fv.entries_.back().index == id) {
        fv.entries_.back().value += 1.0;
      } else {
        fv.entries_.push_back({id, 1.0});
      }
    }
    return fv;
  }

  /// From already sorted, distinct indices with their values.
  static FeatureVector from_pairs(std::span<const std::uint32_t> ids, std::span<const double> values) {
    FeatureVector fv;
    fv.entries_.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) fv.entries_.push_back({ids[i], values[i]});
    return fv;
  }

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double value(std::uint32_t index) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, std::uint32_t i) { return e.index < i; });
    return it != entries_.end() && it->index == index ? it->value : 0.0;
  }

  double dot(std::span<const double> weights) const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.value * weights[e.index];
    return s;
  }

  /// out += scale * this
  void add_to(std::span<double> out, double scale) const {
    for (const auto& e : entries_) out[e.index] += scale * e.value;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<Entry> entries_;
};

/// A named word list; lookup is exact on the queried string.
class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(std::string name, std::unordered_set<std::string> words)
      : name_(std::move(name)), words_(std::move(words)) {}

  /// One word per line, '#' starts a comment line, blank lines ignored.
  static Lexicon load(std::string name, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file " + path);
    std::unordered_set<std::string> words;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto w = trim(line);
      if (w.empty() || w.front() == '#') continue;
      utf8_decode(w);  // validates
      words.emplace(w);
    }
    return Lexicon(std::move(name), std::move(words));
  }

  const std::string& name() const { return name_; }
  bool contains(std::string_view w) const { return words_.count(std::string(w)) > 0; }
  std::size_t size() const { return words_.size(); }
  const std::unordered_set<std::string>& words() const { return words_; }

 private:
  std::string name_;
  std::unordered_set<std::string> words_;
};

struct FeatureConfig {
  std::size_t max_affix = 10;
  std::size_t max_context = 6;
  bool tree_features = true;
  bool alignment_features = true;
  bool lemma_features = true;
  bool dictionary_features = true;
  bool conjoin_pos = true;
  bool conjoin_attrs = true;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

namespace detail {

inline void emit_affixes(std::vector<std::string>& out, std::string_view group,
                         std::u32string_view s, std::size_t max_len, std::string_view tail) {
  const std::size_t n = std::min(max_len, s.size());
  for (std::size_t k = 1; k <= n; ++k) {
    std::string p(group);
    p += 'p';
    p += std::to_string(k);
    p += ':';
    p += utf8_encode(s.substr(0, k));
    p += tail;
    out.push_back(std::move(p));
    std::string q(group);
    q += 's';
    q += std::to_string(k);
    q += ':';
    q += utf8_encode(s.substr(s.size() - k));
    q += tail;
    out.push_back(std::move(q));
  }
}

// Context windows around [begin, end) in s, padded with one boundary mark.
inline void emit_context(std::vector<std::string>& out, std::string_view group,
                         std::u32string_view s, std::size_t begin, std::size_t end,
                         std::size_t max_len, const std::string& pair) {
  std::u32string left;
  for (std::size_t k = 1; k <= max_len; ++k) {
    if (k > begin + 1) break;
    left = k <= begin ? std::u32string(s.substr(begin - k, k))
                      : U"^" + std::u32string(s.substr(0, begin));
    out.push_back(std::string(group) + "l" + std::to_string(k) + ":" + utf8_encode(left) + "|" +
                  pair);
  }
  const std::size_t avail = s.size() - end;
  for (std::size_t k = 1; k <= max_len; ++k) {
    if (k > avail + 1) break;
    std::u32string right = k <= avail ? std::u32string(s.substr(end, k))
                                      : std::u32string(s.substr(end)) + U"$";
    out.push_back(std::string(group) + "r" + std::to_string(k) + ":" + utf8_encode(right) + "|" +
                  pair);
  }
}

}  // namespace detail

/// Base (unconjoined) feature names. `tree` is null for candidates that are
/// only known from the training data; otherwise apply_tree(*tree,
/// lowercase(form)) must equal lemma up to capitalization.
inline std::vector<std::string> base_lemma_features(std::u32string_view form,
                                                    std::u32string_view lemma,
                                                    const EditTree* tree,
                                                    std::span<const Lexicon> lexicons,
                                                    const FeatureConfig& cfg) {
  std::vector<std::string> out;
  const std::u32string lform = to_lower(form);
  if (tree) {
    const auto produced = apply_tree(*tree, std::u32string_view(lform));
    if (!produced || to_lower(*produced) != to_lower(lemma)) {
      throw std::invalid_argument("edit tree does not produce lemma '" + utf8_encode(lemma) +
                                  "' from '" + utf8_encode(form) + "'");
    }
    const std::string tree_str = tree->render();
    if (cfg.tree_features) {
      out.push_back("t:" + tree_str);
      out.push_back("tw:" + tree_str + "|" + utf8_encode(lform));
      detail::emit_affixes(out, "t", lform, cfg.max_affix, "|" + tree_str);
    }
    if (cfg.alignment_features) {
      const auto segments = alignment(*tree, lform, *produced);
      std::size_t fpos = 0;
      std::size_t lpos = 0;
      for (const auto& seg : segments) {
        const std::string pair = utf8_encode(seg.form) + ">" + utf8_encode(seg.lemma);
        out.push_back("a:" + pair);
        detail::emit_context(out, "af", lform, fpos, fpos + seg.form.size(), cfg.max_context,
                             pair);
        detail::emit_context(out, "al", *produced, lpos, lpos + seg.lemma.size(),
                             cfg.max_context, pair);
        fpos += seg.form.size();
        lpos += seg.lemma.size();
      }
    }
  } else {
    out.push_back("seen");
  }
  if (cfg.lemma_features) {
    out.push_back("l:" + utf8_encode(lemma));
    detail::emit_affixes(out, "l", lemma, cfg.max_affix, "");
  }
  if (cfg.dictionary_features) {
    const std::string variants[4] = {utf8_encode(to_lower(lemma)),
                                     utf8_encode(to_first_upper(lemma)),
                                     utf8_encode(to_upper(lemma)), utf8_encode(lemma)};
    static constexpr const char* kVariantNames[4] = {"lower", "first", "upper", "mixed"};
    for (const auto& lex : lexicons) {
      for (int v = 0; v < 4; ++v) {
        if (lex.contains(variants[v])) out.push_back("d:" + lex.name() + ":" + kVariantNames[v]);
      }
    }
  }
  return out;
}

/// Tag conjunction suffixes: "" (bare), "&P", and "&P+attr" per attribute.
inline std::vector<std::string> tag_conjunctions(const MorphTag& tag, const FeatureConfig& cfg) {
  std::vector<std::string> out{""};
  if (tag.pos().empty()) return out;
  if (cfg.conjoin_pos) out.push_back("&" + tag.pos());
  if (cfg.conjoin_attrs) {
    for (const auto& a : tag.attrs()) out.push_back("&" + tag.pos() + "+" + a);
  }
  return out;
}

/// Full feature-name multiset: every base feature times every tag conjunction.
inline std::vector<std::string> lemma_feature_names(std::u32string_view form,
                                                    std::u32string_view lemma,
                                                    const EditTree* tree, const MorphTag& tag,
                                                    std::span<const Lexicon> lexicons,
                                                    const FeatureConfig& cfg) {
  const auto base = base_lemma_features(form, lemma, tree, lexicons, cfg);
  const auto conj = tag_conjunctions(tag, cfg);
  std::vector<std::string> out;
  out.reserve(base.size() * conj.size());
  for (const auto& c : conj) {
    for (const auto& b : base) out.push_back(b + c);
  }
  return out;
}

/// Interns the names (growing or frozen dictionary) into a count vector.
inline FeatureVector to_feature_vector(const std::vector<std::string>& names,
                                       FeatureDictionary& dict) {
  std::vector<std::uint32_t> ids;
  ids.reserve(names.size());
  for (const auto& n : names) {
    if (auto id = dict.intern(n)) ids.push_back(*id);
  }
  return FeatureVector::from_indices(std::move(ids));
}

/// Index space of conjoined lemma features. A full feature is a pair (base
/// feature, tag conjunction) with weight index base * conjunctions + conj, so
/// base features of a candidate are computed once and combined with any tag.
/// The conjunction set is fixed before training; base features may keep
/// growing without invalidating existing indices.
class LemmaFeatureSpace {
 public:
  FeatureDictionary base;
  FeatureDictionary conj;

  LemmaFeatureSpace() { conj.intern(""); }

  std::size_t conjunction_count() const { return conj.size(); }
  std::size_t dimension() const { return base.size() * conj.size(); }

  std::uint32_t index(std::uint32_t base_id, std::uint32_t conj_id) const {
    return static_cast<std::uint32_t>(base_id * conj.size() + conj_id);
  }

  std::string name(std::uint32_t index) const {
    const auto c = conj.size();
    return base.name(static_cast<std::uint32_t>(index / c)) + conj.name(static_cast<std::uint32_t>(index % c));
  }

  /// Adds the conjunctions of a training tag. Must happen before any weights exist.
  void register_tag(const MorphTag& tag, const FeatureConfig& cfg) {
    for (const auto& c : tag_conjunctions(tag, cfg)) conj.intern(c);
  }

  /// Conjunction ids of a tag; conjunctions unseen in training are dropped.
  std::vector<std::uint32_t> conj_ids(const MorphTag& tag, const FeatureConfig& cfg) const {
    std::vector<std::uint32_t> out;
    for (const auto& c : tag_conjunctions(tag, cfg))
      if (auto id = conj.find(c)) out.push_back(*id);
    return out;
  }

  std::vector<std::uint32_t> base_ids(const std::vector<std::string>& names) const {
    std::vector<std::uint32_t> out;
    out.reserve(names.size());
    for (const auto& n : names)
      if (auto id = base.find(n)) out.push_back(*id);
    return out;
  }

  std::vector<std::uint32_t> base_ids_growing(const std::vector<std::string>& names) {
    std::vector<std::uint32_t> out;
    out.reserve(names.size());
    for (const auto& n : names)
      if (auto id = base.intern(n)) out.push_back(*id);
    return out;
  }

  FeatureVector combine(std::span<const std::uint32_t> base_ids,
                        std::span<const std::uint32_t> conj_ids) const {
    std::vector<std::uint32_t> ids;
    ids.reserve(base_ids.size() * conj_ids.size());
    for (auto c : conj_ids)
      for (auto b : base_ids) ids.push_back(index(b, c));
    return FeatureVector::from_indices(std::move(ids));
  }

  /// Sum of weights of every (base, conj) combination, with multiplicity.
  double score(std::span<const std::uint32_t> base_ids, std::span<const std::uint32_t> conj_ids,
               std::span<const double> weights) const {
    const std::size_t c_count = conj.size();
    double s = 0.0;
    for (auto b : base_ids) {
      const std::size_t row = b * c_count;
      for (auto c : conj_ids) s += weights[row + c];
    }
    return s;
  }

  /// weights[(b, c)] += scale for every combination.
  void add(std::span<const std::uint32_t> base_ids, std::span<const std::uint32_t> conj_ids,
           double scale, std::span<double> target) const {
    const std::size_t c_count = conj.size();
    for (auto b : base_ids) {
      const std::size_t row = b * c_count;
      for (auto c : conj_ids) target[row + c] += scale;
    }
  }
};

}  // namespace lemming
