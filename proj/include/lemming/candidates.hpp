#pragma once

// Edit-tree inventory and the candidate support function: for a form, the
// lemmata reachable by applying any inventory tree, plus every lemma the
// form was seen with in training.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lemming/edit_tree.hpp"
#include "lemming/text.hpp"

namespace lemming {

struct FormLemma {
  std::string form;
  std::string lemma;
};

/// Edit trees with the number of distinct (form, lemma) types producing each.
/// Trees are extracted from lowercased pairs.
class TreeInventory {
 public:
  struct Entry {
    EditTree tree;
    std::size_t count;
  };

  TreeInventory() = default;

  /// Entries are kept in a deterministic order: count desc, rendering asc.
  explicit TreeInventory(std::vector<Entry> entries, std::size_t min_pair_count = 1)
      : entries_(std::move(entries)), min_pair_count_(min_pair_count) {
    std::vector<std::pair<std::string, Entry>> keyed;
    keyed.reserve(entries_.size());
    for (auto& e : entries_) keyed.emplace_back(e.tree.render(), std::move(e));
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      if (a.second.count != b.second.count) return a.second.count > b.second.count;
      return a.first < b.first;
    });
    entries_.clear();
    for (auto& [k, e] : keyed) {
      index_.emplace(e.tree, entries_.size());
      entries_.push_back(std::move(e));
    }
  }

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t min_pair_count() const { return min_pair_count_; }

  bool contains(const EditTree& t) const { return index_.count(t) > 0; }
  std::optional<std::size_t> count(const EditTree& t) const {
    auto it = index_.find(t);
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].count;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<EditTree, std::size_t, EditTreeHash> index_;
  std::size_t min_pair_count_ = 1;
};

/// form -> lemmata observed with it in training.
class SeenLemmaTable {
 public:
  void add(const std::string& form, const std::string& lemma) { table_[form].insert(lemma); }

  const std::set<std::string>* find(const std::string& form) const {
    auto it = table_.find(form);
    return it == table_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, std::set<std::string>>& table() const { return table_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::set<std::string>> table_;
};

/// The identity transformation for non-empty strings.
inline EditTree identity_tree() { return EditTree::lcs(EditTree(), 0, EditTree(), 0); }

/// Extracts one tree per distinct lowercased (form, lemma) type, counts, and
/// prunes trees produced by fewer than min_pair_count types. The identity
/// tree is always retained when include_identity is set.
inline std::pair<TreeInventory, SeenLemmaTable> build_inventory(std::span<const FormLemma> pairs,
                                                                std::size_t min_pair_count = 2,
                                                                bool include_identity = true) {
  if (pairs.empty()) throw std::invalid_argument("build_inventory: empty training input");
  if (min_pair_count < 1) throw std::invalid_argument("build_inventory: min_pair_count must be >= 1");
  SeenLemmaTable seen;
  std::set<std::pair<std::u32string, std::u32string>> types;
  for (const auto& p : pairs) {
    seen.add(p.form, p.lemma);
    types.emplace(to_lower(utf8_decode(p.form)), to_lower(utf8_decode(p.lemma)));
  }
  std::unordered_map<EditTree, std::size_t, EditTreeHash> counts;
  std::vector<EditTree> order;
  for (const auto& [f, l] : types) {
    auto t = extract_tree(f, l);
    auto [it, inserted] = counts.emplace(t, 0);
    if (inserted) order.push_back(t);
    ++it->second;
  }
  std::vector<TreeInventory::Entry> kept;
  const EditTree ident = identity_tree();
  bool have_identity = false;
  for (const auto& t : order) {
    const std::size_t c = counts.at(t);
    const bool is_ident = t == ident;
    if (c >= min_pair_count || (is_ident && include_identity)) {
      kept.push_back({t, c});
      have_identity |= is_ident;
    }
  }
  if (include_identity && !have_identity) kept.push_back({ident, 0});
  return {TreeInventory(std::move(kept), min_pair_count), std::move(seen)};
}

enum class Provenance { kTree, kSeen, kBoth };

struct Candidate {
  std::string lemma;
  /// Tree mapping lowercase(form) to the lemma up to capitalization; empty
  /// for candidates only known from the seen-lemma table.
  std::optional<EditTree> tree;
  Provenance provenance = Provenance::kTree;
};

struct CandidateSet {
  std::string form;
  std::vector<Candidate> entries;  // sorted by lemma, lemmata distinct

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  std::optional<std::size_t> find(std::string_view lemma) const {
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].lemma == lemma) return i;
    return std::nullopt;
  }

  /// Exact match if present, else the first capitalization-insensitive match.
  std::optional<std::size_t> find_ignore_case(std::string_view lemma) const {
    if (auto i = find(lemma)) return i;
    const auto low = to_lower(utf8_decode(lemma));
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (to_lower(utf8_decode(entries[i].lemma)) == low) return i;
    return std::nullopt;
  }
};

/// Applies every inventory tree to lowercase(form), adds capitalization
/// variants following the casing of the form, and adds all lemmata the form
/// was seen with.
inline CandidateSet generate_candidates(const std::string& form, const TreeInventory& inv,
                                        const SeenLemmaTable& seen) {
  const std::u32string uform = utf8_decode(form);
  const std::u32string lform = to_lower(uform);
  const Casing casing = casing_of(uform);

  std::map<std::string, Candidate> by_lemma;
  // lowercase lemma -> tree that produced it
  std::map<std::u32string, EditTree> produced;
  for (const auto& entry : inv.entries()) {
    auto out = apply_tree(entry.tree, std::u32string_view(lform));
    if (!out) continue;
    produced.try_emplace(to_lower(*out), entry.tree);
    std::vector<std::u32string> variants{*out};
    if (casing == Casing::kFirstUpper) variants.push_back(to_first_upper(*out));
    if (casing == Casing::kAllUpper) variants.push_back(to_upper(*out));
    for (auto& v : variants) {
      by_lemma.try_emplace(utf8_encode(v), Candidate{utf8_encode(v), entry.tree, Provenance::kTree});
    }
  }
  // Prefer the tree extraction itself would assign to this pair.
  for (auto& [lemma, cand] : by_lemma) {
    auto canonical = extract_tree(lform, to_lower(utf8_decode(lemma)));
    if (inv.contains(canonical)) cand.tree = std::move(canonical);
  }
  auto add_seen = [&](const std::string& key) {
    const auto* lemmata = seen.find(key);
    if (!lemmata) return;
    for (const auto& l : *lemmata) {
      auto it = by_lemma.find(l);
      if (it != by_lemma.end()) {
        it->second.provenance = Provenance::kBoth;
        continue;
      }
      Candidate c{l, std::nullopt, Provenance::kSeen};
      if (auto p = produced.find(to_lower(utf8_decode(l))); p != produced.end()) {
        c.tree = p->second;
        c.provenance = Provenance::kBoth;
      }
      by_lemma.emplace(l, std::move(c));
    }
  };
  add_seen(form);
  if (const std::string lf8 = utf8_encode(lform); lf8 != form) add_seen(lf8);

  CandidateSet out{form, {}};
  out.entries.reserve(by_lemma.size());
  for (auto& [l, c] : by_lemma) out.entries.push_back(std::move(c));
  return out;
}

struct CoverageStats {
  double mean_candidates = 0.0;
  double coverage = 0.0;
};

/// Mean candidate-set size and fraction of tokens whose gold lemma
/// (capitalization-insensitive) is among the candidates.
inline CoverageStats coverage_stats(std::span<const FormLemma> held_out, const TreeInventory& inv,
                                    const SeenLemmaTable& seen) {
  if (held_out.empty()) throw std::invalid_argument("coverage_stats: empty held-out data");
  std::size_t total = 0;
  std::size_t covered = 0;
  for (const auto& p : held_out) {
    const auto cands = generate_candidates(p.form, inv, seen);
    total += cands.size();
    if (cands.find_ignore_case(p.lemma)) ++covered;
  }
  const double n = static_cast<double>(held_out.size());
  return {static_cast<double>(total) / n, static_cast<double>(covered) / n};
}

}  // namespace lemming
