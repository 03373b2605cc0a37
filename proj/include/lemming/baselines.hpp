#pragma once

// Two lemmatization baselines keyed on (form, POS). `simple` returns the most
// frequent training lemma of a seen pair and the form itself otherwise. JCK is
// a character transducer trained with the averaged structured perceptron:
// every input character emits one output symbol, and COPY stands for the
// character itself.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lemming/chain.hpp"
#include "lemming/corpus.hpp"
#include "lemming/edit_tree.hpp"
#include "lemming/features.hpp"
#include "lemming/log.hpp"
#include "lemming/text.hpp"

namespace lemming {

class SimpleLemmatizer {
 public:
  struct Entry {
    std::string lemma;
    std::size_t count = 0;
  };

  void add(const std::string& form, const std::string& pos, const std::string& lemma) {
    ++counts_[{form, pos}][lemma];
  }

  /// Most frequent lemma of a seen pair; ties go to the smaller lemma.
  std::optional<Entry> lookup(const std::string& form, const std::string& pos) const {
    auto it = counts_.find({form, pos});
    if (it == counts_.end()) return std::nullopt;
    Entry best;
    for (const auto& [lemma, n] : it->second)  // map order: ascending lemma
      if (n > best.count) best = {lemma, n};
    return best;
  }

  bool knows(const std::string& form, const std::string& pos) const { return counts_.count({form, pos}) > 0; }

  std::string predict(const std::string& form, const std::string& pos) const {
    auto e = lookup(form, pos);
    return e ? e->lemma : form;
  }

  using Counts = std::map<std::pair<std::string, std::string>, std::map<std::string, std::size_t>>;
  const Counts& counts() const { return counts_; }
  Counts& counts() { return counts_; }

 private:
  Counts counts_;
};

inline SimpleLemmatizer simple_train(const Corpus& corpus) {
  SimpleLemmatizer m;
  for (const auto& s : corpus)
    for (const auto& t : s)
      if (t.lemma && t.tag) m.add(t.form, t.tag->pos(), *t.lemma);
  return m;
}

inline std::string simple_predict(const SimpleLemmatizer& m, const std::string& form, const std::string& pos) {
  return m.predict(form, pos);
}

/// Perceptron weights that also track the mean of the weight vector after
/// every example seen so far.
class AveragedWeights {
 public:
  explicit AveragedWeights(std::size_t n = 0) : w_(n, 0.0), u_(n, 0.0) {}

  void resize(std::size_t n) {
    w_.resize(n, 0.0);
    u_.resize(n, 0.0);
  }
  std::size_t size() const { return w_.size(); }

  void add(std::size_t i, double delta) {
    w_[i] += delta;
    u_[i] += static_cast<double>(examples_) * delta;
  }
  /// Marks the end of one example.
  void tick() { ++examples_; }
  std::size_t examples() const { return examples_; }

  const std::vector<double>& current() const { return w_; }

  std::vector<double> averaged() const {
    if (examples_ == 0) return w_;
    std::vector<double> out(w_.size());
    for (std::size_t i = 0; i < w_.size(); ++i) out[i] = w_[i] - u_[i] / static_cast<double>(examples_);
    return out;
  }

 private:
  std::vector<double> w_, u_;
  std::size_t examples_ = 0;
};

/// Placeholder for the copied input character inside an output symbol.
inline constexpr char32_t kCopyMark = U'\x01';

inline std::string render_jck_symbol(const std::u32string& sym) {
  if (sym == std::u32string(1, kCopyMark)) return "<COPY>";
  std::u32string out;
  for (char32_t c : sym) {
    if (c == kCopyMark) {
      for (char32_t d : std::u32string_view(U"<COPY>")) out.push_back(d);
    } else {
      out.push_back(c);
    }
  }
  return out.empty() ? "<EPS>" : utf8_encode(out);
}

/// One training type, lowercased, with an output symbol per input character.
struct JckExample {
  std::u32string form;
  std::string pos;
  std::u32string lemma;
  std::vector<std::u32string> symbols;
};

/// Per-character output symbols from the edit-tree alignment. Identical
/// one-character segments become COPY; a substitution block's first character
/// emits the block's output and the rest emit nothing; insertions attach to
/// the previous character (or the next one at the start).
inline std::vector<std::u32string> jck_symbols(std::u32string_view form, std::u32string_view lemma) {
  const auto segs = alignment(extract_tree(form, lemma), form, lemma);
  std::vector<std::u32string> out;
  std::u32string pending;  // insertion before the first character
  for (const auto& seg : segs) {
    if (seg.form.empty()) {
      if (out.empty()) {
        pending += seg.lemma;
      } else {
        out.back() += seg.lemma;
      }
      continue;
    }
    if (seg.form.size() == 1 && seg.form == seg.lemma) {
      out.push_back(std::u32string(1, kCopyMark));
    } else {
      out.push_back(seg.lemma);
      for (std::size_t k = 1; k < seg.form.size(); ++k) out.emplace_back();
    }
    if (!pending.empty()) {
      out.front() = pending + out.front();
      pending.clear();
    }
  }
  return out;
}

inline std::u32string apply_jck_symbols(std::u32string_view form, const std::vector<std::u32string>& symbols) {
  std::u32string out;
  for (std::size_t i = 0; i < form.size(); ++i)
    for (char32_t c : symbols[i]) out.push_back(c == kCopyMark ? form[i] : c);
  return out;
}

struct JckConfig {
  std::size_t iterations = 10;
  /// Context characters on each side of the current one.
  std::size_t window = 3;
  std::size_t min_symbol_pairs = 5;
  std::uint64_t seed = 42;
};

struct JckAlignment {
  /// COPY first, then the remaining symbols in ascending order.
  std::vector<std::u32string> alphabet;
  std::vector<JckExample> examples;
  std::size_t dropped = 0;
};

/// Distinct (form, POS, lemma) types with their symbol sequences; symbols used
/// by fewer than min_symbol_pairs distinct form-lemma pairs are pruned, and
/// types that need a pruned symbol are dropped.
inline JckAlignment jck_align(const Corpus& corpus, const JckConfig& cfg = {}) {
  std::set<std::tuple<std::u32string, std::string, std::u32string>> types;
  for (const auto& s : corpus)
    for (const auto& t : s)
      if (t.lemma && t.tag && !t.lemma->empty())
        types.insert({to_lower(utf8_decode(t.form)), t.tag->pos(), to_lower(utf8_decode(*t.lemma))});

  std::vector<JckExample> all;
  std::map<std::u32string, std::set<std::pair<std::u32string, std::u32string>>> users;
  for (const auto& [form, pos, lemma] : types) {
    JckExample ex{form, pos, lemma, jck_symbols(form, lemma)};
    for (const auto& sym : ex.symbols) users[sym].insert({form, lemma});
    all.push_back(std::move(ex));
  }
  const std::u32string copy(1, kCopyMark);
  JckAlignment out;
  out.alphabet.push_back(copy);
  for (const auto& [sym, pairs] : users)
    if (sym != copy && pairs.size() >= cfg.min_symbol_pairs) out.alphabet.push_back(sym);
  const std::set<std::u32string> kept(out.alphabet.begin(), out.alphabet.end());
  for (auto& ex : all) {
    const bool ok = std::all_of(ex.symbols.begin(), ex.symbols.end(), [&](const auto& s) { return kept.count(s) > 0; });
    if (ok) {
      out.examples.push_back(std::move(ex));
    } else {
      ++out.dropped;
    }
  }
  if (out.dropped > 0)
    log::warn("jck: dropped " + std::to_string(out.dropped) + " training pairs that need a pruned output symbol");
  return out;
}

/// Context n-grams around position i (all substrings of the window that
/// contain the current character), each also conjoined with the POS.
inline std::vector<std::string> jck_context_features(std::u32string_view form, std::size_t i, const std::string& pos,
                                                     std::size_t window) {
  std::u32string padded;
  padded.append(window, U'^');
  padded.append(form);
  padded.append(window, U'$');
  const std::size_t c = i + window;
  std::vector<std::string> out;
  for (std::size_t a = 0; a <= window; ++a) {
    for (std::size_t b = 0; b <= window; ++b) {
      const std::string gram = std::to_string(a) + "," + std::to_string(b) + ":" +
                               utf8_encode(std::u32string_view(padded).substr(c - a, a + b + 1));
      out.push_back(gram);
      out.push_back(gram + "&" + pos);
    }
  }
  return out;
}

struct JckModel {
  std::vector<std::u32string> alphabet;
  FeatureDictionary features;
  /// Transition block (|Y|+1) x |Y| (row 0 is the start), then feature x |Y|.
  std::vector<double> weights;
  std::size_t window = 3;
  std::size_t iterations = 10;

  std::size_t symbol_count() const { return alphabet.size(); }
  std::size_t transition(std::size_t prev_plus_one, std::size_t y) const { return prev_plus_one * symbol_count() + y; }
  std::size_t emission_offset() const { return (symbol_count() + 1) * symbol_count(); }
  std::size_t emission(std::uint32_t feature, std::size_t y) const {
    return emission_offset() + static_cast<std::size_t>(feature) * symbol_count() + y;
  }

  std::vector<std::vector<std::uint32_t>> observe(std::u32string_view form, const std::string& pos) const {
    std::vector<std::vector<std::uint32_t>> out(form.size());
    for (std::size_t i = 0; i < form.size(); ++i)
      for (const auto& f : jck_context_features(form, i, pos, window))
        if (auto id = features.find(f)) out[i].push_back(*id);
    return out;
  }

  /// As observe(), adding unseen features (with zero weights).
  std::vector<std::vector<std::uint32_t>> observe_growing(std::u32string_view form, const std::string& pos) {
    std::vector<std::vector<std::uint32_t>> out(form.size());
    for (std::size_t i = 0; i < form.size(); ++i)
      for (const auto& f : jck_context_features(form, i, pos, window)) out[i].push_back(*features.intern(f));
    weights.resize(emission_offset() + features.size() * symbol_count(), 0.0);
    return out;
  }

  /// Emission scores [position][symbol].
  std::vector<std::vector<double>> node_scores(const std::vector<std::vector<std::uint32_t>>& obs,
                                               const std::vector<double>& w) const {
    std::vector<std::vector<double>> node(obs.size(), std::vector<double>(symbol_count(), 0.0));
    for (std::size_t i = 0; i < obs.size(); ++i)
      for (std::size_t y = 0; y < symbol_count(); ++y)
        for (auto f : obs[i]) node[i][y] += w[emission(f, y)];
    return node;
  }

  double path_score(const std::vector<std::vector<double>>& node, const std::vector<double>& w,
                    const std::vector<std::uint32_t>& path) const {
    double s = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) s += w[transition(i == 0 ? 0 : path[i - 1] + 1, path[i])] + node[i][path[i]];
    return s;
  }

  /// Best symbol index sequence; ties prefer COPY, then smaller symbols.
  std::vector<std::uint32_t> decode(const std::vector<std::vector<std::uint32_t>>& obs,
                                    const std::vector<double>& w) const {
    const std::size_t n = obs.size(), y_count = symbol_count();
    if (n == 0) return {};
    const auto node = node_scores(obs, w);
    Chain c;
    c.node = node;
    c.incoming.resize(n);
    for (std::size_t y = 0; y < y_count; ++y) c.node[0][y] += w[transition(0, y)];
    for (std::size_t i = 1; i < n; ++i) {
      c.incoming[i].resize(y_count);
      for (std::size_t y = 0; y < y_count; ++y)
        for (std::uint32_t p = 0; p < y_count; ++p) c.incoming[i][y].push_back({p, w[transition(p + 1, y)]});
    }
    return viterbi(c).states;
  }

  /// Highest-scoring path that differs from `gold`, with its score. Each such
  /// path follows gold up to its first deviation and then completes optimally.
  std::pair<std::vector<std::uint32_t>, double> best_rival(const std::vector<std::vector<std::uint32_t>>& obs,
                                                           const std::vector<double>& w,
                                                           const std::vector<std::uint32_t>& gold) const {
    const std::size_t n = obs.size(), y_count = symbol_count();
    const auto node = node_scores(obs, w);
    std::vector<std::vector<double>> done(n, std::vector<double>(y_count));  // best score of i.. given y at i
    std::vector<std::vector<std::uint32_t>> next(n, std::vector<std::uint32_t>(y_count, 0));
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t y = 0; y < y_count; ++y) {
        double tail = 0.0;
        if (i + 1 < n) {
          tail = kNegInf;
          for (std::uint32_t z = 0; z < y_count; ++z) {
            const double v = w[transition(y + 1, z)] + done[i + 1][z];
            if (v > tail) {
              tail = v;
              next[i][y] = z;
            }
          }
        }
        done[i][y] = node[i][y] + tail;
      }
    }
    double prefix = 0.0, best = kNegInf;
    std::size_t at = 0;
    std::uint32_t dev = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t from = i == 0 ? 0 : gold[i - 1] + 1;
      for (std::uint32_t y = 0; y < y_count; ++y) {
        if (y == gold[i]) continue;
        const double v = prefix + w[transition(from, y)] + done[i][y];
        if (v > best) {
          best = v;
          at = i;
          dev = y;
        }
      }
      prefix += w[transition(from, gold[i])] + node[i][gold[i]];
    }
    if (best == kNegInf) return {gold, kNegInf};  // single symbol: no rival
    std::vector<std::uint32_t> path(gold.begin(), gold.begin() + static_cast<std::ptrdiff_t>(at));
    path.push_back(dev);
    for (std::size_t i = at; i + 1 < n; ++i) path.push_back(next[i][path.back()]);
    return {path, best};
  }

  std::string predict(const std::string& form, const std::string& pos) const {
    const auto x = to_lower(utf8_decode(form));
    const auto path = decode(observe(x, pos), weights);
    std::vector<std::u32string> syms;
    for (auto y : path) syms.push_back(alphabet[y]);
    return utf8_encode(apply_jck_symbols(x, syms));
  }
};

inline JckModel jck_train(const JckAlignment& aligned, const JckConfig& cfg = {}) {
  JckModel m;
  m.alphabet = aligned.alphabet;
  m.window = cfg.window;
  m.iterations = cfg.iterations;
  std::map<std::u32string, std::uint32_t> sym_index;
  for (std::size_t y = 0; y < m.alphabet.size(); ++y) sym_index[m.alphabet[y]] = static_cast<std::uint32_t>(y);

  std::vector<std::vector<std::vector<std::uint32_t>>> obs;
  std::vector<std::vector<std::uint32_t>> gold;
  for (const auto& ex : aligned.examples) {
    obs.push_back(m.observe_growing(ex.form, ex.pos));
    std::vector<std::uint32_t> g;
    for (const auto& s : ex.symbols) g.push_back(sym_index.at(s));
    gold.push_back(std::move(g));
  }
  m.features.freeze();
  AveragedWeights w(m.weights.size());

  auto add_path = [&](const std::vector<std::vector<std::uint32_t>>& o, const std::vector<std::uint32_t>& path,
                      double scale) {
    for (std::size_t i = 0; i < path.size(); ++i) {
      w.add(m.transition(i == 0 ? 0 : path[i - 1] + 1, path[i]), scale);
      for (auto f : o[i]) w.add(m.emission(f, path[i]), scale);
    }
  };

  std::vector<std::size_t> order(obs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t mistakes = 0;
    for (auto k : order) {
      if (!obs[k].empty()) {
        // a tie with the best other path counts as a mistake
        const auto [rival, rival_score] = m.best_rival(obs[k], w.current(), gold[k]);
        if (rival != gold[k] && rival_score >= m.path_score(m.node_scores(obs[k], w.current()), w.current(), gold[k])) {
          add_path(obs[k], gold[k], 1.0);
          add_path(obs[k], rival, -1.0);
          ++mistakes;
        }
      }
      w.tick();
    }
    log::debug("jck: iteration " + std::to_string(it + 1) + " mistakes " + std::to_string(mistakes));
  }
  m.weights = w.averaged();
  return m;
}

inline std::string jck_predict(const JckModel& m, const std::string& form, const std::string& pos) {
  return m.predict(form, pos);
}

/// `simple` for seen (form, POS) pairs, JCK (when present) for the rest.
struct BaselineModel {
  SimpleLemmatizer simple;
  std::optional<JckModel> jck;

  std::string predict(const std::string& form, const std::string& pos) const {
    if (simple.knows(form, pos) || !jck) return simple.predict(form, pos);
    return jck->predict(form, pos);
  }
};

inline BaselineModel train_baseline(const Corpus& corpus, bool with_jck, const JckConfig& cfg = {}) {
  BaselineModel m;
  m.simple = simple_train(corpus);
  if (with_jck) m.jck = jck_train(jck_align(corpus, cfg), cfg);
  return m;
}

}  // namespace lemming
