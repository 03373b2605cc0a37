#pragma once

// Pruned linear-chain CRF over atomic morphological tags, order 1 or 2.
//
// Weight layout: bigram block (T+1)^2 with index T as the sentence boundary,
// then one weight per trigram seen in the gold training data, then the
// emission block observation * T + tag (last, so the observation dictionary
// may grow).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lemming/chain.hpp"
#include "lemming/corpus.hpp"
#include "lemming/features.hpp"
#include "lemming/log.hpp"
#include "lemming/morph_tag.hpp"
#include "lemming/optimize.hpp"
#include "lemming/text.hpp"

namespace lemming {

/// Character classes upper X, lower x, digit 9, hyphen -, other o; runs collapsed.
inline std::string word_shape(std::string_view form) {
  std::string out;
  for (char32_t c : utf8_decode(form)) {
    char k = 'o';
    if (is_upper(c)) k = 'X';
    else if (is_lower(c)) k = 'x';
    else if (is_digit(c)) k = '9';
    else if (c == U'-') k = '-';
    if (out.empty() || out.back() != k) out += k;
  }
  return out;
}

/// Observation features of position i: word, affixes, shape, neighbours.
inline std::vector<std::string> tag_feature_names(std::span<const std::string> forms, std::size_t i,
                                                  std::size_t max_affix = 10) {
  if (i >= forms.size()) throw std::out_of_range("tag features: position out of range");
  std::vector<std::string> out{"bias", "w:" + forms[i], "sh:" + word_shape(forms[i])};
  const auto u = utf8_decode(forms[i]);
  for (std::size_t k = 1; k <= std::min(max_affix, u.size()); ++k) {
    out.push_back("p" + std::to_string(k) + ":" + utf8_encode(u.substr(0, k)));
    out.push_back("s" + std::to_string(k) + ":" + utf8_encode(u.substr(u.size() - k)));
  }
  out.push_back("pw:" + (i == 0 ? std::string("<s>") : forms[i - 1]));
  out.push_back("nw:" + (i + 1 == forms.size() ? std::string("</s>") : forms[i + 1]));
  return out;
}

struct TaggerConfig {
  std::size_t order = 2;
  /// Keep a tag when its marginal is at least this fraction of the best one
  /// at its position; 0 disables pruning.
  double prune_threshold = 1e-4;
  std::size_t epochs = 10;
  double eta0 = 0.1;
  std::uint64_t seed = 42;
  std::size_t max_affix = 10;
};

/// Per position observation feature ids.
using Observations = std::vector<std::vector<std::uint32_t>>;

/// Surviving tag ids per position, ascending.
struct TagLattice {
  std::size_t order = 1;
  std::vector<std::vector<std::uint32_t>> tags;

  std::size_t length() const { return tags.size(); }

  /// Chain states at position i: tags at order 1; (previous, current) pairs
  /// at order 2 and i > 0, numbered previous-major.
  std::size_t state_count(std::size_t i) const {
    return order == 2 && i > 0 ? tags[i - 1].size() * tags[i].size() : tags[i].size();
  }
  std::uint32_t current(std::size_t i, std::uint32_t state) const {
    return tags[i][order == 2 && i > 0 ? state % tags[i].size() : state];
  }
  /// Index into tags[i - 1] of the previous tag, for i > 0.
  std::uint32_t previous_slot(std::size_t i, std::uint32_t state) const {
    return order == 2 ? static_cast<std::uint32_t>(state / tags[i].size()) : 0;
  }
};

struct PruneStats {
  std::size_t gold_total = 0;
  std::size_t gold_kept = 0;
};

struct TagMarginals {
  std::vector<std::vector<double>> tags;         // [position][tag]
  std::vector<std::vector<double>> transitions;  // [position][previous * T + current], empty at 0
  double log_z = 0.0;
};

class TaggerModel {
 public:
  std::vector<MorphTag> tags;  // sorted by rendering
  FeatureDictionary observations;
  std::vector<double> weights;
  std::unordered_map<std::uint64_t, std::uint32_t> trigrams;
  std::size_t order = 2;
  double prune_threshold = 1e-4;
  std::size_t max_affix = 10;
  /// Share of gold training tags that survived pruning in the last epoch.
  double gold_survival = 1.0;

  void set_tags(std::vector<MorphTag> t) {
    std::sort(t.begin(), t.end(), [](const MorphTag& a, const MorphTag& b) { return a.render() < b.render(); });
    t.erase(std::unique(t.begin(), t.end()), t.end());
    if (t.empty()) throw std::invalid_argument("tagger: empty tag set");
    tags = std::move(t);
    index_.clear();
    for (std::uint32_t i = 0; i < tags.size(); ++i) index_.emplace(tags[i].render(), i);
  }

  std::optional<std::uint32_t> tag_id(const MorphTag& t) const {
    auto it = index_.find(t.render());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t tag_count() const { return tags.size(); }
  std::uint32_t boundary() const { return static_cast<std::uint32_t>(tags.size()); }

  std::size_t bigram_index(std::uint32_t a, std::uint32_t b) const { return a * (tags.size() + 1) + b; }
  std::uint64_t trigram_key(std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
    const std::uint64_t k = tags.size() + 1;
    return (a * k + b) * k + c;
  }
  std::optional<std::size_t> trigram_index(std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
    auto it = trigrams.find(trigram_key(a, b, c));
    if (it == trigrams.end()) return std::nullopt;
    return trigram_offset() + it->second;
  }
  std::size_t trigram_offset() const { return (tags.size() + 1) * (tags.size() + 1); }
  std::size_t emission_offset() const { return trigram_offset() + trigrams.size(); }
  std::size_t emission_index(std::uint32_t obs, std::uint32_t tag) const {
    return emission_offset() + static_cast<std::size_t>(obs) * tags.size() + tag;
  }
  std::size_t dimension() const { return emission_offset() + observations.size() * tags.size(); }

  /// Readable name of a weight index, for inspection.
  std::string weight_name(std::size_t index) const {
    const std::size_t k = tags.size() + 1;
    auto tag_name = [&](std::size_t t) { return t == tags.size() ? std::string("<b>") : tags[t].render(); };
    if (index < trigram_offset()) return "bigram:" + tag_name(index / k) + ">" + tag_name(index % k);
    if (index < emission_offset()) {
      for (const auto& [key, slot] : trigrams)
        if (trigram_offset() + slot == index)
          return "trigram:" + tag_name(key / (k * k)) + ">" + tag_name(key / k % k) + ">" + tag_name(key % k);
    }
    const std::size_t e = index - emission_offset();
    return observations.name(static_cast<std::uint32_t>(e / tags.size())) + "&" + tags[e % tags.size()].render();
  }

  Observations observe(std::span<const std::string> forms) const {
    Observations out(forms.size());
    for (std::size_t i = 0; i < forms.size(); ++i)
      for (const auto& n : tag_feature_names(forms, i, max_affix))
        if (auto id = observations.find(n)) out[i].push_back(*id);
    return out;
  }

  Observations observe_growing(std::span<const std::string> forms) {
    Observations out(forms.size());
    for (std::size_t i = 0; i < forms.size(); ++i)
      for (const auto& n : tag_feature_names(forms, i, max_affix))
        if (auto id = observations.intern(n)) out[i].push_back(*id);
    return out;
  }

  /// Local scores [position][tag].
  std::vector<std::vector<double>> emissions(const Observations& obs) const {
    const std::size_t t_count = tags.size();
    std::vector<std::vector<double>> e(obs.size(), std::vector<double>(t_count, 0.0));
    for (std::size_t i = 0; i < obs.size(); ++i) {
      for (auto o : obs[i]) {
        const double* w = &weights[emission_index(o, 0)];
        for (std::size_t t = 0; t < t_count; ++t) e[i][t] += w[t];
      }
    }
    return e;
  }

  double bigram(std::uint32_t a, std::uint32_t b) const { return weights[bigram_index(a, b)]; }
  double trigram(std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
    auto idx = trigram_index(a, b, c);
    return idx ? weights[*idx] : 0.0;
  }

  /// Weight indices (with multiplicity) of a complete tag sequence at the
  /// given order: emissions, bigrams including both boundaries, and at order
  /// 2 the known trigrams including boundaries.
  std::vector<std::size_t> sequence_features(const Observations& obs, std::span<const std::uint32_t> seq,
                                             std::size_t at_order) const {
    if (seq.size() != obs.size()) throw std::invalid_argument("tagger: sequence length mismatch");
    std::vector<std::size_t> out;
    const std::uint32_t b = boundary();
    auto at = [&](std::ptrdiff_t i) { return i < 0 || i >= static_cast<std::ptrdiff_t>(seq.size()) ? b : seq[i]; };
    for (std::size_t i = 0; i < seq.size(); ++i)
      for (auto o : obs[i]) out.push_back(emission_index(o, seq[i]));
    const auto n = static_cast<std::ptrdiff_t>(seq.size());
    for (std::ptrdiff_t i = 0; i <= n; ++i) {
      out.push_back(bigram_index(at(i - 1), at(i)));
      if (at_order == 2)
        if (auto idx = trigram_index(at(i - 2), at(i - 1), at(i))) out.push_back(*idx);
    }
    return out;
  }

  double sequence_score(const Observations& obs, std::span<const std::uint32_t> seq,
                        std::size_t at_order) const {
    double s = 0.0;
    for (auto idx : sequence_features(obs, seq, at_order)) s += weights[idx];
    return s;
  }

  /// Pruning cascade up to `target_order` (1 or 2). Gold tags, when given,
  /// are put back into the lattice and their survival is counted.
  TagLattice prune(const std::vector<std::vector<double>>& em, std::size_t target_order,
                   std::span<const std::uint32_t> gold = {}, PruneStats* stats = nullptr) const {
    const std::size_t n = em.size();
    if (n == 0) throw std::invalid_argument("tagger: empty sentence");
    TagLattice lat;
    lat.order = 1;
    lat.tags.resize(n);
    std::vector<std::vector<double>> marg(n);
    for (std::size_t i = 0; i < n; ++i) {
      lat.tags[i].resize(tags.size());
      std::iota(lat.tags[i].begin(), lat.tags[i].end(), 0u);
      marg[i] = softmax(em[i]);
    }
    std::vector<char> lost(n, 0);
    filter(lat, marg, gold, lost);
    if (target_order == 2) {
      const auto post = forward_backward(build_chain(lat, em));
      for (std::size_t i = 0; i < n; ++i) marg[i] = post.node[i];
      filter(lat, marg, gold, lost);
      lat.order = 2;
    }
    if (stats && !gold.empty()) {
      stats->gold_total += n;
      stats->gold_kept += static_cast<std::size_t>(std::count(lost.begin(), lost.end(), 0));
    }
    return lat;
  }

  /// Chain over the lattice; `extra` ([position][tag], optional) is added to
  /// the local scores.
  Chain build_chain(const TagLattice& lat, const std::vector<std::vector<double>>& em,
                    const std::vector<std::vector<double>>* extra = nullptr) const {
    const std::size_t n = lat.length();
    const std::uint32_t b = boundary();
    Chain c;
    c.node.resize(n);
    c.incoming.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t states = lat.state_count(i);
      c.node[i].resize(states);
      if (i > 0) c.incoming[i].resize(states);
      for (std::uint32_t s = 0; s < states; ++s) {
        const std::uint32_t t = lat.current(i, s);
        double v = em[i][t] + (extra ? (*extra)[i][t] : 0.0);
        if (lat.order == 1) {
          if (i == 0) v += bigram(b, t);
          if (i + 1 == n) v += bigram(t, b);
          if (i > 0)
            for (std::uint32_t p = 0; p < lat.tags[i - 1].size(); ++p)
              c.incoming[i][s].push_back({p, bigram(lat.tags[i - 1][p], t)});
        } else {
          const std::uint32_t prev = i == 0 ? b : lat.tags[i - 1][lat.previous_slot(i, s)];
          v += bigram(prev, t);
          if (i == 0) v += trigram(b, b, t);
          if (i + 1 == n) v += bigram(t, b) + trigram(prev, t, b);
          if (i == 1) {
            c.incoming[i][s].push_back({lat.previous_slot(i, s), trigram(b, prev, t)});
          } else if (i > 1) {
            const std::uint32_t p = lat.previous_slot(i, s);
            const std::size_t width = lat.tags[i - 1].size();
            for (std::uint32_t q = 0; q < lat.tags[i - 2].size(); ++q)
              c.incoming[i][s].push_back(
                  {static_cast<std::uint32_t>(q * width + p), trigram(lat.tags[i - 2][q], prev, t)});
          }
        }
        c.node[i][s] = v;
      }
    }
    return c;
  }

  /// target[f] += scale * (expected count of f) under the chain posteriors.
  void add_expected(const Observations& obs, const TagLattice& lat, const ChainPosteriors& post,
                    double scale, std::span<double> target) const {
    const std::size_t n = lat.length();
    const std::uint32_t b = boundary();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint32_t s = 0; s < lat.state_count(i); ++s) {
        const double m = scale * post.node[i][s];
        if (m == 0.0) continue;
        const std::uint32_t t = lat.current(i, s);
        for (auto o : obs[i]) target[emission_index(o, t)] += m;
        if (lat.order == 1) {
          if (i == 0) target[bigram_index(b, t)] += m;
          if (i + 1 == n) target[bigram_index(t, b)] += m;
        } else {
          const std::uint32_t prev = i == 0 ? b : lat.tags[i - 1][lat.previous_slot(i, s)];
          target[bigram_index(prev, t)] += m;
          if (i == 0)
            if (auto idx = trigram_index(b, b, t)) target[*idx] += m;
          if (i + 1 == n) {
            target[bigram_index(t, b)] += m;
            if (auto idx = trigram_index(prev, t, b)) target[*idx] += m;
          }
        }
      }
      if (i == 0) continue;
      for (std::uint32_t s = 0; s < lat.state_count(i); ++s) {
        const std::uint32_t t = lat.current(i, s);
        for (std::size_t k = 0; k < post.arc[i][s].size(); ++k) {
          const double m = scale * post.arc[i][s][k];
          if (m == 0.0) continue;
          if (lat.order == 1) {
            target[bigram_index(lat.tags[i - 1][k], t)] += m;
          } else {
            const std::uint32_t prev = lat.tags[i - 1][lat.previous_slot(i, s)];
            const std::uint32_t pp = i == 1 ? b : lat.tags[i - 2][k];
            if (auto idx = trigram_index(pp, prev, t)) target[*idx] += m;
          }
        }
      }
    }
  }

  /// Tag ids along a chain path.
  std::vector<std::uint32_t> path_tags(const TagLattice& lat, const ChainPath& path) const {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < path.states.size(); ++i) out.push_back(lat.current(i, path.states[i]));
    return out;
  }

  std::vector<std::uint32_t> tag_ids(std::span<const std::string> forms) const {
    if (forms.empty()) return {};
    const auto obs = observe(forms);
    const auto em = emissions(obs);
    const auto lat = prune(em, order);
    return path_tags(lat, viterbi(build_chain(lat, em)));
  }

  std::vector<MorphTag> tag(std::span<const std::string> forms) const {
    std::vector<MorphTag> out;
    for (auto id : tag_ids(forms)) out.push_back(tags[id]);
    return out;
  }

  TagMarginals marginals(std::span<const std::string> forms) const {
    const auto obs = observe(forms);
    const auto em = emissions(obs);
    const auto lat = prune(em, order);
    const auto post = forward_backward(build_chain(lat, em));
    return expand_marginals(lat, post);
  }

  /// Dense [position][tag] and [position][prev * T + cur] posteriors.
  TagMarginals expand_marginals(const TagLattice& lat, const ChainPosteriors& post) const {
    const std::size_t n = lat.length(), t_count = tags.size();
    TagMarginals m;
    m.log_z = post.log_z;
    m.tags.assign(n, std::vector<double>(t_count, 0.0));
    m.transitions.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint32_t s = 0; s < lat.state_count(i); ++s) m.tags[i][lat.current(i, s)] += post.node[i][s];
      if (i == 0) continue;
      m.transitions[i].assign(t_count * t_count, 0.0);
      for (std::uint32_t s = 0; s < lat.state_count(i); ++s) {
        const std::uint32_t t = lat.current(i, s);
        if (lat.order == 2) {
          m.transitions[i][lat.tags[i - 1][lat.previous_slot(i, s)] * t_count + t] += post.node[i][s];
        } else {
          for (std::size_t k = 0; k < post.arc[i][s].size(); ++k)
            m.transitions[i][lat.tags[i - 1][k] * t_count + t] += post.arc[i][s][k];
        }
      }
    }
    return m;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;

  void filter(TagLattice& lat, const std::vector<std::vector<double>>& marg, std::span<const std::uint32_t> gold,
              std::vector<char>& lost) const {
    for (std::size_t i = 0; i < lat.length(); ++i) {
      auto& row = lat.tags[i];
      const double top = *std::max_element(marg[i].begin(), marg[i].end());
      const double cut = prune_threshold * top;
      std::vector<std::uint32_t> kept;
      bool gold_seen = false;
      for (std::size_t k = 0; k < row.size(); ++k) {
        const bool is_gold = !gold.empty() && row[k] == gold[i];
        if (marg[i][k] >= cut) {
          kept.push_back(row[k]);
          gold_seen = gold_seen || is_gold;
        }
      }
      if (!gold.empty() && !gold_seen) {
        lost[i] = 1;
        kept.insert(std::lower_bound(kept.begin(), kept.end(), gold[i]), gold[i]);
      }
      row = std::move(kept);
    }
  }
};

/// Conditional negative log-likelihood of the gold sequence on the lattice
/// pruned to `at_order`; adds scale * gradient into target when non-empty.
inline double tagger_sentence_loss(const TaggerModel& model, const Observations& obs,
                                   std::span<const std::uint32_t> gold, std::size_t at_order, double scale,
                                   std::span<double> target, PruneStats* stats = nullptr) {
  const auto em = model.emissions(obs);
  if (at_order == 0) {
    double loss = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto p = softmax(em[i]);
      loss -= std::log(p[gold[i]]);
      if (target.empty()) continue;
      for (std::uint32_t t = 0; t < p.size(); ++t) {
        const double g = scale * (p[t] - (t == gold[i] ? 1.0 : 0.0));
        for (auto o : obs[i]) target[model.emission_index(o, t)] += g;
      }
    }
    return loss;
  }
  const auto lat = model.prune(em, at_order, gold, stats);
  const auto post = forward_backward(model.build_chain(lat, em));
  const double loss = post.log_z - model.sequence_score(obs, gold, at_order);
  if (!std::isfinite(loss)) throw std::runtime_error("tagger: non-finite loss");
  if (!target.empty()) {
    model.add_expected(obs, lat, post, scale, target);
    for (auto idx : model.sequence_features(obs, gold, at_order)) target[idx] -= scale;
  }
  return loss;
}

struct TaggedSentence {
  std::vector<std::string> forms;
  std::vector<std::uint32_t> gold;
  Observations obs;
};

inline std::vector<std::string> forms_of(const Sentence& s) {
  std::vector<std::string> f;
  f.reserve(s.size());
  for (const auto& t : s) f.push_back(t.form);
  return f;
}

/// Model with tag set, observation dictionary and trigram set of the corpus,
/// all weights zero; also returns the compiled sentences.
inline std::pair<TaggerModel, std::vector<TaggedSentence>> prepare_tagger(const Corpus& corpus,
                                                                          const TaggerConfig& cfg) {
  if (cfg.order != 1 && cfg.order != 2) throw std::invalid_argument("tagger: order must be 1 or 2");
  if (!(cfg.prune_threshold >= 0.0 && cfg.prune_threshold <= 1.0))
    throw std::invalid_argument("tagger: pruning threshold must lie in [0, 1]");
  TaggerModel model;
  model.order = cfg.order;
  model.prune_threshold = cfg.prune_threshold;
  model.max_affix = cfg.max_affix;
  std::vector<MorphTag> tags;
  for (const auto& s : corpus)
    for (const auto& t : s) {
      if (!t.tag) throw std::invalid_argument("tagger: training token '" + t.form + "' has no tag");
      tags.push_back(*t.tag);
    }
  model.set_tags(std::move(tags));
  std::vector<TaggedSentence> data;
  for (const auto& s : corpus) {
    if (s.empty()) continue;
    TaggedSentence ts;
    ts.forms = forms_of(s);
    for (const auto& t : s) ts.gold.push_back(*model.tag_id(*t.tag));
    ts.obs = model.observe_growing(ts.forms);
    if (cfg.order == 2) {
      const std::uint32_t b = model.boundary();
      const auto n = static_cast<std::ptrdiff_t>(ts.gold.size());
      auto at = [&](std::ptrdiff_t i) { return i < 0 || i >= n ? b : ts.gold[i]; };
      for (std::ptrdiff_t i = 0; i <= n; ++i)
        model.trigrams.try_emplace(model.trigram_key(at(i - 2), at(i - 1), at(i)),
                                   static_cast<std::uint32_t>(model.trigrams.size()));
    }
    data.push_back(std::move(ts));
  }
  model.observations.freeze();
  model.weights.assign(model.dimension(), 0.0);
  return {std::move(model), std::move(data)};
}

/// Staged SGD: a local (order 0) model, then the chain model at each order up
/// to the configured one, each on the lattice pruned by the lower orders.
inline TaggerModel train_tagger(const Corpus& corpus, const TaggerConfig& cfg = {}) {
  auto [model, data] = prepare_tagger(corpus, cfg);
  if (data.empty()) throw std::invalid_argument("tagger: empty training corpus");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const StepSchedule schedule{cfg.eta0, static_cast<double>(data.size())};
  for (std::size_t stage = 0; stage <= cfg.order; ++stage) {
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      PruneStats stats;
      double loss = 0.0;
      for (auto k : order) {
        const auto& s = data[k];
        loss += tagger_sentence_loss(model, s.obs, s.gold, stage, -schedule.at(t++), model.weights, &stats);
      }
      if (stage > 0 && stats.gold_total > 0)
        model.gold_survival = static_cast<double>(stats.gold_kept) / static_cast<double>(stats.gold_total);
      log::debug("tagger: order " + std::to_string(stage) + " epoch " + std::to_string(epoch + 1) +
                 " loss " + std::to_string(loss));
    }
  }
  log::info("tagger: gold tag survival after pruning " + std::to_string(model.gold_survival));
  return model;
}

}  // namespace lemming
