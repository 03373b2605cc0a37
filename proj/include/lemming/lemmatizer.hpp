#pragma once

// Log-linear lemmatizer: p(l | w, m) is proportional to exp(theta . f(l, w, m))
// over the candidate set of w and zero elsewhere. Trained by L2-regularized
// maximum likelihood with L-BFGS.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lemming/candidates.hpp"
#include "lemming/corpus.hpp"
#include "lemming/features.hpp"
#include "lemming/log.hpp"
#include "lemming/morph_tag.hpp"
#include "lemming/optimize.hpp"

namespace lemming {

struct LemmaInstance {
  std::string form;
  MorphTag tag;
  std::string lemma;
};

struct LemmatizerConfig {
  FeatureConfig features;
  std::size_t min_pair_count = 2;
  /// L2 strength; unset means 1 / number of training tokens.
  std::optional<double> l2;
  LbfgsOptions lbfgs;
};

struct ScoredLemma {
  std::string lemma;
  double probability;
};

/// One training type with its compiled candidate features.
struct CompiledInstance {
  std::vector<FeatureVector> candidates;
  std::size_t gold = 0;
  double weight = 1.0;
};

/// Negative log-likelihood plus (l2/2)||theta||^2, and its gradient.
inline double compiled_nll_and_gradient(std::span<const CompiledInstance> batch,
                                        std::span<const double> theta, double l2,
                                        std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  double nll = 0.0;
  std::vector<double> scores;
  for (const auto& inst : batch) {
    scores.resize(inst.candidates.size());
    for (std::size_t c = 0; c < scores.size(); ++c) scores[c] = inst.candidates[c].dot(theta);
    const double log_z = log_sum_exp(scores);
    nll += inst.weight * (log_z - scores[inst.gold]);
    for (std::size_t c = 0; c < scores.size(); ++c) {
      const double p = std::exp(scores[c] - log_z);
      inst.candidates[c].add_to(grad, inst.weight * p);
    }
    inst.candidates[inst.gold].add_to(grad, -inst.weight);
  }
  if (l2 > 0.0) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      nll += 0.5 * l2 * theta[i] * theta[i];
      grad[i] += l2 * theta[i];
    }
  }
  if (!std::isfinite(nll)) throw std::runtime_error("lemmatizer: non-finite negative log-likelihood");
  return nll;
}

class LemmatizerModel {
 public:
  TreeInventory inventory;
  SeenLemmaTable seen;
  std::vector<Lexicon> lexicons;
  FeatureConfig features;
  LemmaFeatureSpace space;
  std::vector<double> theta;
  double l2 = 0.0;

  CandidateSet candidates(const std::string& form) const {
    return generate_candidates(form, inventory, seen);
  }

  /// Unconjoined feature names for each candidate of the set.
  std::vector<std::vector<std::string>> candidate_base_names(const CandidateSet& cs) const {
    const auto uform = utf8_decode(cs.form);
    std::vector<std::vector<std::string>> out;
    out.reserve(cs.size());
    for (const auto& c : cs.entries) {
      out.push_back(base_lemma_features(uform, utf8_decode(c.lemma), c.tree ? &*c.tree : nullptr,
                                        lexicons, features));
    }
    return out;
  }

  /// Base feature ids per candidate; names outside the space are dropped.
  std::vector<std::vector<std::uint32_t>> candidate_base_ids(const CandidateSet& cs) const {
    std::vector<std::vector<std::uint32_t>> out;
    for (const auto& names : candidate_base_names(cs)) out.push_back(space.base_ids(names));
    return out;
  }

  std::vector<std::uint32_t> conj_ids(const MorphTag& tag) const {
    return space.conj_ids(tag, features);
  }

  std::vector<FeatureVector> candidate_features(const CandidateSet& cs,
                                                const MorphTag& tag) const {
    const auto conj = conj_ids(tag);
    std::vector<FeatureVector> out;
    for (const auto& ids : candidate_base_ids(cs)) out.push_back(space.combine(ids, conj));
    return out;
  }

  /// Unnormalized log-scores theta . f for each candidate.
  std::vector<double> candidate_scores(const CandidateSet& cs, const MorphTag& tag) const {
    const auto conj = conj_ids(tag);
    std::vector<double> s;
    for (const auto& ids : candidate_base_ids(cs)) s.push_back(space.score(ids, conj, theta));
    return s;
  }

  /// Candidates with probabilities, most probable first, ties by lemma.
  std::vector<ScoredLemma> score_candidates(const std::string& form, const MorphTag& tag) const {
    const auto cs = candidates(form);
    if (cs.empty()) throw std::runtime_error("lemmatizer: no lemma candidates for form '" + form + "'");
    const auto p = softmax(candidate_scores(cs, tag));
    std::vector<ScoredLemma> out;
    for (std::size_t i = 0; i < cs.size(); ++i) out.push_back({cs.entries[i].lemma, p[i]});
    std::stable_sort(out.begin(), out.end(), [](const ScoredLemma& a, const ScoredLemma& b) {
      if (a.probability != b.probability) return a.probability > b.probability;
      return a.lemma < b.lemma;
    });
    return out;
  }

  std::string predict(const std::string& form, const MorphTag& tag) const {
    const auto cs = candidates(form);
    if (cs.empty()) throw std::runtime_error("lemmatizer: no lemma candidates for form '" + form + "'");
    const auto s = candidate_scores(cs, tag);
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] > s[best]) best = i;  // entries are lemma-sorted: ties keep the smaller lemma
    return cs.entries[best].lemma;
  }

  /// Compiles one instance against the current space; nullopt when the gold
  /// lemma is not a candidate.
  std::optional<CompiledInstance> compile(const LemmaInstance& inst, double weight = 1.0) const {
    const auto cs = candidates(inst.form);
    const auto gold = cs.find_ignore_case(inst.lemma);
    if (!gold) return std::nullopt;
    return CompiledInstance{candidate_features(cs, inst.tag), *gold, weight};
  }

  /// As compile(), but adds unseen base features to the space.
  std::optional<CompiledInstance> compile_and_grow(const LemmaInstance& inst, double weight = 1.0) {
    const auto cs = candidates(inst.form);
    const auto gold = cs.find_ignore_case(inst.lemma);
    if (!gold) return std::nullopt;
    const auto conj = conj_ids(inst.tag);
    CompiledInstance ci{{}, *gold, weight};
    for (const auto& names : candidate_base_names(cs))
      ci.candidates.push_back(space.combine(space.base_ids_growing(names), conj));
    return ci;
  }
};

/// NLL and gradient of the model on a batch of (form, gold lemma, tag).
/// Instances whose gold lemma is not a candidate are skipped.
inline std::pair<double, std::vector<double>> nll_and_gradient(const LemmatizerModel& model,
                                                              std::span<const LemmaInstance> batch) {
  std::vector<CompiledInstance> compiled;
  for (const auto& inst : batch) {
    if (auto ci = model.compile(inst)) compiled.push_back(std::move(*ci));
  }
  std::vector<double> grad(model.theta.size());
  const double nll = compiled_nll_and_gradient(compiled, model.theta, model.l2, grad);
  return {nll, std::move(grad)};
}

/// Tokens carrying both a lemma and a tag.
inline std::vector<LemmaInstance> lemma_instances(const Corpus& corpus) {
  std::vector<LemmaInstance> out;
  for (const auto& s : corpus)
    for (const auto& t : s)
      if (t.lemma && t.tag) out.push_back({t.form, *t.tag, *t.lemma});
  return out;
}

/// Builds the candidate machinery without training: the conjunction set of
/// the training tags, no base features, no weights.
inline LemmatizerModel make_lemmatizer(std::span<const LemmaInstance> corpus,
                                       const LemmatizerConfig& cfg,
                                       std::vector<Lexicon> lexicons = {}) {
  if (corpus.empty()) throw std::invalid_argument("lemmatizer: empty training corpus");
  std::vector<FormLemma> pairs;
  pairs.reserve(corpus.size());
  for (const auto& t : corpus) pairs.push_back({t.form, t.lemma});
  auto [inv, seen] = build_inventory(pairs, cfg.min_pair_count);
  LemmatizerModel model;
  model.inventory = std::move(inv);
  model.seen = std::move(seen);
  model.lexicons = std::move(lexicons);
  model.features = cfg.features;
  for (const auto& t : corpus) model.space.register_tag(t.tag, cfg.features);
  model.space.conj.freeze();
  model.l2 = cfg.l2.value_or(1.0 / static_cast<double>(corpus.size()));
  return model;
}

/// Deduplicated (form, tag, lemma) types with token counts, compiled against
/// the model's growing space.
inline std::vector<CompiledInstance> compile_training_set(LemmatizerModel& model,
                                                          std::span<const LemmaInstance> corpus) {
  std::map<std::tuple<std::string, std::string, std::string>, std::pair<std::size_t, std::size_t>>
      types;  // key -> (first index, count)
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& t = corpus[i];
    auto [it, inserted] = types.try_emplace({t.form, t.tag.render(), t.lemma}, i, 0);
    ++it->second.second;
  }
  std::vector<CompiledInstance> out;
  std::size_t skipped = 0;
  for (const auto& [key, v] : types) {
    auto ci = model.compile_and_grow(corpus[v.first], static_cast<double>(v.second));
    if (!ci) {
      skipped += v.second;
      continue;
    }
    out.push_back(std::move(*ci));
  }
  if (skipped > 0) {
    log::warn("lemmatizer: skipped " + std::to_string(skipped) +
              " training tokens whose gold lemma is not among the candidates");
  }
  return out;
}

namespace detail {

// Renumbers the features used by the data densely; returns the used indices.
inline std::vector<std::uint32_t> compact(std::vector<CompiledInstance>& data, std::size_t dim) {
  std::vector<char> used(dim, 0);
  for (const auto& inst : data)
    for (const auto& fv : inst.candidates)
      for (const auto& e : fv.entries()) used[e.index] = 1;
  std::vector<std::uint32_t> to_compact(dim, 0), to_full;
  for (std::size_t i = 0; i < dim; ++i) {
    if (!used[i]) continue;
    to_compact[i] = static_cast<std::uint32_t>(to_full.size());
    to_full.push_back(static_cast<std::uint32_t>(i));
  }
  for (auto& inst : data) {
    for (auto& fv : inst.candidates) {
      std::vector<std::uint32_t> ids;
      std::vector<double> values;
      for (const auto& e : fv.entries()) {
        ids.push_back(to_compact[e.index]);
        values.push_back(e.value);
      }
      fv = FeatureVector::from_pairs(ids, values);
    }
  }
  return to_full;
}

}  // namespace detail

inline LemmatizerModel train_lemmatizer(std::span<const LemmaInstance> corpus,
                                        const LemmatizerConfig& cfg,
                                        std::vector<Lexicon> lexicons = {}) {
  LemmatizerModel model = make_lemmatizer(corpus, cfg, std::move(lexicons));
  auto data = compile_training_set(model, corpus);
  if (data.empty()) throw std::runtime_error("lemmatizer: no training token has a reachable gold lemma");
  model.space.base.freeze();
  model.theta.assign(model.space.dimension(), 0.0);
  if (cfg.lbfgs.max_iterations == 0) return model;
  // Weights of features that never fire stay at zero under L2, so optimize
  // only the used coordinates.
  const auto used = detail::compact(data, model.theta.size());
  const double l2 = model.l2;
  auto result = minimize_lbfgs(
      [&](std::span<const double> x, std::span<double> g) {
        return compiled_nll_and_gradient(data, x, l2, g);
      },
      std::vector<double>(used.size(), 0.0), cfg.lbfgs);
  log::info("lemmatizer: L-BFGS finished after " + std::to_string(result.iterations) +
            " iterations over " + std::to_string(used.size()) + " features, objective " +
            std::to_string(result.value));
  for (std::size_t i = 0; i < used.size(); ++i) model.theta[used[i]] = result.x[i];
  return model;
}

}  // namespace lemming
