#pragma once

// Joint tagging and lemmatization: a tag chain (the tagger's CRF) with one
// lemma variable hanging off every tag variable,
//
//   p(l, m | w) ∝ exp(g(m, w)·λ + Σ_i f(l_i, w_i, m_i)·θ),   l_i ∈ candidates(w_i).
//
// The graph is a tree, so summing (or maximizing) each lemma leaf into its
// tag node and running the chain recursions is exact belief propagation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lemming/chain.hpp"
#include "lemming/corpus.hpp"
#include "lemming/lemmatizer.hpp"
#include "lemming/log.hpp"
#include "lemming/optimize.hpp"
#include "lemming/tagger.hpp"

namespace lemming {

class JointModel {
 public:
  TaggerModel tagger;
  LemmatizerModel lemmatizer;
  /// Where the initial tagger weights came from.
  std::string provenance;

  /// Conjunction ids of every tagger tag in the lemma feature space.
  std::vector<std::vector<std::uint32_t>> conjunction_table() const {
    std::vector<std::vector<std::uint32_t>> out;
    for (const auto& t : tagger.tags) out.push_back(lemmatizer.conj_ids(t));
    return out;
  }
};

struct FactorGraph {
  Observations obs;
  std::vector<std::vector<double>> emissions;
  TagLattice lattice;
  std::vector<CandidateSet> candidates;
  std::vector<std::vector<std::vector<std::uint32_t>>> base_ids;  // [token][candidate]
  /// Log lemma-tag factor [token][lattice slot][candidate] = f(l, w, m)·θ.
  std::vector<std::vector<std::vector<double>>> factor;

  std::size_t size() const { return obs.size(); }
};

struct JointPosteriors {
  double log_z = 0.0;
  ChainPosteriors chain;
  std::vector<std::vector<double>> tags;                  // [token][lattice slot]
  std::vector<std::vector<double>> lemmas;                // [token][candidate]
  std::vector<std::vector<std::vector<double>>> joint;    // [token][lattice slot][candidate]
  std::vector<std::uint32_t> map_tags;                    // tag ids
  std::vector<std::size_t> map_lemmas;                    // candidate indices
  double map_score = 0.0;
};

/// Precomputed per-token inputs of a sentence: observations, candidates and
/// base lemma features.
struct JointInput {
  Observations obs;
  std::vector<CandidateSet> candidates;
  std::vector<std::vector<std::vector<std::uint32_t>>> base_ids;
};

inline JointInput joint_input(const JointModel& m, std::span<const std::string> forms) {
  JointInput in;
  in.obs = m.tagger.observe(forms);
  for (std::size_t i = 0; i < forms.size(); ++i) {
    in.candidates.push_back(m.lemmatizer.candidates(forms[i]));
    if (in.candidates.back().empty())
      throw std::runtime_error("joint: no lemma candidates for token " + std::to_string(i + 1) + " '" + forms[i] + "'");
    in.base_ids.push_back(m.lemmatizer.candidate_base_ids(in.candidates.back()));
  }
  return in;
}

/// Factor graph on the pruned tag lattice. With `gold` the gold tags are kept
/// in the lattice; `clamp` reduces the lattice to exactly the gold tags.
inline FactorGraph build_factor_graph(const JointModel& m, const std::vector<std::vector<std::uint32_t>>& conj,
                                      JointInput in, std::span<const std::uint32_t> gold = {},
                                      bool clamp = false) {
  const std::size_t n = in.obs.size();
  if (n == 0) throw std::invalid_argument("joint: empty sentence");
  FactorGraph g;
  g.emissions = m.tagger.emissions(in.obs);
  if (clamp) {
    if (gold.size() != n) throw std::invalid_argument("joint: clamping needs gold tags");
    g.lattice.order = m.tagger.order;
    for (auto t : gold) g.lattice.tags.push_back({t});
  } else {
    g.lattice = m.tagger.prune(g.emissions, m.tagger.order, gold);
  }
  g.obs = std::move(in.obs);
  g.candidates = std::move(in.candidates);
  g.base_ids = std::move(in.base_ids);
  g.factor.resize(n);
  const auto& space = m.lemmatizer.space;
  const auto& theta = m.lemmatizer.theta;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.lattice.tags[i].empty()) throw std::runtime_error("joint: empty tag lattice at token " + std::to_string(i + 1));
    for (auto t : g.lattice.tags[i]) {
      std::vector<double> row;
      for (const auto& ids : g.base_ids[i]) row.push_back(space.score(ids, conj[t], theta));
      g.factor[i].push_back(std::move(row));
    }
  }
  return g;
}

inline FactorGraph build_factor_graph(const JointModel& m, std::span<const std::string> forms) {
  return build_factor_graph(m, m.conjunction_table(), joint_input(m, forms));
}

namespace detail {

// Lemma leaf messages into the tag nodes, dense over all tags.
inline std::vector<std::vector<double>> leaf_messages(const TaggerModel& tagger, const FactorGraph& g, bool max) {
  std::vector<std::vector<double>> msg(g.size(), std::vector<double>(tagger.tag_count(), kNegInf));
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t k = 0; k < g.lattice.tags[i].size(); ++k) {
      const auto& row = g.factor[i][k];
      msg[i][g.lattice.tags[i][k]] = max ? *std::max_element(row.begin(), row.end()) : log_sum_exp(row);
    }
  }
  return msg;
}

inline std::size_t slot_of(const TagLattice& lat, std::size_t i, std::uint32_t tag) {
  const auto& row = lat.tags[i];
  return static_cast<std::size_t>(std::lower_bound(row.begin(), row.end(), tag) - row.begin());
}

}  // namespace detail

inline JointPosteriors bp_infer(const JointModel& m, const FactorGraph& g) {
  const std::size_t n = g.size();
  JointPosteriors out;
  const auto sum_msg = detail::leaf_messages(m.tagger, g, false);
  out.chain = forward_backward(m.tagger.build_chain(g.lattice, g.emissions, &sum_msg));
  out.log_z = out.chain.log_z;
  out.tags.resize(n);
  out.lemmas.resize(n);
  out.joint.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& lat = g.lattice;
    out.tags[i].assign(lat.tags[i].size(), 0.0);
    for (std::uint32_t s = 0; s < lat.state_count(i); ++s) {
      const auto t = lat.current(i, s);
      out.tags[i][detail::slot_of(lat, i, t)] += out.chain.node[i][s];
    }
    out.lemmas[i].assign(g.candidates[i].size(), 0.0);
    for (std::size_t k = 0; k < lat.tags[i].size(); ++k) {
      const double msg = sum_msg[i][lat.tags[i][k]];
      std::vector<double> row(g.factor[i][k].size());
      for (std::size_t c = 0; c < row.size(); ++c) {
        row[c] = msg == kNegInf ? 0.0 : out.tags[i][k] * std::exp(g.factor[i][k][c] - msg);
        out.lemmas[i][c] += row[c];
      }
      out.joint[i].push_back(std::move(row));
    }
  }

  const auto max_msg = detail::leaf_messages(m.tagger, g, true);
  const auto path = viterbi(m.tagger.build_chain(g.lattice, g.emissions, &max_msg));
  out.map_tags = m.tagger.path_tags(g.lattice, path);
  out.map_score = path.score;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = g.factor[i][detail::slot_of(g.lattice, i, out.map_tags[i])];
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (beats(row[c], row[best])) best = c;  // candidates are lemma-sorted
    out.map_lemmas.push_back(best);
  }
  if (!std::isfinite(out.log_z) || !std::isfinite(out.map_score))
    throw std::runtime_error("joint: non-finite belief propagation result");
  return out;
}

/// Unnormalized log-score of a full assignment, computed from the features.
inline double joint_score(const JointModel& m, const FactorGraph& g, std::span<const std::uint32_t> tags,
                          std::span<const std::size_t> lemmas) {
  double s = m.tagger.sequence_score(g.obs, tags, m.tagger.order);
  for (std::size_t i = 0; i < tags.size(); ++i)
    s += m.lemmatizer.space.score(g.base_ids[i][lemmas[i]], m.lemmatizer.conj_ids(m.tagger.tags[tags[i]]),
                                  m.lemmatizer.theta);
  return s;
}

struct JointAnnotation {
  MorphTag tag;
  std::string lemma;
};

inline std::vector<JointAnnotation> decode_joint(const JointModel& m, std::span<const std::string> forms) {
  if (forms.empty()) return {};
  const auto g = build_factor_graph(m, forms);
  const auto post = bp_infer(m, g);
  std::vector<JointAnnotation> out;
  for (std::size_t i = 0; i < forms.size(); ++i)
    out.push_back({m.tagger.tags[post.map_tags[i]], g.candidates[i].entries[post.map_lemmas[i]].lemma});
  return out;
}

/// -log p(gold tags, gold lemmata | w); adds scale * gradient into the λ and
/// θ targets when they are non-empty.
inline double joint_sentence_loss(const JointModel& m, const FactorGraph& g,
                                  const std::vector<std::vector<std::uint32_t>>& conj,
                                  std::span<const std::uint32_t> gold_tags, std::span<const std::size_t> gold_lemmas,
                                  double scale, std::span<double> lambda_target, std::span<double> theta_target) {
  const auto post = bp_infer(m, g);
  const double loss = post.log_z - joint_score(m, g, gold_tags, gold_lemmas);
  if (!std::isfinite(loss)) throw std::runtime_error("joint: non-finite loss");
  if (!lambda_target.empty()) {
    m.tagger.add_expected(g.obs, g.lattice, post.chain, scale, lambda_target);
    for (auto idx : m.tagger.sequence_features(g.obs, gold_tags, m.tagger.order)) lambda_target[idx] -= scale;
  }
  if (!theta_target.empty()) {
    const auto& space = m.lemmatizer.space;
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t k = 0; k < g.lattice.tags[i].size(); ++k) {
        const auto& c_ids = conj[g.lattice.tags[i][k]];
        for (std::size_t c = 0; c < g.base_ids[i].size(); ++c) {
          const double p = post.joint[i][k][c];
          if (p != 0.0) space.add(g.base_ids[i][c], c_ids, scale * p, theta_target);
        }
      }
      space.add(g.base_ids[i][gold_lemmas[i]], conj[gold_tags[i]], -scale, theta_target);
    }
  }
  return loss;
}

struct JointConfig {
  std::size_t epochs = 10;
  double eta0 = 0.1;
  std::uint64_t seed = 42;
  /// Start θ from the pipeline lemmatizer instead of zero.
  bool init_theta_from_lemmatizer = false;
  LemmatizerConfig lemmatizer;
  /// Used only when no pretrained tagger is given.
  TaggerConfig tagger;
};

struct JointTrainingSentence {
  JointInput input;
  std::vector<std::uint32_t> gold_tags;
  std::vector<std::size_t> gold_lemmas;
};

/// λ starts from the pretrained tagger (zero when absent), θ from zero or
/// from `pipeline` when configured. Sentences whose gold tag or lemma lies
/// outside the model's support are skipped with a warning.
inline JointModel train_joint(const Corpus& corpus, std::optional<TaggerModel> pretrained, const JointConfig& cfg,
                              std::vector<Lexicon> lexicons = {},
                              const LemmatizerModel* pipeline = nullptr) {
  std::vector<LemmaInstance> instances;
  for (const auto& s : corpus)
    for (const auto& t : s) {
      if (!t.tag || !t.lemma) throw std::invalid_argument("joint: training token '" + t.form + "' lacks a tag or lemma");
      instances.push_back({t.form, *t.tag, *t.lemma});
    }
  if (instances.empty()) throw std::invalid_argument("joint: empty training corpus");

  JointModel m;
  if (pretrained) {
    m.tagger = std::move(*pretrained);
    m.provenance = "pretrained tagger";
  } else {
    m.tagger = prepare_tagger(corpus, cfg.tagger).first;
    m.provenance = "none";
  }
  if (cfg.init_theta_from_lemmatizer) {
    if (!pipeline) throw std::invalid_argument("joint: lemmatizer initialization requested without a lemmatizer");
    m.lemmatizer = *pipeline;
    m.provenance += ", pipeline lemmatizer";
  } else {
    m.lemmatizer = make_lemmatizer(instances, cfg.lemmatizer, std::move(lexicons));
  }
  m.lemmatizer.space.base.unfreeze();

  std::vector<JointTrainingSentence> data;
  std::size_t skipped = 0;
  for (const auto& s : corpus) {
    if (s.empty()) continue;
    JointTrainingSentence ts;
    const auto forms = forms_of(s);
    ts.input.obs = m.tagger.observe(forms);
    bool ok = true;
    for (const auto& t : s) {
      auto tag = m.tagger.tag_id(*t.tag);
      auto cs = m.lemmatizer.candidates(t.form);
      auto gold = cs.find_ignore_case(*t.lemma);
      if (!tag || !gold) {
        ok = false;
        break;
      }
      std::vector<std::vector<std::uint32_t>> ids;
      for (const auto& names : m.lemmatizer.candidate_base_names(cs))
        ids.push_back(m.lemmatizer.space.base_ids_growing(names));
      ts.gold_tags.push_back(*tag);
      ts.gold_lemmas.push_back(*gold);
      ts.input.candidates.push_back(std::move(cs));
      ts.input.base_ids.push_back(std::move(ids));
    }
    if (!ok) {
      ++skipped;
      continue;
    }
    data.push_back(std::move(ts));
  }
  m.lemmatizer.space.base.freeze();
  m.lemmatizer.theta.resize(m.lemmatizer.space.dimension(), 0.0);
  if (skipped > 0)
    log::warn("joint: skipped " + std::to_string(skipped) +
              " training sentences with a gold tag or lemma outside the model's support");
  if (data.empty()) throw std::runtime_error("joint: no usable training sentence");

  const auto conj = m.conjunction_table();
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const StepSchedule schedule{cfg.eta0, static_cast<double>(data.size())};
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss = 0.0;
    for (auto k : order) {
      const auto& s = data[k];
      const auto g = build_factor_graph(m, conj, s.input, s.gold_tags);
      const double eta = schedule.at(step++);
      loss += joint_sentence_loss(m, g, conj, s.gold_tags, s.gold_lemmas, -eta, m.tagger.weights,
                                  m.lemmatizer.theta);
    }
    log::debug("joint: epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(loss));
  }
  return m;
}

}  // namespace lemming
