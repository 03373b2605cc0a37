#pragma once

// Self-contained JSON model files. Weight vectors are stored sparsely
// (size plus non-zero index/value pairs); doubles are written with enough
// digits to round-trip exactly.

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lemming/baselines.hpp"
#include "lemming/joint.hpp"
#include "lemming/lemmatizer.hpp"
#include "lemming/tagger.hpp"

namespace lemming {

inline constexpr const char* kModelMagic = "lemming-model";
inline constexpr int kFormatMajor = 1;
inline constexpr int kFormatMinor = 0;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// What a model file holds. kind is one of tagger, lemmatizer (a tagger plus
/// a pipeline lemmatizer), joint, simple or jck; baselines carry a tagger only
/// when one was supplied at training time.
struct ModelFile {
  std::string kind;
  std::optional<TaggerModel> tagger;
  std::optional<LemmatizerModel> lemmatizer;
  std::optional<BaselineModel> baseline;
  std::string provenance;
  nlohmann::json config = nlohmann::json::object();
};

namespace io {

using nlohmann::json;

inline json sparse(const std::vector<double>& w) {
  json idx = json::array(), val = json::array();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    idx.push_back(i);
    val.push_back(w[i]);
  }
  return {{"size", w.size()}, {"index", idx}, {"value", val}};
}

inline std::vector<double> dense(const json& j) {
  std::vector<double> w(j.at("size").get<std::size_t>(), 0.0);
  const auto& idx = j.at("index");
  const auto& val = j.at("value");
  if (idx.size() != val.size()) throw ModelError("model: weight index/value length mismatch");
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto i = idx[k].get<std::size_t>();
    if (i >= w.size()) throw ModelError("model: weight index out of range");
    w[i] = val[k].get<double>();
  }
  return w;
}

inline json dictionary(const FeatureDictionary& d) { return {{"names", d.names()}, {"frozen", d.frozen()}}; }

inline void dictionary(const json& j, FeatureDictionary& d, std::size_t skip = 0) {
  const auto names = j.at("names").get<std::vector<std::string>>();
  for (std::size_t k = skip; k < names.size(); ++k) {
    if (d.intern(names[k]) != static_cast<std::uint32_t>(k)) throw ModelError("model: duplicate feature name");
  }
  if (j.at("frozen").get<bool>()) d.freeze();
}

inline json tagger(const TaggerModel& m) {
  json tags = json::array();
  for (const auto& t : m.tags) tags.push_back(t.render());
  std::vector<std::pair<std::uint64_t, std::uint32_t>> tri(m.trigrams.begin(), m.trigrams.end());
  std::sort(tri.begin(), tri.end());
  return {{"tags", tags},
          {"observations", dictionary(m.observations)},
          {"weights", sparse(m.weights)},
          {"trigrams", tri},
          {"order", m.order},
          {"prune_threshold", m.prune_threshold},
          {"max_affix", m.max_affix},
          {"gold_survival", m.gold_survival}};
}

inline TaggerModel tagger(const json& j) {
  TaggerModel m;
  std::vector<MorphTag> tags;
  for (const auto& t : j.at("tags")) tags.push_back(MorphTag::parse(t.get<std::string>()));
  m.set_tags(std::move(tags));
  dictionary(j.at("observations"), m.observations);
  m.weights = dense(j.at("weights"));
  for (const auto& [k, v] : j.at("trigrams").get<std::vector<std::pair<std::uint64_t, std::uint32_t>>>())
    m.trigrams.emplace(k, v);
  m.order = j.at("order").get<std::size_t>();
  m.prune_threshold = j.at("prune_threshold").get<double>();
  m.max_affix = j.at("max_affix").get<std::size_t>();
  m.gold_survival = j.at("gold_survival").get<double>();
  if (m.weights.size() != m.trigram_offset() + m.trigrams.size() + m.observations.size() * m.tag_count())
    throw ModelError("model: tagger weight vector has the wrong size");
  return m;
}

inline json feature_config(const FeatureConfig& c) {
  return {{"max_affix", c.max_affix},
          {"max_context", c.max_context},
          {"tree_features", c.tree_features},
          {"alignment_features", c.alignment_features},
          {"lemma_features", c.lemma_features},
          {"dictionary_features", c.dictionary_features},
          {"conjoin_pos", c.conjoin_pos},
          {"conjoin_attrs", c.conjoin_attrs}};
}

inline FeatureConfig feature_config(const json& j) {
  FeatureConfig c;
  c.max_affix = j.at("max_affix");
  c.max_context = j.at("max_context");
  c.tree_features = j.at("tree_features");
  c.alignment_features = j.at("alignment_features");
  c.lemma_features = j.at("lemma_features");
  c.dictionary_features = j.at("dictionary_features");
  c.conjoin_pos = j.at("conjoin_pos");
  c.conjoin_attrs = j.at("conjoin_attrs");
  return c;
}

inline json lemmatizer(const LemmatizerModel& m) {
  json trees = json::array();
  for (const auto& e : m.inventory.entries()) trees.push_back({e.tree.render(), e.count});
  json lexicons = json::array();
  for (const auto& lex : m.lexicons) {
    std::vector<std::string> words(lex.words().begin(), lex.words().end());
    std::sort(words.begin(), words.end());
    lexicons.push_back({{"name", lex.name()}, {"words", words}});
  }
  return {{"trees", trees},
          {"min_pair_count", m.inventory.min_pair_count()},
          {"seen", m.seen.table()},
          {"lexicons", lexicons},
          {"features", feature_config(m.features)},
          {"base", dictionary(m.space.base)},
          {"conj", dictionary(m.space.conj)},
          {"theta", sparse(m.theta)},
          {"l2", m.l2}};
}

inline LemmatizerModel lemmatizer(const json& j) {
  LemmatizerModel m;
  std::vector<TreeInventory::Entry> trees;
  for (const auto& t : j.at("trees")) {
    try {
      trees.push_back({EditTree::parse(t.at(0).get<std::string>()), t.at(1).get<std::size_t>()});
    } catch (const EditTreeParseError& e) {
      throw ModelError(std::string("model: bad edit tree: ") + e.what());
    }
  }
  m.inventory = TreeInventory(std::move(trees), j.at("min_pair_count").get<std::size_t>());
  for (const auto& [form, lemmas] : j.at("seen").get<std::map<std::string, std::set<std::string>>>())
    for (const auto& l : lemmas) m.seen.add(form, l);
  for (const auto& lex : j.at("lexicons")) {
    const auto words = lex.at("words").get<std::vector<std::string>>();
    m.lexicons.emplace_back(lex.at("name").get<std::string>(),
                            std::unordered_set<std::string>(words.begin(), words.end()));
  }
  m.features = feature_config(j.at("features"));
  dictionary(j.at("base"), m.space.base);
  if (j.at("conj").at("names").empty() || j.at("conj").at("names")[0] != "")
    throw ModelError("model: conjunction table must start with the empty conjunction");
  dictionary(j.at("conj"), m.space.conj, 1);
  m.theta = dense(j.at("theta"));
  if (m.theta.size() != m.space.dimension()) throw ModelError("model: lemmatizer weight vector has the wrong size");
  m.l2 = j.at("l2").get<double>();
  return m;
}

inline json baseline(const BaselineModel& m) {
  json counts = json::array();
  for (const auto& [key, lemmas] : m.simple.counts())
    for (const auto& [lemma, n] : lemmas) counts.push_back({key.first, key.second, lemma, n});
  json out{{"simple", counts}};
  if (m.jck) {
    std::vector<std::string> alphabet;
    for (const auto& s : m.jck->alphabet) alphabet.push_back(utf8_encode(s));
    out["jck"] = {{"alphabet", alphabet},
                  {"features", dictionary(m.jck->features)},
                  {"weights", sparse(m.jck->weights)},
                  {"window", m.jck->window},
                  {"iterations", m.jck->iterations}};
  }
  return out;
}

inline BaselineModel baseline(const json& j) {
  BaselineModel m;
  for (const auto& row : j.at("simple")) {
    m.simple.counts()[{row.at(0).get<std::string>(), row.at(1).get<std::string>()}][row.at(2).get<std::string>()] =
        row.at(3).get<std::size_t>();
  }
  if (j.contains("jck")) {
    const auto& k = j.at("jck");
    JckModel jck;
    for (const auto& s : k.at("alphabet").get<std::vector<std::string>>()) jck.alphabet.push_back(utf8_decode(s));
    dictionary(k.at("features"), jck.features);
    jck.weights = dense(k.at("weights"));
    jck.window = k.at("window");
    jck.iterations = k.at("iterations");
    if (jck.alphabet.empty() || jck.weights.size() != jck.emission_offset() + jck.features.size() * jck.symbol_count())
      throw ModelError("model: JCK weight vector has the wrong size");
    m.jck = std::move(jck);
  }
  return m;
}

}  // namespace io

inline nlohmann::json model_to_json(const ModelFile& f) {
  nlohmann::json j{{"magic", kModelMagic},
                   {"version", {{"major", kFormatMajor}, {"minor", kFormatMinor}}},
                   {"kind", f.kind},
                   {"provenance", f.provenance},
                   {"config", f.config}};
  if (f.tagger) j["tagger"] = io::tagger(*f.tagger);
  if (f.lemmatizer) j["lemmatizer"] = io::lemmatizer(*f.lemmatizer);
  if (f.baseline) j["baseline"] = io::baseline(*f.baseline);
  return j;
}

inline ModelFile model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("magic") || j["magic"] != kModelMagic)
    throw ModelError("model: not a lemming model file");
  try {
    const int major = j.at("version").at("major").get<int>();
    if (major > kFormatMajor) {
      throw ModelError("model: file format version " + std::to_string(major) + "." +
                       std::to_string(j.at("version").at("minor").get<int>()) + " is newer than supported " +
                       std::to_string(kFormatMajor) + "." + std::to_string(kFormatMinor));
    }
    ModelFile f;
    f.kind = j.at("kind").get<std::string>();
    f.provenance = j.at("provenance").get<std::string>();
    f.config = j.at("config");
    if (j.contains("tagger")) f.tagger = io::tagger(j["tagger"]);
    if (j.contains("lemmatizer")) f.lemmatizer = io::lemmatizer(j["lemmatizer"]);
    if (j.contains("baseline")) f.baseline = io::baseline(j["baseline"]);
    const bool ok = (f.kind == "tagger" && f.tagger) || ((f.kind == "lemmatizer" || f.kind == "joint") && f.tagger && f.lemmatizer) ||
                    ((f.kind == "simple" || f.kind == "jck") && f.baseline && (f.kind == "simple" || f.baseline->jck));
    if (!ok) throw ModelError("model: kind '" + f.kind + "' is unknown or its components are missing");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model: malformed file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelError(std::string("model: malformed file: ") + e.what());
  }
}

inline void save_model(const ModelFile& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file " + path);
  out << model_to_json(f).dump() << '\n';
  if (!out) throw ModelError("error writing model file " + path);
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError("model: " + path + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

/// The joint model view of a joint model file.
inline JointModel joint_of(const ModelFile& f) {
  if (f.kind != "joint") throw ModelError("model: not a joint model");
  return JointModel{*f.tagger, *f.lemmatizer, f.provenance};
}

}  // namespace lemming
