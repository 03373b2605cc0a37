#pragma once

// Seeded toy language for tests and experiments. Verbs inflect by suffix in
// three classes (ar/er/ir; er and ir share most endings, among them the 3pl
// "en"). A noun's gender follows its singular ending (-a and consonants
// feminine, -o and -e masculine) and plurals add -s after a vowel, -es after
// a consonant, so a plural in -es is either a masculine -e noun or a
// feminine consonant noun. Plural noun phrases take the gender-syncretic
// determiner "los", leaving the lemma as the only clue to such a plural's
// gender.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lemming/corpus.hpp"
#include "lemming/morph_tag.hpp"

namespace lemming {

struct SyntheticSpec {
  std::size_t verbs = 80;
  std::size_t nouns = 300;
  /// Verb paradigm cells used, in the order 1sg 2sg 3sg 1pl 2pl 3pl.
  std::size_t verb_cells = 6;
  /// Probability that a noun phrase is plural, i.e. headed by syncretic "los".
  double syncretism_rate = 0.3;
  /// Share of verbs in the er/ir classes, whose forms overlap; the rest are ar.
  double ambiguity_rate = 0.6;
  double zipf_exponent = 1.0;
  std::size_t train_tokens = 5000;
  std::size_t dev_tokens = 1000;
  std::size_t test_tokens = 1000;
};

struct ParadigmEntry {
  std::string form;
  std::string lemma;
  MorphTag tag;
};

struct SyntheticCorpus {
  Corpus train, dev, test;
  /// Every inflected form of every open-class lemma.
  std::vector<ParadigmEntry> paradigms;
  /// All lemmata of the language, including those never sampled.
  std::vector<std::string> lexicon;
};

namespace detail {

struct VerbClass {
  const char* infinitive;
  const char* endings[6];
};

inline constexpr VerbClass kVerbClasses[3] = {
    {"ar", {"o", "as", "a", "amos", "ais", "an"}},
    {"er", {"o", "es", "e", "emos", "eis", "en"}},
    {"ir", {"o", "es", "e", "imos", "is", "en"}},
};

inline constexpr const char* kPronouns[6] = {"yo", "tu", "ella", "nosotros", "vosotros", "ellos"};

inline MorphTag person_tag(const char* pos, std::size_t cell) {
  return MorphTag(pos, {std::string("Number=") + (cell < 3 ? "Sg" : "Pl"),
                        "Person=" + std::to_string(cell % 3 + 1)});
}

inline MorphTag nominal_tag(const char* pos, bool fem, bool plural) {
  return MorphTag(pos, {fem ? "Gender=Fem" : "Gender=Masc", plural ? "Number=Pl" : "Number=Sg"});
}

class Generator {
 public:
  Generator(std::uint64_t seed, const SyntheticSpec& spec) : rng_(seed), spec_(spec) {}

  SyntheticCorpus run() {
    SyntheticCorpus out;
    for (std::size_t c = 0; c < spec_.verb_cells; ++c) reserve(kPronouns[c]);
    for (const char* w : {"el", "la", "los", "."}) reserve(w);
    make_verbs(out);
    make_nouns(out);
    out.train = sample(spec_.train_tokens);
    out.dev = sample(spec_.dev_tokens);
    out.test = sample(spec_.test_tokens);
    return out;
  }

 private:
  struct Verb {
    std::string stem;
    std::size_t cls;
  };
  struct Noun {
    std::string singular, plural;
    bool fem;
  };

  std::mt19937_64 rng_;
  SyntheticSpec spec_;
  std::set<std::string> used_;
  std::vector<Verb> verbs_;
  std::vector<Noun> nouns_;
  std::map<std::size_t, std::discrete_distribution<std::size_t>> zipf_;

  void reserve(const std::string& w) { used_.insert(w); }

  std::size_t uniform(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::string syllables(std::size_t n) {
    static const std::string kOnsets = "bcdfglmnprstv";
    static const std::string kVowels = "aeiou";
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      s += kOnsets[uniform(kOnsets.size())];
      s += kVowels[uniform(kVowels.size())];
    }
    return s;
  }

  // Claims all forms if none is taken yet.
  bool claim(const std::vector<std::string>& forms) {
    std::set<std::string> fresh(forms.begin(), forms.end());
    if (fresh.size() != forms.size()) return false;
    for (const auto& f : forms)
      if (used_.count(f)) return false;
    used_.insert(forms.begin(), forms.end());
    return true;
  }

  void make_verbs(SyntheticCorpus& out) {
    static const std::string kCodas = "bdlmnrstv";
    while (verbs_.size() < spec_.verbs) {
      const std::size_t cls = coin(spec_.ambiguity_rate) ? 1 + uniform(2) : 0;
      const std::string stem = syllables(1 + uniform(2)) + kCodas[uniform(kCodas.size())];
      const auto& vc = kVerbClasses[cls];
      std::vector<std::string> forms{stem + vc.infinitive};
      for (std::size_t c = 0; c < spec_.verb_cells; ++c) forms.push_back(stem + vc.endings[c]);
      if (!claim(forms)) continue;
      verbs_.push_back({stem, cls});
      out.lexicon.push_back(forms[0]);
      for (std::size_t c = 0; c < spec_.verb_cells; ++c)
        out.paradigms.push_back({forms[c + 1], forms[0], person_tag("V", c)});
    }
  }

  void make_nouns(SyntheticCorpus& out) {
    // Stems end in l, n or r; as many -e nouns as bare-consonant nouns, so
    // -es plurals are balanced between the genders.
    static const char* kEndings[] = {"a", "o", "e", "e", "e", "", "", ""};
    static const std::string kStemCodas = "lnr";
    while (nouns_.size() < spec_.nouns) {
      const std::string ending = kEndings[uniform(8)];
      const std::string sg = syllables(1 + uniform(2)) + kStemCodas[uniform(3)] + ending;
      const std::string pl = sg + (ending.empty() ? "es" : "s");
      if (!claim({sg, pl})) continue;
      const bool fem = ending != "o" && ending != "e";
      nouns_.push_back({sg, pl, fem});
      out.lexicon.push_back(sg);
      out.paradigms.push_back({sg, sg, nominal_tag("N", fem, false)});
      out.paradigms.push_back({pl, sg, nominal_tag("N", fem, true)});
    }
  }

  std::size_t zipf(std::size_t n) {
    auto& dist = zipf_[n];
    if (dist.probabilities().size() != n) {
      std::vector<double> w(n);
      for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), spec_.zipf_exponent);
      dist = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }
    return dist(rng_);
  }

  static Token token(std::string form, std::string lemma, MorphTag tag) {
    return Token{std::move(form), std::move(lemma), std::move(tag), {}};
  }

  void noun_phrase(Sentence& s, bool plural) {
    const auto& n = nouns_[zipf(nouns_.size())];
    const char* det = plural ? "los" : (n.fem ? "la" : "el");
    s.push_back(token(det, "el", nominal_tag("D", n.fem, plural)));
    s.push_back(token(plural ? n.plural : n.singular, n.singular, nominal_tag("N", n.fem, plural)));
  }

  void verb(Sentence& s, std::size_t cell) {
    const auto& v = verbs_[zipf(verbs_.size())];
    const auto& vc = kVerbClasses[v.cls];
    s.push_back(token(v.stem + vc.endings[cell], v.stem + vc.infinitive, person_tag("V", cell)));
  }

  Sentence sentence() {
    Sentence s;
    const bool has_nouns = !nouns_.empty();
    const bool third_person = spec_.verb_cells >= 6 && has_nouns && coin(0.5);
    if (third_person) {
      const bool plural = coin(spec_.syncretism_rate);
      noun_phrase(s, plural);
      verb(s, plural ? 5 : 2);
    } else {
      const std::size_t cell = uniform(spec_.verb_cells);
      s.push_back(token(kPronouns[cell], kPronouns[cell], person_tag("PRON", cell)));
      verb(s, cell);
    }
    if (has_nouns && coin(0.7)) noun_phrase(s, coin(spec_.syncretism_rate));
    s.push_back(token(".", ".", MorphTag("PUNCT")));
    s.front().form = utf8_encode(to_first_upper(utf8_decode(s.front().form)));
    return s;
  }

  Corpus sample(std::size_t tokens) {
    Corpus c;
    std::size_t n = 0;
    while (n < tokens) {
      c.push_back(sentence());
      n += c.back().size();
    }
    return c;
  }
};

}  // namespace detail

inline void validate(const SyntheticSpec& spec) {
  auto rate = [](double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument(std::string("synthetic: ") + name + " must lie in [0, 1]");
  };
  if (spec.verbs == 0) throw std::invalid_argument("synthetic: at least one verb is required");
  if (spec.verb_cells < 1 || spec.verb_cells > 6)
    throw std::invalid_argument("synthetic: verb_cells must be between 1 and 6");
  rate(spec.syncretism_rate, "syncretism_rate");
  rate(spec.ambiguity_rate, "ambiguity_rate");
  if (!(spec.zipf_exponent >= 0.0)) throw std::invalid_argument("synthetic: zipf_exponent must be non-negative");
  if (spec.verbs + spec.nouns > 20000) throw std::invalid_argument("synthetic: too many lemmata");
}

inline SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, const SyntheticSpec& spec = {}) {
  validate(spec);
  return detail::Generator(seed, spec).run();
}

}  // namespace lemming
