#pragma once

// Fills tag and lemma fields of sentences with a loaded model.

#include <algorithm>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

#include "lemming/model_io.hpp"

namespace lemming {

class Annotator {
 public:
  explicit Annotator(ModelFile f) : model_(std::move(f)) {
    if (model_.kind == "joint") joint_ = joint_of(model_);
  }

  const ModelFile& model() const { return model_; }

  /// Tagger-only models leave lemmata untouched. Baselines without a tagger
  /// read the POS from the sentence's existing tags.
  void annotate(Sentence& s) const {
    if (s.empty()) return;
    const auto forms = forms_of(s);
    if (joint_) {
      const auto out = decode_joint(*joint_, forms);
      for (std::size_t i = 0; i < s.size(); ++i) {
        s[i].tag = out[i].tag;
        s[i].lemma = out[i].lemma;
      }
      return;
    }
    if (model_.tagger) {
      const auto tags = model_.tagger->tag(forms);
      for (std::size_t i = 0; i < s.size(); ++i) s[i].tag = tags[i];
    }
    if (model_.lemmatizer) {
      for (auto& t : s) t.lemma = model_.lemmatizer->predict(t.form, *t.tag);
    } else if (model_.baseline) {
      for (auto& t : s) {
        if (!t.tag)
          throw CorpusError("a " + model_.kind + " model without a tagger needs tagged input; token '" + t.form +
                            "' has no tag");
        t.lemma = model_.baseline->predict(t.form, t.tag->pos());
      }
    }
  }

  /// Sentences are split across threads; output order equals input order.
  Corpus annotate(Corpus corpus, std::size_t threads = 1) const {
    threads = std::max<std::size_t>(1, std::min(threads, corpus.size()));
    std::vector<std::exception_ptr> errors(corpus.size());
    auto work = [&](std::size_t first) {
      for (std::size_t k = first; k < corpus.size(); k += threads) {
        try {
          annotate(corpus[k]);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    return corpus;
  }

 private:
  ModelFile model_;
  std::optional<JointModel> joint_;
};

}  // namespace lemming
