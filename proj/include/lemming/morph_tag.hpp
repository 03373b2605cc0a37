#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lemming/text.hpp"

namespace lemming {

/// A part of speech plus a set of morphological attribute strings such as
/// "Gender=Fem". Rendered canonically as POS|attr1|attr2 with sorted attrs;
/// taggers treat the rendering as one atomic label.
class MorphTag {
 public:
  MorphTag() = default;
  MorphTag(std::string pos, std::vector<std::string> attrs = {})
      : pos_(std::move(pos)), attrs_(std::move(attrs)) {
    if (pos_.empty()) throw std::invalid_argument("MorphTag: empty POS");
    std::sort(attrs_.begin(), attrs_.end());
    attrs_.erase(std::unique(attrs_.begin(), attrs_.end()), attrs_.end());
    std::erase_if(attrs_, [](const std::string& a) { return a.empty(); });
  }

  /// Inverse of render(). "_" alone is not a valid tag.
  static MorphTag parse(std::string_view text) {
    auto parts = split(text, '|');
    std::string pos = std::move(parts.front());
    if (pos.empty() || pos == "_") throw std::invalid_argument("MorphTag: empty POS in '" + std::string(text) + "'");
    parts.erase(parts.begin());
    return MorphTag(std::move(pos), std::move(parts));
  }

  const std::string& pos() const { return pos_; }
  const std::vector<std::string>& attrs() const { return attrs_; }

  std::string render() const {
    std::string out = pos_;
    for (const auto& a : attrs_) {
      out += '|';
      out += a;
    }
    return out;
  }

  friend bool operator==(const MorphTag&, const MorphTag&) = default;
  friend auto operator<=>(const MorphTag& a, const MorphTag& b) { return a.render() <=> b.render(); }

 private:
  std::string pos_;
  std::vector<std::string> attrs_;
};

}  // namespace lemming
