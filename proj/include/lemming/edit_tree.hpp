#pragma once

// Edit trees: recursive transformation programs that map an inflected form
// to its lemma. An inner node splits the input around its longest common
// substring with the output and stores only the lengths of the prefix and
// suffix; leaves are literal substitutions. Because the substring itself is
// not stored, one tree generalizes across stems (worked->work and
// touched->touch share a tree).

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lemming/text.hpp"

namespace lemming {

/// Half-open spans [x_begin, x_end) and [y_begin, y_end) of a common substring.
struct SubstringMatch {
  std::size_t x_begin = 0;
  std::size_t x_end = 0;
  std::size_t y_begin = 0;
  std::size_t y_end = 0;

  std::size_t length() const { return x_end - x_begin; }
  friend bool operator==(const SubstringMatch&, const SubstringMatch&) = default;
};

/// Longest common substring by dynamic programming. Ties go to the smallest
/// start in x, then the smallest start in y. Returns nullopt when x and y
/// share no character.
inline std::optional<SubstringMatch> longest_common_substring(std::u32string_view x,
                                                              std::u32string_view y) {
  std::vector<std::size_t> prev(y.size() + 1, 0);
  std::vector<std::size_t> cur(y.size() + 1, 0);
  std::size_t best_len = 0;
  SubstringMatch best;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : 0;
      // Scanning end positions in increasing order means the first match of
      // a given length has the smallest x start (then y start).
      if (cur[j] > best_len) {
        best_len = cur[j];
        best = {i - best_len, i, j - best_len, j};
      }
    }
    std::swap(prev, cur);
  }
  if (best_len == 0) return std::nullopt;
  return best;
}

class EditTreeParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EditTree {
 public:
  enum class Kind { kLcs, kSub };

  /// The identity leaf Sub("", "").
  EditTree() : EditTree(sub(U"", U"")) {}

  static EditTree sub(std::u32string from, std::u32string to) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::kSub;
    node->from = std::move(from);
    node->to = std::move(to);
    node->hash = hash_combine(hash_combine(0x51ed27, std::hash<std::u32string>{}(node->from)),
                              std::hash<std::u32string>{}(node->to));
    return EditTree(std::move(node));
  }

  static EditTree lcs(EditTree left, std::size_t prefix_len, EditTree right,
                      std::size_t suffix_len) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::kLcs;
    node->prefix_len = prefix_len;
    node->suffix_len = suffix_len;
    std::size_t h = hash_combine(0x1c5, prefix_len);
    h = hash_combine(h, suffix_len);
    h = hash_combine(h, left.hash());
    h = hash_combine(h, right.hash());
    node->hash = h;
    node->left = std::make_unique<EditTree>(std::move(left));
    node->right = std::make_unique<EditTree>(std::move(right));
    return EditTree(std::move(node));
  }

  Kind kind() const { return node_->kind; }
  bool is_lcs() const { return node_->kind == Kind::kLcs; }
  bool is_identity_leaf() const {
    return !is_lcs() && node_->from.empty() && node_->to.empty();
  }

  std::size_t prefix_len() const { return node_->prefix_len; }
  std::size_t suffix_len() const { return node_->suffix_len; }
  const EditTree& left() const { return *node_->left; }
  const EditTree& right() const { return *node_->right; }
  const std::u32string& from() const { return node_->from; }
  const std::u32string& to() const { return node_->to; }

  std::size_t hash() const { return node_->hash; }

  friend bool operator==(const EditTree& a, const EditTree& b) {
    if (a.node_ == b.node_) return true;
    if (a.node_->hash != b.node_->hash || a.kind() != b.kind()) return false;
    if (a.is_lcs()) {
      return a.prefix_len() == b.prefix_len() && a.suffix_len() == b.suffix_len() &&
             a.left() == b.left() && a.right() == b.right();
    }
    return a.from() == b.from() && a.to() == b.to();
  }

  /// Canonical text form, e.g. (lcs 4 1 (lcs 0 2 (sub "" "") (sub "ge" "")) (sub "t" "en")).
  std::string render() const {
    std::string out;
    render_into(out);
    return out;
  }

  static EditTree parse(std::string_view text) {
    Parser p{utf8_decode(text), 0};
    EditTree t = p.tree();
    p.skip_ws();
    if (p.pos != p.in.size()) throw EditTreeParseError("trailing input after edit tree");
    return t;
  }

 private:
  struct Node {
    Kind kind = Kind::kSub;
    std::size_t prefix_len = 0;
    std::size_t suffix_len = 0;
    std::unique_ptr<EditTree> left;
    std::unique_ptr<EditTree> right;
    std::u32string from;
    std::u32string to;
    std::size_t hash = 0;
  };

  explicit EditTree(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static std::size_t hash_combine(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  }

  static void render_string(std::string& out, const std::u32string& s) {
    out.push_back('"');
    for (char32_t c : s) {
      if (c == U'"' || c == U'\\') out.push_back('\\');
      utf8_append(out, c);
    }
    out.push_back('"');
  }

  void render_into(std::string& out) const {
    if (is_lcs()) {
      out += "(lcs ";
      out += std::to_string(prefix_len());
      out += ' ';
      out += std::to_string(suffix_len());
      out += ' ';
      left().render_into(out);
      out += ' ';
      right().render_into(out);
      out += ')';
    } else {
      out += "(sub ";
      render_string(out, from());
      out += ' ';
      render_string(out, to());
      out += ')';
    }
  }

  struct Parser {
    std::u32string in;
    std::size_t pos;

    void skip_ws() {
      while (pos < in.size() && (in[pos] == U' ' || in[pos] == U'\t' || in[pos] == U'\n'))
        ++pos;
    }
    void expect(char32_t c) {
      skip_ws();
      if (pos >= in.size() || in[pos] != c)
        throw EditTreeParseError("expected '" + utf8_encode(std::u32string(1, c)) +
                                 "' at position " + std::to_string(pos));
      ++pos;
    }
    std::u32string word() {
      skip_ws();
      std::u32string w;
      while (pos < in.size() && in[pos] >= U'a' && in[pos] <= U'z') w.push_back(in[pos++]);
      return w;
    }
    std::size_t number() {
      skip_ws();
      const std::size_t start = pos;
      std::size_t v = 0;
      while (pos < in.size() && in[pos] >= U'0' && in[pos] <= U'9')
        v = v * 10 + static_cast<std::size_t>(in[pos++] - U'0');
      if (pos == start) throw EditTreeParseError("expected number at position " + std::to_string(pos));
      return v;
    }
    std::u32string quoted() {
      expect(U'"');
      std::u32string s;
      for (;;) {
        if (pos >= in.size()) throw EditTreeParseError("unterminated string");
        char32_t c = in[pos++];
        if (c == U'"') return s;
        if (c == U'\\') {
          if (pos >= in.size()) throw EditTreeParseError("dangling escape");
          c = in[pos++];
        }
        s.push_back(c);
      }
    }
    EditTree tree() {
      expect(U'(');
      const std::u32string kind = word();
      if (kind == U"sub") {
        auto from = quoted();
        auto to = quoted();
        expect(U')');
        return EditTree::sub(std::move(from), std::move(to));
      }
      if (kind == U"lcs") {
        const std::size_t p = number();
        const std::size_t s = number();
        EditTree l = tree();
        EditTree r = tree();
        expect(U')');
        return EditTree::lcs(std::move(l), p, std::move(r), s);
      }
      throw EditTreeParseError("unknown node kind '" + utf8_encode(kind) + "'");
    }
  };

  std::shared_ptr<const Node> node_;
};

struct EditTreeHash {
  std::size_t operator()(const EditTree& t) const { return t.hash(); }
};

/// Extracts the edit tree transforming x into y.
inline EditTree extract_tree(std::u32string_view x, std::u32string_view y) {
  const auto m = longest_common_substring(x, y);
  if (!m) return EditTree::sub(std::u32string(x), std::u32string(y));
  return EditTree::lcs(extract_tree(x.substr(0, m->x_begin), y.substr(0, m->y_begin)),
                       m->x_begin,
                       extract_tree(x.substr(m->x_end), y.substr(m->y_end)),
                       x.size() - m->x_end);
}

inline EditTree extract_tree(std::string_view x, std::string_view y) {
  return extract_tree(utf8_decode(x), utf8_decode(y));
}

namespace detail {

inline bool apply_into(const EditTree& tree, std::u32string_view x, std::u32string& out) {
  if (!tree.is_lcs()) {
    if (x != tree.from()) return false;
    out += tree.to();
    return true;
  }
  const std::size_t p = tree.prefix_len();
  const std::size_t s = tree.suffix_len();
  if (x.size() < p + s) return false;
  if (!apply_into(tree.left(), x.substr(0, p), out)) return false;
  out += x.substr(p, x.size() - p - s);
  return apply_into(tree.right(), x.substr(x.size() - s), out);
}

}  // namespace detail

/// Runs the tree on x; nullopt when the tree does not fit x.
inline std::optional<std::u32string> apply_tree(const EditTree& tree, std::u32string_view x) {
  std::u32string out;
  if (!detail::apply_into(tree, x, out)) return std::nullopt;
  return out;
}

inline std::optional<std::string> apply_tree(const EditTree& tree, std::string_view x) {
  auto r = apply_tree(tree, std::u32string_view(utf8_decode(x)));
  if (!r) return std::nullopt;
  return utf8_encode(*r);
}

struct AlignedSegment {
  std::u32string form;
  std::u32string lemma;
  friend bool operator==(const AlignedSegment&, const AlignedSegment&) = default;
};

namespace detail {

inline void align_into(const EditTree& tree, std::u32string_view x,
                       std::vector<AlignedSegment>& out) {
  if (!tree.is_lcs()) {
    if (!tree.from().empty() || !tree.to().empty()) out.push_back({tree.from(), tree.to()});
    return;
  }
  const std::size_t p = tree.prefix_len();
  const std::size_t s = tree.suffix_len();
  align_into(tree.left(), x.substr(0, p), out);
  for (std::size_t i = p; i < x.size() - s; ++i) {
    out.push_back({std::u32string(1, x[i]), std::u32string(1, x[i])});
  }
  align_into(tree.right(), x.substr(x.size() - s), out);
}

}  // namespace detail

/// Character alignment read off the tree: substring characters pair 1:1,
/// substitution leaves pair block-wise. Requires apply_tree(tree, x) == y.
inline std::vector<AlignedSegment> alignment(const EditTree& tree, std::u32string_view x,
                                             std::u32string_view y) {
  const auto applied = apply_tree(tree, x);
  if (!applied || *applied != y) {
    throw AlignmentError("edit tree does not transform '" + utf8_encode(x) + "' into '" +
                         utf8_encode(y) + "'");
  }
  std::vector<AlignedSegment> out;
  detail::align_into(tree, x, out);
  return out;
}

}  // namespace lemming
