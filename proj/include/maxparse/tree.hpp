#pragma once

#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace maxparse {

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct TreeReadError : DataError {
  TreeReadError(const std::string& what, int line_, int column_)
      : DataError(what + " at line " + std::to_string(line_) + ", column " +
                  std::to_string(column_)),
        line(line_),
        column(column_) {}
  int line;
  int column;
};

struct ParseTree;
using TreePtr = std::shared_ptr<const ParseTree>;

/// Immutable constituency tree node.  A leaf is a preterminal: `label` is the
/// POS tag and `word` the surface token.  Interior nodes carry a constituent
/// label and one or more children covering a contiguous half-open token span.
struct ParseTree {
  std::string label;
  std::string word;
  std::vector<TreePtr> children;
  int start = 0;
  int end = 0;
  int head_index = 0;
  std::string head_word;

  bool leaf() const { return children.empty(); }
  int size() const { return end - start; }
};

inline TreePtr make_leaf(std::string label, std::string word, int position) {
  auto t = std::make_shared<ParseTree>();
  t->label = std::move(label);
  t->word = std::move(word);
  t->start = position;
  t->end = position + 1;
  t->head_index = position;
  t->head_word = t->word;
  return t;
}

/// Builds an interior node over contiguous children.  `head_child` selects
/// which child supplies the lexical head; by default the leftmost.
inline TreePtr make_node(std::string label, std::vector<TreePtr> children,
                         std::size_t head_child = 0) {
  if (children.empty())
    throw DataError("make_node: constituent needs at least one child");
  if (head_child >= children.size())
    throw DataError("make_node: head child out of range");
  for (std::size_t i = 1; i < children.size(); ++i)
    if (children[i]->start != children[i - 1]->end)
      throw DataError("make_node: children do not cover a contiguous span");
  auto t = std::make_shared<ParseTree>();
  t->label = std::move(label);
  t->start = children.front()->start;
  t->end = children.back()->end;
  t->head_index = children[head_child]->head_index;
  t->head_word = children[head_child]->head_word;
  t->children = std::move(children);
  return t;
}

/// True iff every child of `t` is a preterminal.  Flat constituents are the
/// chunks of the second pass; they are never assembled in the third pass.
inline bool is_flat(const TreePtr& t) {
  if (!t || t->leaf()) throw std::logic_error("is_flat: expects an interior node");
  for (const auto& c : t->children)
    if (!c->leaf()) return false;
  return true;
}

inline void collect_leaves(const TreePtr& t, std::vector<TreePtr>& out) {
  if (t->leaf()) {
    out.push_back(t);
    return;
  }
  for (const auto& c : t->children) collect_leaves(c, out);
}

inline std::vector<TreePtr> leaves(const TreePtr& t) {
  std::vector<TreePtr> out;
  collect_leaves(t, out);
  return out;
}

inline std::vector<std::string> yield(const TreePtr& t) {
  std::vector<std::string> out;
  for (const auto& l : leaves(t)) out.push_back(l->word);
  return out;
}

inline bool tree_equal(const TreePtr& a, const TreePtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->label != b->label || a->word != b->word) return false;
  if (a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!tree_equal(a->children[i], b->children[i])) return false;
  return true;
}

/// Equality that ignores preterminal labels: same constituent structure and
/// words, POS tags free to differ.
inline bool tree_equal_ignoring_pos(const TreePtr& a, const TreePtr& b) {
  if (!a || !b) return false;
  if (a->leaf() != b->leaf()) return false;
  if (a->leaf()) return a->word == b->word;
  if (a->label != b->label) return false;
  if (a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!tree_equal_ignoring_pos(a->children[i], b->children[i])) return false;
  return true;
}

inline void write_bracketed(std::ostream& os, const TreePtr& t) {
  os << '(' << t->label;
  if (t->leaf()) {
    os << ' ' << t->word;
  } else {
    for (const auto& c : t->children) {
      os << ' ';
      write_bracketed(os, c);
    }
  }
  os << ')';
}

inline std::string write_bracketed(const TreePtr& t) {
  std::ostringstream os;
  write_bracketed(os, t);
  return os.str();
}

namespace detail {

struct BracketCursor {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;
  int column = 1;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  char take() {
    char c = text[pos++];
    if (c == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
    return c;
  }

  void skip_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r'))
      take();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw TreeReadError(what, line, column);
  }

  std::string atom() {
    std::string out;
    while (!eof()) {
      char c = peek();
      if (c == '(' || c == ')' || c == ' ' || c == '\t' || c == '\n' || c == '\r') break;
      if (static_cast<unsigned char>(c) < 0x20) fail("control character in token");
      out.push_back(take());
    }
    if (out.empty()) fail("expected a label or word");
    return out;
  }
};

inline TreePtr parse_tree(BracketCursor& cur, int& next_token);

// After '(', an immediate '(' means an unlabeled wrapper bracket; it must
// contain exactly one tree and is dropped.
inline TreePtr parse_bracket(BracketCursor& cur, int& next_token) {
  cur.skip_space();
  if (cur.eof() || cur.peek() != '(') cur.fail("expected '('");
  cur.take();
  cur.skip_space();
  if (cur.eof()) cur.fail("unexpected end of input");

  if (cur.peek() == '(') {
    std::vector<TreePtr> inner;
    while (true) {
      cur.skip_space();
      if (cur.eof()) cur.fail("unexpected end of input");
      if (cur.peek() == ')') {
        cur.take();
        break;
      }
      if (cur.peek() != '(') cur.fail("unlabeled bracket mixes words and trees");
      inner.push_back(parse_bracket(cur, next_token));
    }
    if (inner.size() != 1) cur.fail("unlabeled bracket must contain exactly one tree");
    return inner.front();
  }

  std::string label = cur.atom();
  std::vector<TreePtr> children;
  std::vector<std::string> words;
  while (true) {
    cur.skip_space();
    if (cur.eof()) cur.fail("unexpected end of input in constituent " + label);
    if (cur.peek() == ')') {
      cur.take();
      break;
    }
    if (cur.peek() == '(') {
      children.push_back(parse_bracket(cur, next_token));
    } else {
      words.push_back(cur.atom());
    }
  }

  if (children.empty() && words.empty()) cur.fail("empty constituent " + label);
  if (!children.empty() && !words.empty())
    cur.fail("constituent " + label + " mixes words and subtrees");
  if (words.size() > 1) cur.fail("preterminal " + label + " has more than one word");
  if (!words.empty()) return make_leaf(std::move(label), std::move(words.front()), next_token++);
  return make_node(std::move(label), std::move(children));
}

inline TreePtr parse_tree(BracketCursor& cur, int& next_token) {
  return parse_bracket(cur, next_token);
}

}  // namespace detail

/// Reads every bracketed tree in `text`.  Token positions restart at zero for
/// each top-level tree; a bare outer `( ... )` wrapper is unwrapped.
inline std::vector<TreePtr> read_bracketed(std::string_view text) {
  detail::BracketCursor cur{text};
  std::vector<TreePtr> out;
  while (true) {
    cur.skip_space();
    if (cur.eof()) break;
    if (cur.peek() != '(') cur.fail("expected '(' at start of tree");
    int next_token = 0;
    out.push_back(detail::parse_tree(cur, next_token));
  }
  return out;
}

inline std::vector<TreePtr> read_bracketed(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_bracketed(buf.str());
}

inline TreePtr read_tree(std::string_view text) {
  auto trees = read_bracketed(text);
  if (trees.size() != 1) {
    detail::BracketCursor cur{text};
    cur.fail("expected exactly one tree");
  }
  return trees.front();
}

namespace detail {

inline std::string strip_function_tags(const std::string& label) {
  if (!label.empty() && label.front() == '-') return label;  // -NONE-, -LRB-, ...
  auto cut = label.find_first_of("-=");
  if (cut == std::string::npos) return label;
  return label.substr(0, cut);
}

inline bool is_trace_leaf(const ParseTree& leaf) { return leaf.label == "-NONE-"; }

inline bool is_quote_leaf(const ParseTree& leaf) {
  return leaf.label == "``" || leaf.label == "''";
}

inline TreePtr normalize_rec(const TreePtr& t, int& next_token) {
  if (t->leaf()) {
    if (is_trace_leaf(*t) || is_quote_leaf(*t)) return nullptr;
    return make_leaf(t->label, t->word, next_token++);
  }
  std::vector<TreePtr> kept;
  for (const auto& c : t->children) {
    auto nc = normalize_rec(c, next_token);
    if (nc) kept.push_back(std::move(nc));
  }
  if (kept.empty()) return nullptr;
  return make_node(detail::strip_function_tags(t->label), std::move(kept));
}

}  // namespace detail

/// Strips function tags and index suffixes from labels, deletes trace leaves
/// (-NONE-) and quotation-mark leaves (`` and ''), and renumbers token spans.
/// Returns nullopt for a tree left with no tokens at all (a vacuous tree).
inline std::optional<TreePtr> normalize_tree(const TreePtr& t) {
  int next_token = 0;
  auto n = detail::normalize_rec(t, next_token);
  if (!n) return std::nullopt;
  return n;
}

}  // namespace maxparse
