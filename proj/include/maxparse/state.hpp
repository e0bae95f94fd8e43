#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <maxparse/action.hpp>
#include <maxparse/head_rules.hpp>
#include <maxparse/tree.hpp>

namespace maxparse {

struct IllegalAction : std::runtime_error {
  explicit IllegalAction(const std::string& what) : std::runtime_error(what) {}
};

enum class Pass : std::uint8_t { Tag = 1, Chunk = 2, Structure = 3 };
enum class Turn : std::uint8_t { Build, Check };

/// Start/Join annotation placed on a forest tree by a build action.
struct Note {
  bool set = false;
  Mark mark = Mark::Start;
  std::string label;
};

struct ChunkMark {
  Mark mark = Mark::Other;
  std::string label;
};

struct SentenceContext {
  std::vector<std::string> tokens;
  std::shared_ptr<const HeadRules> rules;
};

inline std::shared_ptr<const SentenceContext> make_context(
    std::vector<std::string> tokens,
    std::shared_ptr<const HeadRules> rules = nullptr) {
  auto ctx = std::make_shared<SentenceContext>();
  ctx->tokens = std::move(tokens);
  if (!rules) rules = std::shared_ptr<const HeadRules>(&HeadRules::defaults(), [](const HeadRules*) {});
  ctx->rules = std::move(rules);
  return ctx;
}

/// Derivation state of the three-pass procedure.  Pass 1 assigns POS tags
/// left to right, pass 2 assigns chunk marks and ends by materializing the
/// forest, pass 3 alternates build and check until a single tree covers the
/// sentence.
///
/// Invariants in pass 3: every tree left of `cursor` carries a note, every
/// tree right of it carries none; during a check turn the tree at `cursor`
/// is the one the preceding build just annotated, and the rightmost annotated
/// run ends there.
struct ParserState {
  std::shared_ptr<const SentenceContext> ctx;
  Pass pass = Pass::Tag;
  std::vector<std::string> tags;
  std::vector<ChunkMark> chunks;
  std::shared_ptr<const std::vector<TreePtr>> forest;
  std::vector<Note> notes;
  std::size_t cursor = 0;
  Turn turn = Turn::Build;
  bool finished = false;

  const std::vector<std::string>& tokens() const { return ctx->tokens; }
  std::size_t n_tokens() const { return ctx->tokens.size(); }
  const std::vector<TreePtr>& trees() const { return *forest; }

  TreePtr parse_tree() const {
    if (!finished) throw std::logic_error("parse_tree: derivation not complete");
    return (*forest)[0];
  }
};

inline ParserState initial_state(std::shared_ptr<const SentenceContext> ctx) {
  if (!ctx || ctx->tokens.empty()) throw DataError("empty sentence");
  ParserState s;
  s.ctx = std::move(ctx);
  return s;
}

inline bool is_complete(const ParserState& s) { return s.finished; }

/// Number of consecutive single-child nodes at the top of `t`.
inline int unary_chain(const TreePtr& t) {
  int n = 0;
  const ParseTree* p = t.get();
  while (p->children.size() == 1) {
    ++n;
    p = p->children[0].get();
  }
  return n;
}

constexpr int kUnaryLimit = 3;

struct Proposal {
  std::size_t begin = 0;  // forest index of the Start tree
  std::size_t last = 0;   // forest index of the most recently annotated tree
  std::string label;
  int span_start = 0;
  int span_end = 0;
  bool flat = false;       // every member tree is a preterminal
  bool full_span = false;

  std::size_t width() const { return last - begin + 1; }
};

/// The most recently proposed constituent: the rightmost annotated run,
/// which always ends at the tree the preceding build action annotated.
inline std::optional<Proposal> proposed_constituent(const ParserState& s) {
  if (s.pass != Pass::Structure || s.turn != Turn::Check) return std::nullopt;
  if (s.cursor >= s.notes.size() || !s.notes[s.cursor].set) return std::nullopt;
  Proposal p;
  p.last = s.cursor;
  std::size_t b = s.cursor;
  while (b > 0 && s.notes[b].mark == Mark::Join) --b;
  p.begin = b;
  p.label = s.notes[b].label;
  const auto& trees = s.trees();
  p.span_start = trees[p.begin]->start;
  p.span_end = trees[p.last]->end;
  p.full_span = p.span_start == 0 && p.span_end == static_cast<int>(s.n_tokens());
  p.flat = true;
  for (std::size_t i = p.begin; i <= p.last; ++i)
    if (!trees[i]->leaf()) p.flat = false;
  return p;
}

namespace detail {

inline bool check_yes_legal(const ParserState& s, const Proposal& p) {
  if (p.flat) return false;  // flat constituents are made by the chunk pass
  if (p.width() == 1 && unary_chain(s.trees()[p.begin]) >= kUnaryLimit) return false;
  return true;
}

// A full-span reduction that is allowed to happen must happen: the
// derivation terminates there.
inline bool check_no_legal(const ParserState& s, const Proposal& p) {
  return !(p.full_span && check_yes_legal(s, p));
}

inline TreePtr reduce_run(const ParserState& s, const Proposal& p) {
  std::vector<TreePtr> children(s.trees().begin() + static_cast<long>(p.begin),
                                s.trees().begin() + static_cast<long>(p.last) + 1);
  const std::size_t head = s.ctx->rules->find_head(p.label, children);
  return make_node(p.label, std::move(children), head);
}

// End of pass 2: group every Start/Join run into a flat chunk, leave Other
// tokens as bare preterminals.
inline void detect_chunks(ParserState& s) {
  auto forest = std::make_shared<std::vector<TreePtr>>();
  const auto& tokens = s.tokens();
  const std::size_t n = tokens.size();
  std::size_t i = 0;
  while (i < n) {
    if (s.chunks[i].mark == Mark::Other) {
      forest->push_back(make_leaf(s.tags[i], tokens[i], static_cast<int>(i)));
      ++i;
      continue;
    }
    const std::string& label = s.chunks[i].label;
    std::size_t j = i + 1;
    while (j < n && s.chunks[j].mark == Mark::Join) ++j;
    std::vector<TreePtr> members;
    members.reserve(j - i);
    for (std::size_t k = i; k < j; ++k)
      members.push_back(make_leaf(s.tags[k], tokens[k], static_cast<int>(k)));
    const std::size_t head = s.ctx->rules->find_head(label, members);
    forest->push_back(make_node(label, std::move(members), head));
    i = j;
  }
  s.forest = std::move(forest);
  s.notes.assign(s.trees().size(), Note{});
  s.pass = Pass::Structure;
  s.cursor = 0;
  s.turn = Turn::Build;
  // A single full-span chunk is already a complete parse; a lone bare
  // preterminal is not.
  if (s.trees().size() == 1 && !s.trees()[0]->leaf()) s.finished = true;
}

}  // namespace detail

/// Applies one action, validating it against the procedure semantics.
inline ParserState apply(const ParserState& s, const Action& a) {
  if (s.finished) throw IllegalAction("derivation is already complete");
  ParserState next = s;

  switch (s.pass) {
    case Pass::Tag: {
      if (a.kind != ActionKind::Tag) throw IllegalAction("pass 1 expects a TAG action");
      next.tags.push_back(a.label);
      ++next.cursor;
      if (next.cursor == s.n_tokens()) {
        next.pass = Pass::Chunk;
        next.cursor = 0;
      }
      return next;
    }

    case Pass::Chunk: {
      if (a.kind != ActionKind::Chunk) throw IllegalAction("pass 2 expects a CHUNK action");
      if (a.mark == Mark::Join) {
        if (s.cursor == 0 || s.chunks[s.cursor - 1].mark == Mark::Other ||
            s.chunks[s.cursor - 1].label != a.label)
          throw IllegalAction("Join " + a.label + " does not continue a chunk run");
      }
      next.chunks.push_back(ChunkMark{a.mark, a.label});
      ++next.cursor;
      if (next.cursor == s.n_tokens()) detail::detect_chunks(next);
      return next;
    }

    case Pass::Structure:
    default: {
      if (s.turn == Turn::Build) {
        if (a.kind != ActionKind::Build) throw IllegalAction("expected a BUILD action");
        if (s.cursor >= s.trees().size())
          throw IllegalAction("no tree left to annotate");
        if (a.mark == Mark::Join) {
          if (s.cursor == 0 || !s.notes[s.cursor - 1].set ||
              s.notes[s.cursor - 1].label != a.label)
            throw IllegalAction("Join " + a.label + " has no matching open constituent");
        } else if (a.mark != Mark::Start) {
          throw IllegalAction("build actions are Start or Join");
        }
        next.notes[s.cursor] = Note{true, a.mark, a.label};
        next.turn = Turn::Check;
        return next;
      }

      if (a.kind != ActionKind::Check) throw IllegalAction("expected a CHECK action");
      auto p = proposed_constituent(s);
      if (!p) throw IllegalAction("check with no proposed constituent");
      if (a.yes) {
        if (p->flat)
          throw IllegalAction("flat constituent must be formed in the chunk pass");
        if (!detail::check_yes_legal(s, *p))
          throw IllegalAction("unary chain limit exceeded");
        TreePtr node = detail::reduce_run(s, *p);
        auto forest = std::make_shared<std::vector<TreePtr>>();
        forest->reserve(s.trees().size() - p->width() + 1);
        std::vector<Note> notes;
        notes.reserve(forest->capacity());
        for (std::size_t i = 0; i < p->begin; ++i) {
          forest->push_back(s.trees()[i]);
          notes.push_back(s.notes[i]);
        }
        forest->push_back(std::move(node));
        notes.push_back(Note{});
        for (std::size_t i = p->last + 1; i < s.trees().size(); ++i) {
          forest->push_back(s.trees()[i]);
          notes.push_back(s.notes[i]);
        }
        next.forest = std::move(forest);
        next.notes = std::move(notes);
        next.cursor = p->begin;
        next.turn = Turn::Build;
        if (p->full_span) next.finished = true;
      } else {
        if (!detail::check_no_legal(s, *p))
          throw IllegalAction("completing reduction is forced");
        next.cursor = s.cursor + 1;
        next.turn = Turn::Build;
      }
      return next;
    }
  }
}

/// Per-procedure label inventories used to generate candidate actions.
struct ActionVocab {
  std::vector<std::string> pos_tags;
  std::vector<std::string> chunk_labels;
  std::vector<std::string> build_labels;
};

/// Ordered candidate actions: tag and Start candidates in vocabulary order,
/// then Join, then Other / the check decisions.
inline std::vector<Action> legal_actions(const ParserState& s, const ActionVocab& vocab) {
  std::vector<Action> out;
  if (s.finished) return out;

  switch (s.pass) {
    case Pass::Tag:
      out.reserve(vocab.pos_tags.size());
      for (const auto& t : vocab.pos_tags) out.push_back(Action::tag(t));
      return out;

    case Pass::Chunk: {
      for (const auto& l : vocab.chunk_labels) out.push_back(Action::chunk_start(l));
      if (s.cursor > 0 && s.chunks[s.cursor - 1].mark != Mark::Other)
        out.push_back(Action::chunk_join(s.chunks[s.cursor - 1].label));
      out.push_back(Action::chunk_other());
      return out;
    }

    case Pass::Structure:
    default: {
      if (s.turn == Turn::Build) {
        if (s.cursor >= s.trees().size()) return out;  // dead end
        for (const auto& l : vocab.build_labels) out.push_back(Action::build_start(l));
        if (s.cursor > 0 && s.notes[s.cursor - 1].set)
          out.push_back(Action::build_join(s.notes[s.cursor - 1].label));
        return out;
      }
      auto p = proposed_constituent(s);
      if (!p) return out;
      if (detail::check_no_legal(s, *p)) out.push_back(Action::check(false));
      if (detail::check_yes_legal(s, *p)) out.push_back(Action::check(true));
      return out;
    }
  }
}

}  // namespace maxparse
