#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <maxparse/action.hpp>
#include <maxparse/state.hpp>
#include <maxparse/tree.hpp>

namespace maxparse {

struct UnderivableTree : DataError {
  explicit UnderivableTree(const std::string& why)
      : DataError("underivable tree: " + why) {}
};

struct Derivation {
  std::vector<Action> actions;
  std::vector<double> log_qs;  // per-action conditional scores, filled by search
  double log_score = 0.0;
};

/// Replays an action sequence from scratch; throws IllegalAction on the first
/// action the procedure semantics reject.
inline ParserState replay(std::shared_ptr<const SentenceContext> ctx,
                          const std::vector<Action>& actions) {
  ParserState s = initial_state(std::move(ctx));
  for (const auto& a : actions) s = apply(s, a);
  return s;
}

namespace detail {

struct GoldIndex {
  std::unordered_map<const ParseTree*, const ParseTree*> parent;
  std::unordered_map<const ParseTree*, std::size_t> child_pos;

  void index(const TreePtr& t) {
    for (std::size_t i = 0; i < t->children.size(); ++i) {
      parent[t->children[i].get()] = t.get();
      child_pos[t->children[i].get()] = i;
      index(t->children[i]);
    }
  }
};

inline void collect_flat(const TreePtr& t, std::vector<const ParseTree*>& chunk_of) {
  if (t->leaf()) return;
  if (is_flat(t)) {
    for (int i = t->start; i < t->end; ++i) chunk_of[static_cast<std::size_t>(i)] = t.get();
    return;
  }
  for (const auto& c : t->children) collect_flat(c, chunk_of);
}

}  // namespace detail

/// The unique action sequence whose replay reconstructs `gold`.  The gold
/// tree must be normalized and span the context's tokens exactly.
inline Derivation derive(const TreePtr& gold,
                         const std::shared_ptr<const SentenceContext>& ctx) {
  const std::size_t n = ctx->tokens.size();
  const auto gold_leaves = leaves(gold);
  if (gold_leaves.size() != n)
    throw UnderivableTree("tree yield does not match the token count");
  for (std::size_t i = 0; i < n; ++i)
    if (gold_leaves[i]->word != ctx->tokens[i])
      throw UnderivableTree("tree yield does not match token " + std::to_string(i));

  Derivation d;
  ParserState state = initial_state(ctx);

  auto step = [&](const Action& a) {
    try {
      state = apply(state, a);
    } catch (const IllegalAction& e) {
      throw UnderivableTree(std::string(e.what()) + " (while deriving " + encode(a) + ")");
    }
    d.actions.push_back(a);
  };

  for (const auto& leaf : gold_leaves) step(Action::tag(leaf->label));

  std::vector<const ParseTree*> chunk_of(n, nullptr);
  detail::collect_flat(gold, chunk_of);
  for (std::size_t i = 0; i < n; ++i) {
    const ParseTree* c = chunk_of[i];
    if (!c)
      step(Action::chunk_other());
    else if (c->start == static_cast<int>(i))
      step(Action::chunk_start(c->label));
    else
      step(Action::chunk_join(c->label));
  }

  detail::GoldIndex gi;
  gi.index(gold);

  // Map each forest tree to the gold node it realizes.
  std::vector<const ParseTree*> gold_of;
  if (!state.finished) {
    for (const auto& t : state.trees()) {
      if (t->leaf())
        gold_of.push_back(gold_leaves[static_cast<std::size_t>(t->start)].get());
      else
        gold_of.push_back(chunk_of[static_cast<std::size_t>(t->start)]);
    }
  }

  const std::size_t step_limit = 8 * n + 8 * gold_leaves.size() + 64;
  std::size_t steps = 0;
  while (!state.finished) {
    if (++steps > step_limit) throw UnderivableTree("derivation does not terminate");
    if (state.cursor >= state.trees().size())
      throw UnderivableTree("build ran past the end of the forest");

    const ParseTree* g = gold_of[state.cursor];
    auto pit = gi.parent.find(g);
    if (pit == gi.parent.end())
      throw UnderivableTree("constituent spans the gold root but the parse is incomplete");
    const ParseTree* parent = pit->second;
    const std::size_t pos = gi.child_pos.at(g);

    step(pos == 0 ? Action::build_start(parent->label)
                  : Action::build_join(parent->label));

    const bool complete = pos + 1 == parent->children.size();
    auto proposal = proposed_constituent(state);
    step(Action::check(complete));
    if (complete) {
      gold_of.erase(gold_of.begin() + static_cast<long>(proposal->begin),
                    gold_of.begin() + static_cast<long>(proposal->last) + 1);
      gold_of.insert(gold_of.begin() + static_cast<long>(proposal->begin), parent);
    }
  }

  if (!tree_equal(state.parse_tree(), gold))
    throw UnderivableTree("replayed tree does not match the gold tree");
  return d;
}

}  // namespace maxparse
