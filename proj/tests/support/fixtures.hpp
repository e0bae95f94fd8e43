#pragma once

// Shared test fixtures: a deterministic toy treebank whose sentences range
// from about 5 to 60 tokens, plus exhaustive-search helpers that unit and
// acceptance tests compare the real implementations against.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <maxparse/derive.hpp>
#include <maxparse/search.hpp>
#include <maxparse/state.hpp>
#include <maxparse/train.hpp>
#include <maxparse/tree.hpp>

namespace fixtures {

using namespace maxparse;

inline std::string source_path(const std::string& rel) {
  return std::string(MAXPARSE_SOURCE_DIR) + "/" + rel;
}

inline std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("fixture: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Toy grammar.  Tags are unambiguous per word; PP attachment is decided by
// the preposition ("with"/"of" hang under NP, "near"/"under" under VP), so a
// model can memorize the corpus.  No unary chains; the root always has at
// least two children and ends with the period.

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(gen() % n); }
  const std::string& from(const std::vector<std::string>& xs) { return xs[pick(xs.size())]; }
  bool chance(int percent) { return pick(100) < static_cast<std::size_t>(percent); }
};

inline const std::vector<std::string>& determiners() {
  static const std::vector<std::string> xs = {"the", "a"};
  return xs;
}
inline const std::vector<std::string>& adjectives() {
  static const std::vector<std::string> xs = {"big", "red", "old"};
  return xs;
}
inline const std::vector<std::string>& nouns() {
  static const std::vector<std::string> xs = {"dog", "cat", "ball", "man", "park", "rope"};
  return xs;
}
inline const std::vector<std::string>& verbs() {
  static const std::vector<std::string> xs = {"saw", "took", "held"};
  return xs;
}
inline const std::vector<std::string>& noun_preps() {
  static const std::vector<std::string> xs = {"with", "of"};
  return xs;
}
inline const std::vector<std::string>& verb_preps() {
  static const std::vector<std::string> xs = {"near", "under"};
  return xs;
}

inline std::string flat_np(Rng& r) {
  std::string s = "(NP (DT " + r.from(determiners()) + ")";
  if (r.chance(40)) s += " (JJ " + r.from(adjectives()) + ")";
  s += " (NN " + r.from(nouns()) + "))";
  return s;
}

inline std::string pp(Rng& r, bool noun_attached) {
  const auto& preps = noun_attached ? noun_preps() : verb_preps();
  return "(PP (IN " + r.from(preps) + ") " + flat_np(r) + ")";
}

inline std::string object_np(Rng& r, int& pp_budget) {
  std::string base = flat_np(r);
  if (pp_budget > 0 && r.chance(35)) {
    --pp_budget;
    return "(NP " + base + " " + pp(r, true) + ")";
  }
  return base;
}

inline std::string vp(Rng& r, int pp_budget) {
  std::string s = "(VP (VBD " + r.from(verbs()) + ") " + object_np(r, pp_budget);
  for (; pp_budget > 0; --pp_budget) s += " " + pp(r, false);
  s += ")";
  return s;
}

inline std::string clause(Rng& r, int pp_budget) {
  return "(S " + flat_np(r) + " " + vp(r, pp_budget) + ")";
}

inline std::string sentence(Rng& r, int pp_budget) {
  if (pp_budget >= 2 && r.chance(20)) {
    const int left = pp_budget / 2;
    return "(S " + clause(r, left) + " (, ,) " + clause(r, pp_budget - left) + " (. .))";
  }
  return "(S " + flat_np(r) + " " + vp(r, pp_budget) + " (. .))";
}

inline std::string fixture_corpus_text(int n_trees = 240, std::uint64_t seed = 20240817) {
  Rng r(seed);
  std::string out;
  for (int i = 0; i < n_trees; ++i) out += sentence(r, i % 17) + "\n";
  return out;
}

/// Six- and seven-token sentences over three labels: the family used for
/// exhaustive-search comparisons.
inline std::string short_corpus_text(int n_trees = 50, std::uint64_t seed = 20240818) {
  Rng r(seed);
  std::string out;
  for (int i = 0; i < n_trees; ++i) {
    const bool jj1 = r.chance(50);
    const bool jj2 = !jj1 && r.chance(50);
    auto np = [&](bool jj) {
      std::string s = "(NP (DT " + r.from(determiners()) + ")";
      if (jj) s += " (JJ " + r.from(adjectives()) + ")";
      s += " (NN " + r.from(nouns()) + "))";
      return s;
    };
    out += "(S " + np(jj1) + " (VP (VBD " + r.from(verbs()) + ") " + np(jj2) + ") (. .))\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// A parser that memorizes the gold derivations of a corpus.  In every context
// seen during training the gold action's score is so far above the rest that
// the competitors underflow to probability exactly zero, which keeps the
// search inside memorized states.  With `root_ambiguity` each sentence keeps
// one alternative complete parse alive -- the gold tree with its root
// relabeled VP, at a far lower but nonzero score and the same derivation
// length -- so ranking has real work to do.

inline Parser overfit_parser(const Corpus& corpus, bool root_ambiguity = false) {
  auto rules = std::make_shared<const HeadRules>(HeadRules::defaults());
  TagDictionary dict = TagDictionary::build(corpus);
  ContextExtractor cx(dict.counts(), 5);

  std::map<std::pair<std::string, std::string>, std::pair<Action, double>> weights;
  auto note = [&](const Event& e, double alpha) {
    for (const auto& key : e.context) {
      auto& slot = weights[{key, encode(e.action)}];
      slot.first = e.action;
      slot.second = std::max(slot.second, alpha);
    }
  };

  constexpr double kGold = 1e300;
  TrainingSamples samples = collect_events(corpus, cx, rules);
  for (const auto& e : samples.tag) note(e, kGold);
  for (const auto& e : samples.chunk) note(e, kGold);
  for (const auto& e : samples.build) note(e, kGold);
  for (const auto& e : samples.check) note(e, kGold);

  if (root_ambiguity) {
    constexpr double kAlt = 1e299;
    for (const auto& sent : corpus.sentences) {
      if (sent.tree->label == "VP") continue;
      std::string text = write_bracketed(sent.tree);
      text.replace(1, sent.tree->label.size(), "VP");
      TreePtr alt = with_heads(read_tree(text), *rules);
      auto ctx = make_context(sent.tokens, rules);
      ParserState s = initial_state(ctx);
      for (const auto& a : derive(alt, ctx).actions) {
        if (a.kind == ActionKind::Build || a.kind == ActionKind::Check)
          note(Event{a, cx.context_keys(s)}, kAlt);
        s = apply(s, a);
      }
    }
  }

  std::vector<Action> actions[4];
  std::vector<Feature> features[4];
  for (const auto& [key_action, slot] : weights) {
    const int bucket = static_cast<int>(slot.first.kind);
    actions[bucket].push_back(slot.first);
    features[bucket].push_back({key_action.first, slot.first, slot.second});
  }
  auto model = [&](ActionKind k) {
    const int bucket = static_cast<int>(k);
    return MaxentModel::from_parts(k, actions[bucket], features[bucket]);
  };
  ModelSet models{model(ActionKind::Tag), model(ActionKind::Chunk), model(ActionKind::Build),
                  model(ActionKind::Check)};
  return Parser(std::move(models), detail::vocab_from_corpus(corpus), std::move(dict), rules,
                std::move(cx));
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of complete derivations (for small inputs only).

struct Enumerated {
  std::vector<Action> actions;
  TreePtr tree;
};

inline void enumerate_derivations_from(const ParserState& s, const ActionVocab& vocab,
                                       std::vector<Action>& prefix, std::size_t max_len,
                                       std::vector<Enumerated>& out) {
  if (s.finished) {
    out.push_back({prefix, s.parse_tree()});
    return;
  }
  if (prefix.size() >= max_len) return;
  for (const Action& a : legal_actions(s, vocab)) {
    prefix.push_back(a);
    enumerate_derivations_from(apply(s, a), vocab, prefix, max_len, out);
    prefix.pop_back();
  }
}

inline std::vector<Enumerated> enumerate_derivations(const std::vector<std::string>& tokens,
                                                     const ActionVocab& vocab) {
  auto ctx = make_context(tokens);
  std::vector<Enumerated> out;
  std::vector<Action> prefix;
  enumerate_derivations_from(initial_state(ctx), vocab, prefix, 8 * tokens.size() + 64, out);
  return out;
}

// ---------------------------------------------------------------------------
// Exact argmax over all derivations by branch and bound: extending a
// derivation never raises its score, so prefixes at or below the best
// complete score are pruned.

inline void exhaustive_best_from(const Parser& parser, const ParserState& s, double log_score,
                                 std::vector<Action>& prefix, std::size_t max_len,
                                 std::optional<ScoredParse>& best) {
  if (s.finished) {
    const bool better =
        !best || log_score > best->log_score ||
        (log_score == best->log_score && prefix < best->actions);
    if (better) best = ScoredParse{s.parse_tree(), log_score, prefix};
    return;
  }
  if (prefix.size() >= max_len) return;
  for (const auto& [a, q] : parser.candidates(s)) {
    const double child = log_score + std::log(q);
    if (best && child < best->log_score) continue;
    prefix.push_back(a);
    exhaustive_best_from(parser, apply(s, a), child, prefix, max_len, best);
    prefix.pop_back();
  }
}

inline std::optional<ScoredParse> exhaustive_best(const Parser& parser,
                                                  const std::vector<std::string>& tokens) {
  auto ctx = make_context(tokens, parser.rules());
  std::optional<ScoredParse> best;
  std::vector<Action> prefix;
  exhaustive_best_from(parser, initial_state(ctx), 0.0, prefix, 8 * tokens.size() + 64, best);
  return best;
}

}  // namespace fixtures
