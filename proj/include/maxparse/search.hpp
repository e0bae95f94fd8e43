#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <maxparse/context.hpp>
#include <maxparse/corpus.hpp>
#include <maxparse/maxent.hpp>
#include <maxparse/state.hpp>

namespace maxparse {

struct SearchConfig {
  int K = 20;       // derivations popped per heap visit
  int M = 20;       // completed parses requested
  double Q = 0.95;  // probability mass kept when expanding a derivation
};

/// Tags seen with each training word, with occurrence counts.
class TagDictionary {
 public:
  void add(const std::string& word, const std::string& tag, long count = 1) {
    auto& tags = entries_[word];
    for (auto& [t, c] : tags)
      if (t == tag) {
        c += count;
        return;
      }
    tags.emplace_back(tag, count);
  }

  static TagDictionary build(const Corpus& corpus) {
    TagDictionary dict;
    for (const auto& sent : corpus.sentences)
      for (const auto& leaf : leaves(sent.tree)) dict.add(leaf->word, leaf->label);
    dict.sort();
    return dict;
  }

  void sort() {
    for (auto& [w, tags] : entries_)
      std::sort(tags.begin(), tags.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  const std::vector<std::pair<std::string, long>>* lookup(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool allows(const std::string& word, const std::string& tag) const {
    const auto* tags = lookup(word);
    if (!tags) return true;  // unknown words may take any tag
    for (const auto& [t, c] : *tags)
      if (t == tag) return true;
    return false;
  }

  long word_count(const std::string& word) const {
    const auto* tags = lookup(word);
    if (!tags) return 0;
    long total = 0;
    for (const auto& [t, c] : *tags) total += c;
    return total;
  }

  /// All word counts, e.g. for rare-word decisions at parse time.
  std::shared_ptr<const std::unordered_map<std::string, int>> counts() const {
    auto out = std::make_shared<std::unordered_map<std::string, int>>();
    for (const auto& [w, tags] : entries_) {
      long total = 0;
      for (const auto& [t, c] : tags) total += c;
      (*out)[w] = static_cast<int>(total);
    }
    return out;
  }

  const std::map<std::string, std::vector<std::pair<std::string, long>>>& entries() const {
    return entries_;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<std::pair<std::string, long>>> entries_;
};

/// How many of the candidates (probabilities in descending order) survive the
/// mass cutoff: the largest m whose prefix sum stays below Q, never fewer than
/// one.  Q at or above one keeps everything.
inline std::size_t mass_cutoff(const std::vector<double>& qs_desc, double Q) {
  if (qs_desc.empty()) return 0;
  if (Q >= 1.0) return qs_desc.size();
  std::size_t m = 0;
  double sum = 0.0;
  while (m < qs_desc.size() && sum + qs_desc[m] < Q) sum += qs_desc[m++];
  return std::max<std::size_t>(m, 1);
}

struct ScoredParse {
  TreePtr tree;
  double log_score = 0.0;
  std::vector<Action> actions;
};

inline ActionKind procedure_of(const ParserState& s) {
  switch (s.pass) {
    case Pass::Tag: return ActionKind::Tag;
    case Pass::Chunk: return ActionKind::Chunk;
    default: return s.turn == Turn::Build ? ActionKind::Build : ActionKind::Check;
  }
}

/// Trained models plus everything needed to turn a token sequence into
/// ranked parse trees.
class Parser {
 public:
  Parser(ModelSet models, ActionVocab vocab, TagDictionary tagdict,
         std::shared_ptr<const HeadRules> rules, ContextExtractor extractor)
      : models_(std::move(models)),
        vocab_(std::move(vocab)),
        tagdict_(std::move(tagdict)),
        rules_(std::move(rules)),
        extractor_(std::move(extractor)) {}

  const ModelSet& models() const { return models_; }
  const ActionVocab& vocab() const { return vocab_; }
  const TagDictionary& tagdict() const { return tagdict_; }
  const std::shared_ptr<const HeadRules>& rules() const { return rules_; }
  const ContextExtractor& extractor() const { return extractor_; }

  /// Legal continuations with their conditional probabilities, best first.
  /// Tagging candidates for known words are limited to tags the word was seen
  /// with.  Zero-probability continuations are dropped.  No mass cutoff here.
  std::vector<std::pair<Action, double>> candidates(const ParserState& s) const {
    std::vector<std::pair<Action, double>> out;
    std::vector<Action> legal = legal_actions(s, vocab_);
    if (legal.empty()) return out;
    if (s.pass == Pass::Tag) {
      const std::string& word = s.tokens()[s.tags.size()];
      std::erase_if(legal, [&](const Action& a) { return !tagdict_.allows(word, a.label); });
    }
    const MaxentModel& model = models_.for_kind(procedure_of(s));
    const std::vector<double> p = model.conditionals(extractor_.context_keys(s));
    out.reserve(legal.size());
    for (const Action& a : legal) {
      const std::size_t ai = model.index_of(a);
      if (ai == MaxentModel::npos) continue;
      if (p[ai] > 0.0) out.emplace_back(a, p[ai]);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
  }

  /// Breadth-first top-K search over derivations.  Derivations of the same
  /// length share a heap; each round pops at most K from the deepest
  /// non-empty heap and expands them through the mass cutoff.  Children that
  /// complete go straight to the result pool, so the work heaps only ever
  /// hold incomplete derivations.  Stops once M complete parses are pooled
  /// or every heap is dry, and returns at most M parses, best first.
  std::vector<ScoredParse> parse(const std::vector<std::string>& tokens,
                                 const SearchConfig& cfg = {}) const {
    auto sctx = make_context(tokens, rules_);

    struct Hyp {
      ParserState state;
      double log_score = 0.0;
      std::vector<Action> actions;
    };
    struct Worse {
      bool operator()(const Hyp& a, const Hyp& b) const {
        if (a.log_score != b.log_score) return a.log_score < b.log_score;
        return b.actions < a.actions;
      }
    };
    using Heap = std::priority_queue<Hyp, std::vector<Hyp>, Worse>;

    const std::size_t max_len = 8 * tokens.size() + 64;
    std::vector<Heap> levels(1);
    Heap completed;
    std::size_t n_completed = 0;
    std::size_t top = 0;

    {
      Hyp root{initial_state(sctx), 0.0, {}};
      if (root.state.finished) {
        completed.push(std::move(root));
        ++n_completed;
      } else {
        levels[0].push(std::move(root));
      }
    }

    while (n_completed < static_cast<std::size_t>(cfg.M)) {
      while (top > 0 && levels[top].empty()) --top;
      if (levels[top].empty()) break;
      const std::size_t i = top;
      const std::size_t sz = std::min<std::size_t>(cfg.K, levels[i].size());
      std::vector<Hyp> batch;
      batch.reserve(sz);
      for (std::size_t j = 0; j < sz; ++j) {
        batch.push_back(levels[i].top());
        levels[i].pop();
      }
      for (Hyp& h : batch) {
        if (i + 1 > max_len) continue;
        auto cands = candidates(h.state);
        const std::size_t keep = mass_cutoff(probabilities(cands), cfg.Q);
        if (keep == 0) continue;
        if (levels.size() <= i + 1) levels.resize(i + 2);
        for (std::size_t c = 0; c < keep; ++c) {
          const auto& [a, q] = cands[c];
          Hyp child;
          child.state = apply(h.state, a);
          child.log_score = h.log_score + std::log(q);
          child.actions = h.actions;
          child.actions.push_back(a);
          if (child.state.finished) {
            completed.push(std::move(child));
            ++n_completed;
            continue;
          }
          levels[i + 1].push(std::move(child));
          top = std::max(top, i + 1);
        }
      }
    }

    std::vector<ScoredParse> out;
    while (!completed.empty() && out.size() < static_cast<std::size_t>(cfg.M)) {
      const Hyp& h = completed.top();
      out.push_back({h.state.parse_tree(), h.log_score, h.actions});
      completed.pop();
    }
    return out;
  }

 private:
  static std::vector<double> probabilities(const std::vector<std::pair<Action, double>>& cands) {
    std::vector<double> qs;
    qs.reserve(cands.size());
    for (const auto& [a, q] : cands) qs.push_back(q);
    return qs;
  }

  ModelSet models_;
  ActionVocab vocab_;
  TagDictionary tagdict_;
  std::shared_ptr<const HeadRules> rules_;
  ContextExtractor extractor_;
};

}  // namespace maxparse
