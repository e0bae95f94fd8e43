#pragma once

#include <cctype>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <maxparse/action.hpp>
#include <maxparse/corpus.hpp>
#include <maxparse/derive.hpp>
#include <maxparse/state.hpp>

namespace maxparse {

// Field separator inside predicate keys; corpus tokens may not contain it
// (the bracketed reader rejects control characters).
constexpr char kFieldSep = '\x1f';

constexpr const char* kBos = "<BOS>";
constexpr const char* kEos = "<EOS>";
constexpr const char* kNoTree = "<NOTREE>";

struct Predicate {
  std::string id;
  std::string value;

  std::string key() const { return id + kFieldSep + value; }
};

struct Event {
  Action action;
  std::vector<std::string> context;  // predicate keys
};

inline std::unordered_map<std::string, int> word_counts(const Corpus& corpus) {
  std::unordered_map<std::string, int> counts;
  for (const auto& s : corpus.sentences)
    for (const auto& w : s.tokens) ++counts[w];
  return counts;
}

/// Extracts the contextual predicates of Table-2 shape for each procedure.
/// Backed-off variants drop head words; a variant fires whenever its full
/// form fires.  Rare words (training count below the threshold) trade the
/// word-identity predicate for prefix/suffix and shape predicates.
class ContextExtractor {
 public:
  ContextExtractor() = default;
  ContextExtractor(std::shared_ptr<const std::unordered_map<std::string, int>> counts,
                   int rare_threshold = 5)
      : counts_(std::move(counts)), rare_threshold_(rare_threshold) {}

  int rare_threshold() const { return rare_threshold_; }

  bool rare(const std::string& word) const {
    if (!counts_) return false;
    auto it = counts_->find(word);
    return it == counts_->end() || it->second < rare_threshold_;
  }

  std::vector<Predicate> tag_context(const ParserState& s) const {
    std::vector<Predicate> out;
    const auto& toks = s.tokens();
    const long i = static_cast<long>(s.cursor);
    const long n = static_cast<long>(toks.size());
    auto word_at = [&](long j) -> std::string {
      if (j < 0) return kBos;
      if (j >= n) return kEos;
      return toks[static_cast<std::size_t>(j)];
    };
    auto tag_at = [&](long j) -> std::string {
      return j < 0 ? kBos : s.tags[static_cast<std::size_t>(j)];
    };

    const std::string& w = toks[static_cast<std::size_t>(i)];
    if (!rare(w)) {
      out.push_back({"w0", w});
    } else {
      for (std::size_t len = 1; len <= 4 && len <= w.size(); ++len) {
        out.push_back({"pre" + std::to_string(len), w.substr(0, len)});
        out.push_back({"suf" + std::to_string(len), w.substr(w.size() - len)});
      }
      bool num = false, cap = false, hyp = false;
      for (unsigned char c : w) {
        num |= std::isdigit(c) != 0;
        cap |= std::isupper(c) != 0;
        hyp |= c == '-';
      }
      if (num) out.push_back({"num", "1"});
      if (cap) out.push_back({"cap", "1"});
      if (hyp) out.push_back({"hyp", "1"});
    }
    out.push_back({"w-1", word_at(i - 1)});
    out.push_back({"w-2", word_at(i - 2)});
    out.push_back({"w1", word_at(i + 1)});
    out.push_back({"w2", word_at(i + 2)});
    out.push_back({"t-1", tag_at(i - 1)});
    out.push_back({"t-2,-1", tag_at(i - 2) + kFieldSep + tag_at(i - 1)});
    return out;
  }

  std::vector<Predicate> chunk_context(const ParserState& s) const {
    std::vector<Predicate> out;
    const long i = static_cast<long>(s.cursor);
    const long n = static_cast<long>(s.n_tokens());

    // chunkandpostag(n): word, POS tag, and, left of the cursor, the chunk
    // mark already assigned.  One backed-off variant per template: the word
    // is dropped.
    auto component = [&](long off, bool with_word) -> std::string {
      const long j = i + off;
      std::string word, tag, chunk;
      if (j < 0) {
        word = tag = chunk = kBos;
      } else if (j >= n) {
        word = tag = chunk = kEos;
      } else {
        word = s.tokens()[static_cast<std::size_t>(j)];
        tag = s.tags[static_cast<std::size_t>(j)];
        if (off < 0) {
          const auto& cm = s.chunks[static_cast<std::size_t>(j)];
          chunk = cm.mark == Mark::Other ? "Other"
                                         : std::string(mark_name(cm.mark)) + " " + cm.label;
        }
      }
      std::string v;
      if (with_word) v = word + kFieldSep;
      v += tag;
      if (off < 0) v += kFieldSep + chunk;
      return v;
    };

    for (long off : {0L, -1L, -2L, 1L, 2L}) {
      const std::string pos = std::to_string(off);
      out.push_back({"cp(" + pos + ")", component(off, true)});
      out.push_back({"cp(" + pos + "*)", component(off, false)});
    }
    for (auto [m, o] : {std::pair<long, long>{-1, 0}, {0, 1}}) {
      const std::string ms = std::to_string(m), os = std::to_string(o);
      for (bool mw : {true, false})
        for (bool ow : {true, false}) {
          std::string id = "cp(" + ms + (mw ? "" : "*") + "," + os + (ow ? "" : "*") + ")";
          out.push_back({std::move(id), component(m, mw) + kFieldSep + component(o, ow)});
        }
    }
    return out;
  }

  std::vector<Predicate> build_context(const ParserState& s) const {
    std::vector<Predicate> out;
    const auto& trees = s.trees();
    const long c = static_cast<long>(s.cursor);
    const long size = static_cast<long>(trees.size());

    // cons(n): head word, label, and, left of the cursor, the Start/Join
    // annotation.  Single templates are fully lexicalized only; pairs carry
    // all backed-off variants, triples only those keeping the cursor tree's
    // head word.
    auto component = [&](long off, bool with_word) -> std::string {
      const long j = c + off;
      if (j < 0 || j >= size) {
        std::string v;
        if (with_word) v = std::string(kNoTree) + kFieldSep;
        v += kNoTree;
        if (off < 0) v += kFieldSep + std::string(kNoTree);
        return v;
      }
      const auto& t = trees[static_cast<std::size_t>(j)];
      std::string v;
      if (with_word) v = t->head_word + kFieldSep;
      v += t->label;
      if (off < 0) {
        const Note& note = s.notes[static_cast<std::size_t>(j)];
        v += kFieldSep;
        v += note.set ? std::string(mark_name(note.mark)) + " " + note.label : "None";
      }
      return v;
    };

    for (long off : {0L, -1L, -2L, 1L, 2L})
      out.push_back({"cons(" + std::to_string(off) + ")", component(off, true)});

    for (auto [m, o] : {std::pair<long, long>{-1, 0}, {0, 1}}) {
      const std::string ms = std::to_string(m), os = std::to_string(o);
      for (bool mw : {true, false})
        for (bool ow : {true, false}) {
          std::string id = "cons(" + ms + (mw ? "" : "*") + "," + os + (ow ? "" : "*") + ")";
          out.push_back({std::move(id), component(m, mw) + kFieldSep + component(o, ow)});
        }
    }

    // Triples: the cursor slot always keeps its head word, the other two
    // slots toggle theirs.
    const long triples[3][3] = {{0, -1, -2}, {0, 1, 2}, {-1, 0, 1}};
    for (const auto& tpl : triples) {
      int other[2], oi = 0;
      for (int k = 0; k < 3; ++k)
        if (tpl[k] != 0) other[oi++] = k;
      for (bool aw : {true, false})
        for (bool bw : {true, false}) {
          bool keep[3] = {true, true, true};
          keep[other[0]] = aw;
          keep[other[1]] = bw;
          std::string id = "cons(";
          std::string value;
          for (int k = 0; k < 3; ++k) {
            if (k) {
              id += ',';
              value += kFieldSep;
            }
            id += std::to_string(tpl[k]);
            if (!keep[k]) id += '*';
            value += component(tpl[k], keep[k]);
          }
          id += ')';
          out.push_back({std::move(id), std::move(value)});
        }
    }

    // Punctuation predicates about joining the run to the left.
    if (c > 0 && c < size && s.notes[static_cast<std::size_t>(c) - 1].set) {
      std::size_t b = static_cast<std::size_t>(c) - 1;
      while (b > 0 && s.notes[b].mark == Mark::Join) --b;
      const auto& cur = trees[static_cast<std::size_t>(c)];
      const bool cur_single = cur->size() == 1;
      const std::string cur_word = cur_single ? yield(cur).front() : std::string();

      static const std::unordered_map<std::string, std::string> closers = {
          {")", "("},     {"-RRB-", "-LRB-"}, {"]", "["},
          {"-RSB-", "-LSB-"}, {"}", "{"},     {"-RCB-", "-LCB-"}};
      auto it = cur_single ? closers.find(cur_word) : closers.end();
      bool brackets = false, comma = false;
      for (std::size_t k = b; k < static_cast<std::size_t>(c) && (!brackets || !comma); ++k) {
        for (const auto& w : yield(trees[k])) {
          if (it != closers.end() && w == it->second) brackets = true;
          if (w == ",") comma = true;
        }
      }
      if (brackets) out.push_back({"bracketsmatch", "1"});
      if (comma && cur_word == ",") out.push_back({"iscomma", "1"});
      if (cur_word == "." && c + 1 == size && trees[b]->start == 0)
        out.push_back({"endofsentence", "1"});
    }
    return out;
  }

  std::vector<Predicate> check_context(const ParserState& s) const {
    std::vector<Predicate> out;
    auto popt = proposed_constituent(s);
    if (!popt) throw std::logic_error("check_context: no proposed constituent");
    const Proposal& p = *popt;
    const auto& trees = s.trees();

    auto cc = [&](std::size_t index, bool with_word) -> std::string {
      const auto& t = trees[index];
      std::string v = p.label + kFieldSep + t->label;
      if (with_word) v += kFieldSep + t->head_word;
      return v;
    };

    out.push_back({"cc(last)", cc(p.last, true)});
    out.push_back({"cc(last*)", cc(p.last, false)});
    out.push_back({"cc(begin)", cc(p.begin, true)});
    out.push_back({"cc(begin*)", cc(p.begin, false)});

    for (std::size_t i = p.begin; i < p.last; ++i) {
      const std::string pos =
          i == p.begin ? "begin" : "begin+" + std::to_string(i - p.begin);
      for (bool iw : {true, false})
        for (bool lw : {true, false}) {
          std::string id = "cc(" + pos + (iw ? "" : "*") + ",last" + (lw ? "" : "*") + ")";
          std::string v = p.label + kFieldSep;
          v += trees[i]->label;
          if (iw) v += kFieldSep + trees[i]->head_word;
          v += kFieldSep + trees[p.last]->label;
          if (lw) v += kFieldSep + trees[p.last]->head_word;
          out.push_back({std::move(id), std::move(v)});
        }
    }

    std::string production = p.label;
    for (std::size_t i = p.begin; i <= p.last; ++i)
      production += kFieldSep + trees[i]->label;
    out.push_back({"production", std::move(production)});

    const long n = static_cast<long>(s.n_tokens());
    auto sur = [&](long off) {
      const long j = off < 0 ? p.span_start + off : p.span_end + off - 1;
      std::string word, tag;
      if (j < 0) {
        word = tag = kBos;
      } else if (j >= n) {
        word = tag = kEos;
      } else {
        word = s.tokens()[static_cast<std::size_t>(j)];
        tag = s.tags[static_cast<std::size_t>(j)];
      }
      const std::string pos = std::to_string(off);
      out.push_back({"sur(" + pos + ")", tag + kFieldSep + word});
      out.push_back({"sur(" + pos + "*)", tag});
    };
    sur(-1);
    sur(-2);
    sur(1);
    sur(2);
    return out;
  }

  /// Dispatch on the procedure the state is waiting on.
  std::vector<Predicate> context(const ParserState& s) const {
    switch (s.pass) {
      case Pass::Tag: return tag_context(s);
      case Pass::Chunk: return chunk_context(s);
      default:
        return s.turn == Turn::Build ? build_context(s) : check_context(s);
    }
  }

  std::vector<std::string> context_keys(const ParserState& s) const {
    std::vector<std::string> keys;
    auto preds = context(s);
    keys.reserve(preds.size());
    for (auto& p : preds) keys.push_back(p.key());
    return keys;
  }

 private:
  std::shared_ptr<const std::unordered_map<std::string, int>> counts_;
  int rare_threshold_ = 5;
};

struct TrainingSamples {
  std::vector<Event> tag, chunk, build, check;
  int underivable_skipped = 0;
};

/// Replays the gold derivation of every sentence, recording one event per
/// action.  Underivable trees are skipped and counted; `warnings` gets one
/// line per skip.
inline TrainingSamples collect_events(const Corpus& corpus, const ContextExtractor& cx,
                                      std::shared_ptr<const HeadRules> rules = nullptr,
                                      std::ostream* warnings = nullptr) {
  TrainingSamples out;
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const auto& sent = corpus.sentences[si];
    auto ctx = make_context(sent.tokens, rules);
    Derivation d;
    try {
      d = derive(sent.tree, ctx);
    } catch (const UnderivableTree& e) {
      ++out.underivable_skipped;
      if (warnings) *warnings << "sentence " << (si + 1) << ": " << e.what() << "\n";
      continue;
    }
    ParserState s = initial_state(ctx);
    for (const auto& a : d.actions) {
      switch (a.kind) {
        case ActionKind::Tag: out.tag.push_back({a, cx.context_keys(s)}); break;
        case ActionKind::Chunk: out.chunk.push_back({a, cx.context_keys(s)}); break;
        case ActionKind::Build: out.build.push_back({a, cx.context_keys(s)}); break;
        case ActionKind::Check: out.check.push_back({a, cx.context_keys(s)}); break;
      }
      s = apply(s, a);
    }
  }
  return out;
}

/// One event per line: procedure, action, then the predicate keys, all
/// tab-separated.
inline void dump_events(std::ostream& os, const std::string& procedure,
                        const std::vector<Event>& events) {
  for (const auto& e : events) {
    os << procedure << '\t' << encode(e.action);
    for (const auto& k : e.context) os << '\t' << k;
    os << '\n';
  }
}

}  // namespace maxparse
