#pragma once

#include <algorithm>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <maxparse/search.hpp>
#include <maxparse/tree.hpp>

namespace maxparse {

/// Scoring normalizations, all off by default (raw multiset matching).  The
/// flags are independent; `max_length` of 0 means no length filter.
struct EvalOptions {
  bool ignore_quotes = false;       // drop quotation-mark tokens before spans are compared
  bool ignore_punctuation = false;  // drop all punctuation tokens (quotes included)
  bool collapse_advp_prt = false;   // score PRT as if it were ADVP
  int max_length = 0;               // skip sentences with more tokens than this
};

inline bool quote_tag(const std::string& tag) { return tag == "``" || tag == "''"; }

inline bool punctuation_tag(const std::string& tag) {
  return tag == "," || tag == ":" || tag == "." || quote_tag(tag) || tag == "-NONE-";
}

struct Constituent {
  std::string label;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator<(const Constituent& a, const Constituent& b) {
    return std::tie(a.label, a.start, a.end) < std::tie(b.label, b.start, b.end);
  }
  friend bool operator==(const Constituent& a, const Constituent& b) {
    return std::tie(a.label, a.start, a.end) == std::tie(b.label, b.start, b.end);
  }
};

namespace detail {

// Spans are recomputed over the tokens that survive the punctuation filter;
// nodes covering no surviving token disappear.
inline std::optional<std::pair<std::size_t, std::size_t>> collect_constituents(
    const TreePtr& t, const EvalOptions& opt, std::size_t& next_token,
    std::vector<Constituent>& out) {
  if (t->leaf()) {
    if ((opt.ignore_punctuation && punctuation_tag(t->label)) ||
        (opt.ignore_quotes && quote_tag(t->label)))
      return std::nullopt;
    const std::size_t pos = next_token++;
    return std::make_pair(pos, pos + 1);
  }
  std::optional<std::pair<std::size_t, std::size_t>> span;
  for (const auto& child : t->children) {
    auto sub = collect_constituents(child, opt, next_token, out);
    if (!sub) continue;
    if (!span)
      span = sub;
    else
      span->second = sub->second;
  }
  if (!span) return std::nullopt;
  std::string label = t->label;
  if (opt.collapse_advp_prt && label == "PRT") label = "ADVP";
  out.push_back({std::move(label), span->first, span->second});
  return span;
}

}  // namespace detail

/// Labeled spans of every internal node (the root included, preterminals
/// excluded), sorted, after the option filters.
inline std::vector<Constituent> constituents(const TreePtr& tree, const EvalOptions& opt = {}) {
  std::vector<Constituent> out;
  std::size_t next_token = 0;
  detail::collect_constituents(tree, opt, next_token, out);
  std::sort(out.begin(), out.end());
  return out;
}

struct ParsevalCounts {
  long matched = 0;
  long predicted = 0;
  long gold = 0;

  ParsevalCounts& operator+=(const ParsevalCounts& o) {
    matched += o.matched;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }

  double precision() const { return ratio(matched, predicted); }
  double recall() const { return ratio(matched, gold); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }

  static double ratio(long num, long den) { return den == 0 ? 1.0 : double(num) / double(den); }
};

/// Multiset intersection size of two sorted constituent lists.
inline long matched_constituents(const std::vector<Constituent>& a,
                                 const std::vector<Constituent>& b) {
  long matched = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++matched;
      ++i;
      ++j;
    }
  }
  return matched;
}

inline ParsevalCounts score_tree(const TreePtr& predicted, const TreePtr& gold,
                                 const EvalOptions& opt = {}) {
  const auto p = constituents(predicted, opt);
  const auto g = constituents(gold, opt);
  return {matched_constituents(p, g), static_cast<long>(p.size()), static_cast<long>(g.size())};
}

/// Same bracketing and labels; part-of-speech tags are not compared.
inline bool exact_match(const TreePtr& predicted, const TreePtr& gold) {
  return tree_equal_ignoring_pos(predicted, gold);
}

/// Index of the candidate with the best (precision + recall) / 2 against the
/// gold tree.  Ties prefer the higher-scored, then the earlier, candidate.
inline std::size_t oracle_best(const std::vector<ScoredParse>& candidates, const TreePtr& gold,
                               const EvalOptions& opt = {}) {
  if (candidates.empty()) throw DataError("oracle over an empty candidate list");
  std::size_t best = 0;
  double best_quality = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const ParsevalCounts c = score_tree(candidates[i].tree, gold, opt);
    const double quality = (c.precision() + c.recall()) / 2.0;
    const bool better =
        quality > best_quality ||
        (quality == best_quality && candidates[i].log_score > candidates[best].log_score);
    if (better) {
      best = i;
      best_quality = quality;
    }
  }
  return best;
}

/// Micro-averaged scores over a test corpus.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(EvalOptions opt = {}) : opt_(opt) {}

  /// A missing predicted tree records the sentence as unparsed.  Sentences
  /// over the length limit are skipped entirely (not scored, not counted).
  void add(const TreePtr& predicted, const TreePtr& gold) {
    if (opt_.max_length > 0 &&
        leaves(gold).size() > static_cast<std::size_t>(opt_.max_length)) {
      ++skipped_;
      return;
    }
    ++sentences_;
    if (!predicted) {
      ++no_parse_;
      totals_.gold += static_cast<long>(constituents(gold, opt_).size());
      return;
    }
    totals_ += score_tree(predicted, gold, opt_);
    if (exact_match(predicted, gold)) ++exact_;
  }

  const EvalOptions& options() const { return opt_; }
  long sentences() const { return sentences_; }
  long skipped() const { return skipped_; }
  long no_parse() const { return no_parse_; }
  long exact() const { return exact_; }
  const ParsevalCounts& totals() const { return totals_; }

  double exact_rate() const {
    require_sentences();
    return double(exact_) / double(sentences_);
  }
  double precision() const {
    require_sentences();
    return totals_.precision();
  }
  double recall() const {
    require_sentences();
    return totals_.recall();
  }
  double f1() const {
    require_sentences();
    return totals_.f1();
  }

 private:
  void require_sentences() const {
    if (sentences_ == 0) throw DataError("no sentences evaluated");
  }

  EvalOptions opt_;
  ParsevalCounts totals_;
  long sentences_ = 0;
  long skipped_ = 0;
  long no_parse_ = 0;
  long exact_ = 0;
};

inline std::string format_fixed(double x, int places = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(places) << x;
  return os.str();
}

inline std::string eval_tsv_header() {
  return "sentence\ttokens\tmatched\tpredicted\tgold\tprecision\trecall\texact";
}

inline std::string eval_tsv_row(std::size_t index, std::size_t tokens, const ParsevalCounts& c,
                                bool exact) {
  std::ostringstream os;
  os << index << '\t' << tokens << '\t' << c.matched << '\t' << c.predicted << '\t' << c.gold
     << '\t' << format_fixed(c.precision()) << '\t' << format_fixed(c.recall()) << '\t'
     << (exact ? 1 : 0);
  return os.str();
}

inline std::string eval_report(const EvalAccumulator& acc) {
  std::ostringstream os;
  os << "sentences          " << acc.sentences() << '\n'
     << "skipped (length)   " << acc.skipped() << '\n'
     << "no parse           " << acc.no_parse() << '\n'
     << "matched brackets   " << acc.totals().matched << '\n'
     << "predicted brackets " << acc.totals().predicted << '\n'
     << "gold brackets      " << acc.totals().gold << '\n'
     << "precision          " << format_fixed(acc.precision()) << '\n'
     << "recall             " << format_fixed(acc.recall()) << '\n'
     << "f1                 " << format_fixed(acc.f1()) << '\n'
     << "exact match        " << format_fixed(acc.exact_rate()) << '\n';
  return os.str();
}

}  // namespace maxparse
