#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <maxparse/tree.hpp>

namespace maxparse {

/// Head-percolation table.  One rule per parent label: a scan direction and a
/// priority list of child labels.  Lookup tries each priority label in order,
/// scanning the children in the rule's direction; the first hit wins and the
/// leftmost child is the fallback.
class HeadRules {
 public:
  struct Rule {
    bool scan_right = false;  // true: right-to-left
    std::vector<std::string> priority;
  };

  static HeadRules parse(const std::string& text) {
    HeadRules hr;
    hr.source_ = text;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream fields(line);
      std::string parent, direction;
      if (!(fields >> parent)) continue;
      if (!(fields >> direction) || (direction != "left" && direction != "right"))
        throw DataError("head rules line " + std::to_string(lineno) +
                        ": expected 'PARENT left|right LABEL...'");
      Rule rule;
      rule.scan_right = (direction == "right");
      std::string label;
      while (fields >> label) rule.priority.push_back(label);
      hr.rules_[parent] = std::move(rule);
    }
    return hr;
  }

  static const HeadRules& defaults() {
    static const HeadRules hr = parse(default_table());
    return hr;
  }

  static const std::string& default_table();

  std::size_t find_head(const std::string& parent,
                        const std::vector<std::string>& child_labels) const {
    if (child_labels.empty())
      throw std::logic_error("find_head: no children");
    auto it = rules_.find(parent);
    if (it == rules_.end()) return 0;
    const Rule& rule = it->second;
    const auto n = child_labels.size();
    for (const auto& want : rule.priority) {
      if (rule.scan_right) {
        for (std::size_t i = n; i-- > 0;)
          if (child_labels[i] == want) return i;
      } else {
        for (std::size_t i = 0; i < n; ++i)
          if (child_labels[i] == want) return i;
      }
    }
    return 0;
  }

  std::size_t find_head(const std::string& parent,
                        const std::vector<TreePtr>& children) const {
    std::vector<std::string> labels;
    labels.reserve(children.size());
    for (const auto& c : children) labels.push_back(c->label);
    return find_head(parent, labels);
  }

  const std::string& source() const { return source_; }

 private:
  std::unordered_map<std::string, Rule> rules_;
  std::string source_;
};

inline const std::string& HeadRules::default_table() {
  static const std::string table =
      "# maxparse head rules v1\n"
      "# PARENT direction CHILD-LABELS in priority order\n"
      "ADJP left NNS QP NN $ ADVP JJ VBN VBG ADJP JJR NP JJS DT FW RBR RBS SBAR RB\n"
      "ADVP right RB RBR RBS FW ADVP TO CD JJR JJ IN NP JJS NN\n"
      "CONJP right CC RB IN\n"
      "FRAG right\n"
      "INTJ left\n"
      "LST right LS :\n"
      "NAC left NN NNS NNP NNPS NP NAC EX $ CD QP PRP VBG JJ JJS JJR ADJP FW\n"
      "NP right NN NNP NNPS NNS NX POS JJR CD JJ JJS RB QP NP\n"
      "NX right NN NNP NNPS NNS NX POS JJR\n"
      "PP right IN TO VBG VBN RP FW\n"
      "PRN left\n"
      "PRT right RP\n"
      "QP left $ IN NNS NN JJ RB DT CD NCD QP JJR JJS\n"
      "RRC right VP NP ADVP ADJP PP\n"
      "S left TO IN VP S SBAR ADJP UCP NP\n"
      "SBAR left WHNP WHPP WHADVP WHADJP IN DT S SQ SINV SBAR FRAG\n"
      "SBARQ left SQ S SINV SBARQ FRAG\n"
      "SINV left VBZ VBD VBP VB MD VP S SINV ADJP NP\n"
      "SQ left VBZ VBD VBP VB MD VP SQ\n"
      "UCP right\n"
      "VP left TO VBD VBN MD VBZ VB VBG VBP VP ADJP NN NNS NP\n"
      "WHADJP left CC WRB JJ ADJP\n"
      "WHADVP right CC WRB\n"
      "WHNP left WDT WP WP$ WHADJP WHPP WHNP\n"
      "WHPP right IN TO FW\n"
      "X right\n";
  return table;
}

/// Rebuilds `t` with head words percolated according to `rules`.
inline TreePtr with_heads(const TreePtr& t, const HeadRules& rules) {
  if (t->leaf()) return make_leaf(t->label, t->word, t->start);
  std::vector<TreePtr> children;
  children.reserve(t->children.size());
  for (const auto& c : t->children) children.push_back(with_heads(c, rules));
  const std::size_t head = rules.find_head(t->label, children);
  return make_node(t->label, std::move(children), head);
}

}  // namespace maxparse
