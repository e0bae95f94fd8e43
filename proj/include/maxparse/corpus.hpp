#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <maxparse/head_rules.hpp>
#include <maxparse/tree.hpp>

namespace maxparse {

struct Sentence {
  std::vector<std::string> tokens;
  TreePtr tree;
};

struct Corpus {
  std::vector<Sentence> sentences;
  int vacuous_skipped = 0;

  std::size_t size() const { return sentences.size(); }
};

/// Reads a bracketed treebank: every tree is normalized, head-annotated, and
/// paired with its token yield.  Trees that normalize away entirely are
/// skipped and counted; `warnings` (when given) gets one line per skip.
inline Corpus load_corpus(std::string_view text, const HeadRules& rules,
                          std::ostream* warnings = nullptr) {
  Corpus corpus;
  auto raw = read_bracketed(text);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto normalized = normalize_tree(raw[i]);
    if (!normalized) {
      ++corpus.vacuous_skipped;
      if (warnings)
        *warnings << "corpus: tree " << (i + 1) << " is vacuous after normalization, skipped\n";
      continue;
    }
    auto tree = with_heads(*normalized, rules);
    corpus.sentences.push_back(Sentence{yield(tree), std::move(tree)});
  }
  return corpus;
}

inline Corpus load_corpus_file(const std::string& path, const HeadRules& rules,
                               std::ostream* warnings = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_corpus(buf.str(), rules, warnings);
}

inline void write_corpus(std::ostream& os, const std::vector<TreePtr>& trees) {
  for (const auto& t : trees) {
    write_bracketed(os, t);
    os << '\n';
  }
}

}  // namespace maxparse
