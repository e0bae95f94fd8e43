#pragma once

#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <maxparse/context.hpp>
#include <maxparse/corpus.hpp>
#include <maxparse/model_io.hpp>

namespace maxparse {

struct TrainConfig {
  TrainOptions maxent;     // feature cutoff, iteration cap, convergence gap
  int rare_threshold = 5;  // words below this count use shape predicates
};

struct ProcedureReport {
  std::size_t events = 0;
  TrainStats stats;
};

struct TrainReport {
  std::size_t sentences = 0;     // trees used for events
  std::size_t vacuous = 0;       // trees empty after normalization
  int underivable = 0;           // trees no action sequence reproduces
  ProcedureReport tag, chunk, build, check;
  std::string warnings;
};

namespace detail {

inline void scan_labels(const TreePtr& t, std::set<std::string>& tags,
                        std::set<std::string>& chunks, std::set<std::string>& builds) {
  if (t->leaf()) {
    tags.insert(t->label);
    return;
  }
  (is_flat(t) ? chunks : builds).insert(t->label);
  for (const auto& c : t->children) scan_labels(c, tags, chunks, builds);
}

inline ActionVocab vocab_from_corpus(const Corpus& corpus) {
  std::set<std::string> tags, chunks, builds;
  for (const auto& sent : corpus.sentences) scan_labels(sent.tree, tags, chunks, builds);
  ActionVocab v;
  v.pos_tags.assign(tags.begin(), tags.end());
  v.chunk_labels.assign(chunks.begin(), chunks.end());
  v.build_labels.assign(builds.begin(), builds.end());
  return v;
}

}  // namespace detail

/// Fits the four procedure models on a bracketed corpus and packs them into
/// an archive together with the vocabulary, tag dictionary and head rules.
inline ParserArchive train_parser(const std::string& corpus_text, const HeadRules& rules,
                                  const TrainConfig& config = {},
                                  TrainReport* report = nullptr) {
  std::ostringstream warnings;
  Corpus corpus = load_corpus(corpus_text, rules, &warnings);
  if (corpus.sentences.empty()) throw DataError("corpus has no usable trees");

  ParserArchive archive;
  archive.corpus_hash = fnv1a64(corpus_text);
  archive.rare_threshold = config.rare_threshold;
  archive.vocab = detail::vocab_from_corpus(corpus);
  archive.tagdict = TagDictionary::build(corpus);
  archive.head_rules_text = rules.source();

  auto rules_ptr = std::make_shared<const HeadRules>(rules);
  ContextExtractor extractor(archive.tagdict.counts(), config.rare_threshold);
  TrainingSamples samples = collect_events(corpus, extractor, rules_ptr, &warnings);

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep.vacuous = corpus.vacuous_skipped;
  rep.underivable = samples.underivable_skipped;
  rep.sentences = corpus.sentences.size() - static_cast<std::size_t>(samples.underivable_skipped);

  auto fit = [&](ActionKind kind, const std::vector<Event>& events, ProcedureReport& out) {
    out.events = events.size();
    return gis_train(kind, events, config.maxent, &out.stats);
  };
  archive.models.tag = fit(ActionKind::Tag, samples.tag, rep.tag);
  archive.models.chunk = fit(ActionKind::Chunk, samples.chunk, rep.chunk);
  archive.models.build = fit(ActionKind::Build, samples.build, rep.build);
  archive.models.check = fit(ActionKind::Check, samples.check, rep.check);

  archive.trained_sentences = rep.sentences;
  rep.warnings = warnings.str();
  return archive;
}

inline std::string train_summary(const TrainReport& rep) {
  std::ostringstream os;
  os << "sentences " << rep.sentences << " (skipped: " << rep.vacuous << " vacuous, "
     << rep.underivable << " underivable)\n";
  auto line = [&os](const char* name, const ProcedureReport& p) {
    os << name << ": " << p.events << " events, " << p.stats.feature_count << " features, "
       << p.stats.iterations << " iterations, gap " << format_double(p.stats.final_gap)
       << '\n';
  };
  line("tag", rep.tag);
  line("chunk", rep.chunk);
  line("build", rep.build);
  line("check", rep.check);
  return os.str();
}

}  // namespace maxparse
