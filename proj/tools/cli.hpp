#pragma once

#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <maxparse/eval.hpp>
#include <maxparse/model_io.hpp>
#include <maxparse/train.hpp>

#include "CLI11.hpp"

namespace maxparse::cli {

// Exit codes: 0 success, 1 usage error, 2 data or runtime failure,
// 3 at least one sentence had no parse.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kError = 2;
constexpr int kNoParse = 3;

namespace detail {

inline std::string slurp(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot open ") + what + ": " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (is >> tok) tokens.push_back(tok);
  return tokens;
}

inline std::vector<std::vector<std::string>> read_sentences(std::istream& in,
                                                            std::size_t* blank_lines = nullptr) {
  std::vector<std::vector<std::string>> sentences;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = tokenize(line);
    if (tokens.empty()) {
      if (blank_lines) ++*blank_lines;
      continue;
    }
    sentences.push_back(std::move(tokens));
  }
  return sentences;
}

/// Runs `work(i)` for i in [0, n) on `jobs` threads; the first exception wins.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& work) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    while (!failed) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int k = std::min<int>(jobs, static_cast<int>(n));
  pool.reserve(k);
  for (int t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct TrainArgs {
  std::string corpus, output, head_rules;
  TrainConfig config;
};

inline int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  const std::string corpus_text = slurp(args.corpus, "corpus file");
  HeadRules rules = args.head_rules.empty()
                        ? HeadRules::defaults()
                        : HeadRules::parse(slurp(args.head_rules, "head rules file"));
  TrainReport report;
  ParserArchive archive = train_parser(corpus_text, rules, args.config, &report);
  if (!report.warnings.empty()) err << report.warnings;
  out << train_summary(report);
  save_archive(archive, args.output);
  out << "wrote " << args.output << '\n';
  return kOk;
}

struct ParseArgs {
  std::string model, input = "-", output = "-";
  SearchConfig search;
  bool best_only = false;
  int jobs = 1;
};

inline int cmd_parse(const ParseArgs& args, std::istream& in, std::ostream& out,
                     std::ostream& err) {
  const ParserArchive archive = load_archive(args.model);
  const Parser parser = archive.make_parser();

  std::vector<std::vector<std::string>> sentences;
  std::size_t blank_lines = 0;
  if (args.input == "-") {
    sentences = read_sentences(in, &blank_lines);
  } else {
    std::ifstream file(args.input);
    if (!file) throw DataError("cannot open input file: " + args.input);
    sentences = read_sentences(file, &blank_lines);
  }
  if (blank_lines > 0) err << "skipped " << blank_lines << " blank line(s)\n";

  std::vector<std::string> blocks(sentences.size());
  std::atomic<int> failures{0};
  parallel_for(sentences.size(), args.jobs, [&](std::size_t i) {
    const auto parses = parser.parse(sentences[i], args.search);
    std::ostringstream block;
    if (parses.empty()) {
      ++failures;
      if (args.best_only)
        block << "NO-PARSE\n";
      else
        block << (i + 1) << "\tNO-PARSE\n";
    } else if (args.best_only) {
      block << write_bracketed(parses.front().tree) << '\n';
    } else {
      for (std::size_t rank = 0; rank < parses.size(); ++rank)
        block << (i + 1) << '\t' << (rank + 1) << '\t'
              << format_fixed(parses[rank].log_score) << '\t'
              << write_bracketed(parses[rank].tree) << '\n';
    }
    blocks[i] = block.str();
  });

  auto emit = [&](std::ostream& os) {
    for (const auto& b : blocks) os << b;
  };
  if (args.output == "-") {
    emit(out);
  } else {
    std::ofstream file(args.output, std::ios::binary);
    if (!file) throw DataError("cannot open output file: " + args.output);
    emit(file);
  }
  if (failures > 0) {
    err << failures << " sentence(s) had no parse\n";
    return kNoParse;
  }
  return kOk;
}

struct EvaluateArgs {
  std::string gold, predicted;
  EvalOptions options;
  bool per_sentence = false;
};

inline int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  const Corpus gold = load_corpus_file(args.gold, HeadRules::defaults(), &err);

  std::ifstream pred_in(args.predicted, std::ios::binary);
  if (!pred_in) throw DataError("cannot open predicted file: " + args.predicted);
  std::vector<TreePtr> predicted;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(pred_in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line == "NO-PARSE") {
      predicted.push_back(nullptr);
      continue;
    }
    auto normalized = normalize_tree(read_tree(line));
    if (!normalized)
      throw DataError("predicted line " + std::to_string(line_no) +
                      ": tree is vacuous after normalization");
    predicted.push_back(*normalized);
  }
  if (predicted.size() != gold.sentences.size())
    throw DataError("predicted file has " + std::to_string(predicted.size()) +
                    " trees but the gold corpus has " + std::to_string(gold.sentences.size()));

  EvalAccumulator acc(args.options);
  if (args.per_sentence) out << eval_tsv_header() << '\n';
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& gold_tree = gold.sentences[i].tree;
    const long before = acc.sentences();
    acc.add(predicted[i], gold_tree);
    if (args.per_sentence && acc.sentences() > before) {
      const ParsevalCounts c =
          predicted[i] ? score_tree(predicted[i], gold_tree, args.options)
                       : ParsevalCounts{0, 0,
                                        static_cast<long>(constituents(gold_tree, args.options).size())};
      const bool exact = predicted[i] && exact_match(predicted[i], gold_tree);
      out << eval_tsv_row(i + 1, gold.sentences[i].tokens.size(), c, exact) << '\n';
    }
  }
  if (!args.per_sentence) out << eval_report(acc);
  return kOk;
}

struct OracleArgs {
  std::string model, gold;
  SearchConfig search;
  EvalOptions options;
  int jobs = 1;
};

inline int cmd_oracle_curve(const OracleArgs& args, std::ostream& out, std::ostream& err) {
  const ParserArchive archive = load_archive(args.model);
  const Parser parser = archive.make_parser();
  const Corpus gold = load_corpus_file(args.gold, HeadRules::defaults(), &err);
  if (gold.sentences.empty()) throw DataError("gold corpus has no usable trees");

  std::vector<std::vector<ScoredParse>> lists(gold.sentences.size());
  parallel_for(gold.sentences.size(), args.jobs, [&](std::size_t i) {
    lists[i] = parser.parse(gold.sentences[i].tokens, args.search);
  });

  const std::size_t max_n = static_cast<std::size_t>(args.search.M);
  out << "candidates\tprecision\trecall\tf1\texact\n";
  for (std::size_t n = 1; n <= max_n; ++n) {
    EvalAccumulator acc(args.options);
    for (std::size_t i = 0; i < lists.size(); ++i) {
      const auto& gold_tree = gold.sentences[i].tree;
      if (lists[i].empty()) {
        acc.add(nullptr, gold_tree);
        continue;
      }
      std::vector<ScoredParse> prefix(lists[i].begin(),
                                      lists[i].begin() +
                                          std::min<std::size_t>(n, lists[i].size()));
      acc.add(prefix[oracle_best(prefix, gold_tree, args.options)].tree, gold_tree);
    }
    out << n << '\t' << format_fixed(acc.precision()) << '\t' << format_fixed(acc.recall())
        << '\t' << format_fixed(acc.f1()) << '\t' << format_fixed(acc.exact_rate()) << '\n';
  }
  return kOk;
}

}  // namespace detail

/// In-process entry point; args[0] is the program name.
inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"history-based maximum-entropy constituency parser"};
  app.require_subcommand(1);

  detail::TrainArgs train_args;
  auto* train = app.add_subcommand("train", "fit models on a bracketed treebank");
  train->add_option("--corpus", train_args.corpus, "training treebank file")
      ->required()
      ->envname("MAXPARSE_CORPUS");
  train->add_option("--output", train_args.output, "archive file to write")->required();
  train->add_option("--head-rules", train_args.head_rules,
                    "head percolation table (default: built in)");
  train->add_option("--cutoff", train_args.config.maxent.cutoff,
                    "minimum (predicate, action) count")
      ->envname("MAXPARSE_CUTOFF");
  train->add_option("--iterations", train_args.config.maxent.max_iters,
                    "scaling iteration cap")
      ->envname("MAXPARSE_ITERATIONS");
  train->add_option("--tolerance", train_args.config.maxent.tol,
                    "per-event expectation gap for convergence")
      ->envname("MAXPARSE_TOLERANCE");
  train->add_option("--rare-threshold", train_args.config.rare_threshold,
                    "word count below which shape predicates replace identity")
      ->envname("MAXPARSE_RARE_THRESHOLD");

  detail::ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "parse tokenized sentences, one per line");
  parse->add_option("--model", parse_args.model, "trained archive")
      ->required()
      ->envname("MAXPARSE_MODEL");
  parse->add_option("--input", parse_args.input, "sentence file, or - for stdin");
  parse->add_option("--output", parse_args.output, "destination, or - for stdout");
  parse->add_option("-k,--beam", parse_args.search.K, "derivations expanded per heap")
      ->envname("MAXPARSE_K");
  parse->add_option("-m,--parses", parse_args.search.M, "complete parses collected")
      ->envname("MAXPARSE_M");
  parse->add_option("-q,--mass", parse_args.search.Q, "probability mass kept per expansion")
      ->envname("MAXPARSE_Q");
  parse->add_flag("--best-only", parse_args.best_only, "print only the best tree per sentence");
  parse->add_option("--jobs", parse_args.jobs, "worker threads")->envname("MAXPARSE_JOBS");

  auto add_eval_flags = [](CLI::App* cmd, EvalOptions& options) {
    cmd->add_flag("--ignore-quotes", options.ignore_quotes,
                  "drop quotation-mark tokens before scoring");
    cmd->add_flag("--ignore-punct", options.ignore_punctuation,
                  "drop all punctuation tokens before scoring");
    cmd->add_flag("--collapse-advp-prt", options.collapse_advp_prt, "score PRT as ADVP");
    cmd->add_option("--max-length", options.max_length,
                    "skip sentences with more tokens than this (0 = keep all)");
  };

  detail::EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "bracket scores against a gold treebank");
  evaluate->add_option("--gold", eval_args.gold, "gold treebank file")->required();
  evaluate->add_option("--predicted", eval_args.predicted,
                       "predicted trees, one per line (NO-PARSE for misses)")
      ->required();
  evaluate->add_flag("--per-sentence", eval_args.per_sentence, "one TSV row per sentence");
  add_eval_flags(evaluate, eval_args.options);

  detail::OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle-curve",
                                    "best reachable scores as the candidate list grows");
  oracle->add_option("--model", oracle_args.model, "trained archive")
      ->required()
      ->envname("MAXPARSE_MODEL");
  oracle->add_option("--gold", oracle_args.gold, "gold treebank file")->required();
  oracle->add_option("-k,--beam", oracle_args.search.K, "derivations expanded per heap")
      ->envname("MAXPARSE_K");
  oracle->add_option("-m,--parses", oracle_args.search.M, "candidate list size")
      ->envname("MAXPARSE_M");
  oracle->add_option("-q,--mass", oracle_args.search.Q, "probability mass kept per expansion")
      ->envname("MAXPARSE_Q");
  add_eval_flags(oracle, oracle_args.options);
  oracle->add_option("--jobs", oracle_args.jobs, "worker threads")->envname("MAXPARSE_JOBS");

  try {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (app.got_subcommand(train)) return detail::cmd_train(train_args, out, err);
    if (app.got_subcommand(parse)) return detail::cmd_parse(parse_args, in, out, err);
    if (app.got_subcommand(evaluate)) return detail::cmd_evaluate(eval_args, out, err);
    return detail::cmd_oracle_curve(oracle_args, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(std::move(args), std::cin, std::cout, std::cerr);
}

}  // namespace maxparse::cli
