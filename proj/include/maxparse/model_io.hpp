#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <maxparse/maxent.hpp>
#include <maxparse/search.hpp>

namespace maxparse {

inline const char* procedure_name(ActionKind k) {
  switch (k) {
    case ActionKind::Tag: return "TAG";
    case ActionKind::Chunk: return "CHUNK";
    case ActionKind::Build: return "BUILD";
    default: return "CHECK";
  }
}

inline ActionKind procedure_from_name(const std::string& name) {
  if (name == "TAG") return ActionKind::Tag;
  if (name == "CHUNK") return ActionKind::Chunk;
  if (name == "BUILD") return ActionKind::Build;
  if (name == "CHECK") return ActionKind::Check;
  throw DataError("unknown procedure: " + name);
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw DataError("cannot format number");
  return std::string(buf, end);
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

struct LineReader {
  std::istream& in;
  std::string location;
  std::string line;
  std::size_t line_no = 0;

  bool next() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  }

  const std::string& need(const char* expected) {
    if (!next()) throw DataError(where() + ": unexpected end of file, expected " + expected);
    return line;
  }

  std::string where() const { return location + " line " + std::to_string(line_no); }

  // "<keyword> <count>" header lines
  std::size_t counted(const char* keyword) {
    need(keyword);
    std::istringstream is(line);
    std::string kw;
    std::size_t n = 0;
    if (!(is >> kw >> n) || kw != keyword)
      throw DataError(where() + ": expected '" + keyword + " <count>', got '" + line + "'");
    return n;
  }

  void expect(const std::string& exact) {
    need(exact.c_str());
    if (line != exact)
      throw DataError(where() + ": expected '" + exact + "', got '" + line + "'");
  }
};

inline double parse_double(const std::string& text, const std::string& where) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [p, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || p != last) throw DataError(where + ": bad number '" + text + "'");
  return x;
}

}  // namespace detail

inline void write_model(std::ostream& os, const MaxentModel& m) {
  os << "maxparse-model 1\n";
  os << "procedure " << procedure_name(m.procedure()) << '\n';
  os << "actions " << m.actions().size() << '\n';
  for (const auto& a : m.actions()) os << encode(a) << '\n';
  os << "features " << m.features().size() << '\n';
  for (const auto& f : m.features())
    os << "f " << m.index_of(f.action) << ' ' << format_double(f.alpha) << ' ' << f.predicate
       << '\n';
  os << "end\n";
}

inline MaxentModel read_model(detail::LineReader& r) {
  r.need("maxparse-model header");
  if (r.line != "maxparse-model 1")
    throw DataError(r.where() + ": unsupported model format '" + r.line + "'");
  r.need("procedure");
  if (r.line.rfind("procedure ", 0) != 0)
    throw DataError(r.where() + ": expected 'procedure <NAME>'");
  const ActionKind kind = procedure_from_name(r.line.substr(10));

  const std::size_t n_actions = r.counted("actions");
  std::vector<Action> actions;
  actions.reserve(n_actions);
  for (std::size_t i = 0; i < n_actions; ++i) actions.push_back(decode_action(r.need("action")));

  const std::size_t n_features = r.counted("features");
  std::vector<Feature> features;
  features.reserve(n_features);
  for (std::size_t i = 0; i < n_features; ++i) {
    r.need("feature");
    // f <action-index> <alpha> <predicate, verbatim to end of line>
    if (r.line.rfind("f ", 0) != 0) throw DataError(r.where() + ": expected 'f ...'");
    const std::size_t sp1 = r.line.find(' ', 2);
    const std::size_t sp2 = sp1 == std::string::npos ? sp1 : r.line.find(' ', sp1 + 1);
    if (sp2 == std::string::npos)
      throw DataError(r.where() + ": expected 'f <action> <weight> <predicate>'");
    const std::size_t ai = static_cast<std::size_t>(
        detail::parse_double(r.line.substr(2, sp1 - 2), r.where()));
    if (ai >= actions.size()) throw DataError(r.where() + ": action index out of range");
    const double alpha =
        detail::parse_double(r.line.substr(sp1 + 1, sp2 - sp1 - 1), r.where());
    features.push_back({r.line.substr(sp2 + 1), actions[ai], alpha});
  }
  r.expect("end");
  return MaxentModel::from_parts(kind, std::move(actions), std::move(features));
}

inline MaxentModel read_model(std::istream& in, const std::string& location = "model") {
  detail::LineReader r{in, location};
  return read_model(r);
}

/// Everything a trained parser needs, in one text file.
struct ParserArchive {
  std::uint64_t corpus_hash = 0;
  std::size_t trained_sentences = 0;
  int rare_threshold = 5;
  ActionVocab vocab;
  TagDictionary tagdict;
  std::string head_rules_text;
  ModelSet models;

  void write(std::ostream& os) const {
    os << "maxparse-archive 1\n";
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << corpus_hash;
    os << "corpus-hash " << hash.str() << '\n';
    os << "sentences " << trained_sentences << '\n';
    os << "rare-threshold " << rare_threshold << '\n';

    auto labels = [&os](const char* keyword, const std::vector<std::string>& xs) {
      os << keyword << ' ' << xs.size() << '\n';
      for (const auto& x : xs) os << x << '\n';
    };
    labels("postags", vocab.pos_tags);
    labels("chunklabels", vocab.chunk_labels);
    labels("buildlabels", vocab.build_labels);

    os << "tagdict " << tagdict.entries().size() << '\n';
    for (const auto& [word, tags] : tagdict.entries()) {
      os << word << ' ' << tags.size();
      for (const auto& [tag, count] : tags) os << ' ' << tag << ' ' << count;
      os << '\n';
    }

    std::vector<std::string> rule_lines;
    {
      std::istringstream is(head_rules_text);
      std::string line;
      while (std::getline(is, line)) rule_lines.push_back(line);
    }
    os << "headrules " << rule_lines.size() << '\n';
    for (const auto& line : rule_lines) os << line << '\n';

    for (ActionKind k :
         {ActionKind::Tag, ActionKind::Chunk, ActionKind::Build, ActionKind::Check}) {
      os << "model " << procedure_name(k) << '\n';
      write_model(os, models.for_kind(k));
    }
    os << "end-archive\n";
  }

  static ParserArchive read(std::istream& in, const std::string& location = "archive") {
    detail::LineReader r{in, location};
    ParserArchive a;
    r.need("maxparse-archive header");
    if (r.line != "maxparse-archive 1")
      throw DataError(r.where() + ": unsupported archive format '" + r.line + "'");

    r.need("corpus-hash");
    if (r.line.rfind("corpus-hash ", 0) != 0)
      throw DataError(r.where() + ": expected 'corpus-hash <hex>'");
    a.corpus_hash = std::stoull(r.line.substr(12), nullptr, 16);
    a.trained_sentences = r.counted("sentences");
    a.rare_threshold = static_cast<int>(r.counted("rare-threshold"));

    auto labels = [&r](const char* keyword, std::vector<std::string>& xs) {
      const std::size_t n = r.counted(keyword);
      xs.clear();
      xs.reserve(n);
      for (std::size_t i = 0; i < n; ++i) xs.push_back(r.need(keyword));
    };
    labels("postags", a.vocab.pos_tags);
    labels("chunklabels", a.vocab.chunk_labels);
    labels("buildlabels", a.vocab.build_labels);

    const std::size_t n_words = r.counted("tagdict");
    for (std::size_t i = 0; i < n_words; ++i) {
      std::istringstream is(r.need("tagdict entry"));
      std::string word, tag;
      std::size_t k = 0;
      long count = 0;
      if (!(is >> word >> k)) throw DataError(r.where() + ": bad tag dictionary entry");
      for (std::size_t j = 0; j < k; ++j) {
        if (!(is >> tag >> count)) throw DataError(r.where() + ": bad tag dictionary entry");
        a.tagdict.add(word, tag, count);
      }
    }
    a.tagdict.sort();

    const std::size_t n_rules = r.counted("headrules");
    std::ostringstream rules;
    for (std::size_t i = 0; i < n_rules; ++i) rules << r.need("head rules line") << '\n';
    a.head_rules_text = rules.str();

    for (ActionKind k :
         {ActionKind::Tag, ActionKind::Chunk, ActionKind::Build, ActionKind::Check}) {
      r.expect(std::string("model ") + procedure_name(k));
      MaxentModel m = read_model(r);
      if (m.procedure() != k)
        throw DataError(r.where() + ": archive section order is TAG, CHUNK, BUILD, CHECK");
      switch (k) {
        case ActionKind::Tag: a.models.tag = std::move(m); break;
        case ActionKind::Chunk: a.models.chunk = std::move(m); break;
        case ActionKind::Build: a.models.build = std::move(m); break;
        default: a.models.check = std::move(m); break;
      }
    }
    r.expect("end-archive");
    return a;
  }

  Parser make_parser() const {
    auto rules = std::make_shared<const HeadRules>(HeadRules::parse(head_rules_text));
    ContextExtractor extractor(tagdict.counts(), rare_threshold);
    return Parser(models, vocab, tagdict, rules, std::move(extractor));
  }
};

inline void save_archive(const ParserArchive& a, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open archive for writing: " + path);
  a.write(out);
  if (!out) throw DataError("failed while writing archive: " + path);
}

inline ParserArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open archive: " + path);
  return ParserArchive::read(in, path);
}

}  // namespace maxparse
