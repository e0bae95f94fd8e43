#include <catch_amalgamated.hpp>

#include <fixtures.hpp>
#include <maxparse/context.hpp>

using namespace maxparse;

namespace {

const char kSep = kFieldSep;

std::string sep_join(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += kSep;
    out += p;
  }
  return out;
}

std::string value_of(const std::vector<Predicate>& ps, const std::string& id) {
  std::string found;
  int hits = 0;
  for (const auto& p : ps)
    if (p.id == id) {
      found = p.value;
      ++hits;
    }
  if (hits != 1) return "<" + std::to_string(hits) + " hits>";
  return found;
}

bool has_id(const std::vector<Predicate>& ps, const std::string& id) {
  for (const auto& p : ps)
    if (p.id == id) return true;
  return false;
}

ContextExtractor frequent_extractor(const std::vector<std::string>& words) {
  auto counts = std::make_shared<std::unordered_map<std::string, int>>();
  for (const auto& w : words) (*counts)[w] = 100;
  return ContextExtractor(counts, 5);
}

ParserState replay_prefix(const std::shared_ptr<const SentenceContext>& ctx,
                          const std::vector<Action>& actions, std::size_t n) {
  ParserState s = initial_state(ctx);
  for (std::size_t i = 0; i < n; ++i) s = apply(s, actions[i]);
  return s;
}

}  // namespace

TEST_CASE("tagging context windows and history") {
  auto tokens = std::vector<std::string>{"the", "dog", "saw", "a", "cat"};
  auto cx = frequent_extractor(tokens);
  auto ctx = make_context(tokens);
  ParserState s = apply(apply(initial_state(ctx), Action::tag("DT")), Action::tag("NN"));

  auto ps = cx.tag_context(s);
  CHECK(value_of(ps, "w0") == "saw");
  CHECK(value_of(ps, "w-1") == "dog");
  CHECK(value_of(ps, "w-2") == "the");
  CHECK(value_of(ps, "w1") == "a");
  CHECK(value_of(ps, "w2") == "cat");
  CHECK(value_of(ps, "t-1") == "NN");
  CHECK(value_of(ps, "t-2,-1") == sep_join({"DT", "NN"}));
  CHECK_FALSE(has_id(ps, "pre1"));

  SECTION("sentence edges use boundary markers") {
    ParserState s0 = initial_state(ctx);
    auto p0 = cx.tag_context(s0);
    CHECK(value_of(p0, "w-1") == "<BOS>");
    CHECK(value_of(p0, "t-2,-1") == sep_join({"<BOS>", "<BOS>"}));
    ParserState s4 = replay_prefix(ctx, {Action::tag("DT"), Action::tag("NN"),
                                         Action::tag("VBD"), Action::tag("DT")},
                                   4);
    auto p4 = cx.tag_context(s4);
    CHECK(value_of(p4, "w1") == "<EOS>");
    CHECK(value_of(p4, "w2") == "<EOS>");
  }
}

TEST_CASE("rare words trade identity for shape") {
  auto cx = ContextExtractor(std::make_shared<std::unordered_map<std::string, int>>(), 5);
  auto ctx = make_context({"Xy-3", "ran"});
  auto ps = cx.tag_context(initial_state(ctx));
  CHECK_FALSE(has_id(ps, "w0"));
  CHECK(value_of(ps, "pre1") == "X");
  CHECK(value_of(ps, "pre4") == "Xy-3");
  CHECK(value_of(ps, "suf1") == "3");
  CHECK(value_of(ps, "suf2") == "-3");
  CHECK(value_of(ps, "num") == "1");
  CHECK(value_of(ps, "cap") == "1");
  CHECK(value_of(ps, "hyp") == "1");
  CHECK(value_of(ps, "w1") == "ran");
}

TEST_CASE("chunking context sees words, tags and assigned marks") {
  auto tokens = std::vector<std::string>{"the", "dog", "saw", "a", "cat"};
  auto cx = frequent_extractor(tokens);
  auto ctx = make_context(tokens);
  std::vector<Action> prefix = {Action::tag("DT"), Action::tag("NN"), Action::tag("VBD"),
                                Action::tag("DT"), Action::tag("NN"),
                                Action::chunk_start("NP"), Action::chunk_join("NP")};
  ParserState s = replay_prefix(ctx, prefix, prefix.size());  // cursor at "saw"

  auto ps = cx.chunk_context(s);
  CHECK(value_of(ps, "cp(0)") == sep_join({"saw", "VBD"}));
  CHECK(value_of(ps, "cp(0*)") == "VBD");
  CHECK(value_of(ps, "cp(-1)") == sep_join({"dog", "NN", "Join NP"}));
  CHECK(value_of(ps, "cp(-2)") == sep_join({"the", "DT", "Start NP"}));
  CHECK(value_of(ps, "cp(1)") == sep_join({"a", "DT"}));
  CHECK(value_of(ps, "cp(-1,0)") ==
        sep_join({"dog", "NN", "Join NP", "saw", "VBD"}));
  CHECK(value_of(ps, "cp(-1*,0*)") == sep_join({"NN", "Join NP", "VBD"}));
  CHECK(value_of(ps, "cp(0,1*)") == sep_join({"saw", "VBD", "DT"}));

  SECTION("out-of-range positions are boundary-marked") {
    ParserState s0 = replay_prefix(ctx, prefix, 5);
    auto p0 = cx.chunk_context(s0);
    CHECK(value_of(p0, "cp(-1)") == sep_join({"<BOS>", "<BOS>", "<BOS>"}));
  }
}

TEST_CASE("building context reports forest labels, heads and notes") {
  auto tokens = std::vector<std::string>{"the", "dog", "saw", "a", "cat", "."};
  auto cx = frequent_extractor(tokens);
  auto ctx = make_context(tokens);
  TreePtr gold = read_tree(
      "(S (NP (DT the) (NN dog)) (VP (VBD saw) (NP (DT a) (NN cat))) (. .))");
  Derivation d = derive(gold, ctx);
  // forest right after chunking: [NP] [VBD] [NP] [.], cursor at the first NP
  ParserState s = replay_prefix(ctx, d.actions, 12);
  REQUIRE(s.pass == Pass::Structure);
  REQUIRE(s.cursor == 0);

  auto ps = cx.build_context(s);
  CHECK(value_of(ps, "cons(0)") == sep_join({"dog", "NP"}));
  CHECK(value_of(ps, "cons(-1)") == sep_join({"<NOTREE>", "<NOTREE>", "<NOTREE>"}));
  CHECK(value_of(ps, "cons(1)") == sep_join({"saw", "VBD"}));
  CHECK(value_of(ps, "cons(2)") == sep_join({"cat", "NP"}));
  CHECK(value_of(ps, "cons(0,1)") == sep_join({"dog", "NP", "saw", "VBD"}));
  CHECK(value_of(ps, "cons(0,1*)") == sep_join({"dog", "NP", "VBD"}));
  CHECK(value_of(ps, "cons(0,1,2)") ==
        sep_join({"dog", "NP", "saw", "VBD", "cat", "NP"}));
  CHECK(value_of(ps, "cons(0,1*,2*)") == sep_join({"dog", "NP", "VBD", "NP"}));
  CHECK(value_of(ps, "cons(-1,0,1)") ==
        sep_join({"<NOTREE>", "<NOTREE>", "<NOTREE>", "dog", "NP", "saw", "VBD"}));

  SECTION("after a build the note is visible to the right neighbor") {
    ParserState b = replay_prefix(ctx, d.actions, 14);  // Start S on NP, No, now at VBD
    REQUIRE(b.cursor == 1);
    auto pb = cx.build_context(b);
    CHECK(value_of(pb, "cons(-1)") == sep_join({"dog", "NP", "Start S"}));
    CHECK(value_of(pb, "cons(0)") == sep_join({"saw", "VBD"}));
  }
}

TEST_CASE("punctuation predicates") {
  SECTION("endofsentence") {
    auto tokens = std::vector<std::string>{"dogs", "ran", "."};
    auto cx = frequent_extractor(tokens);
    auto ctx = make_context(tokens);
    TreePtr gold = read_tree("(S (NP (NNS dogs)) (VP (VBD ran)) (. .))");
    Derivation d = derive(gold, ctx);
    // state just before the final BUILD Join S at "."
    ParserState s = replay_prefix(ctx, d.actions, d.actions.size() - 2);
    REQUIRE(s.turn == Turn::Build);
    auto ps = cx.build_context(s);
    CHECK(has_id(ps, "endofsentence"));
    CHECK_FALSE(has_id(ps, "iscomma"));
  }

  SECTION("iscomma") {
    auto tokens = std::vector<std::string>{"a", ",", "b", ","};
    auto cx = frequent_extractor(tokens);
    auto ctx = make_context(tokens);
    std::vector<Action> acts = {
        Action::tag("SYM"), Action::tag(","),   Action::tag("SYM"), Action::tag(","),
        Action::chunk_other(), Action::chunk_other(), Action::chunk_other(),
        Action::chunk_other(),
        Action::build_start("X"), Action::check(false),
        Action::build_join("X"),  Action::check(false),
        Action::build_join("X"),  Action::check(false)};
    ParserState s = replay_prefix(ctx, acts, acts.size());
    REQUIRE(s.cursor == 3);
    auto ps = cx.build_context(s);
    CHECK(has_id(ps, "iscomma"));
    CHECK_FALSE(has_id(ps, "endofsentence"));
  }

  SECTION("bracketsmatch") {
    auto tokens = std::vector<std::string>{"(", "x", ")"};
    auto cx = frequent_extractor(tokens);
    auto ctx = make_context(tokens);
    std::vector<Action> acts = {
        Action::tag("-LRB-"), Action::tag("SYM"), Action::tag("-RRB-"),
        Action::chunk_other(), Action::chunk_other(), Action::chunk_other(),
        Action::build_start("PRN"), Action::check(false),
        Action::build_join("PRN"),  Action::check(false)};
    ParserState s = replay_prefix(ctx, acts, acts.size());
    REQUIRE(s.cursor == 2);
    CHECK(has_id(cx.build_context(s), "bracketsmatch"));
  }
}

TEST_CASE("checking context describes the proposal") {
  auto tokens = std::vector<std::string>{"I", "saw"};
  auto cx = frequent_extractor(tokens);
  auto ctx = make_context(tokens);
  TreePtr gold = read_tree("(S (NP (PRP I)) (VP (VBD saw)))");
  Derivation d = derive(gold, ctx);
  ParserState s = replay_prefix(ctx, d.actions, d.actions.size() - 1);
  REQUIRE(s.turn == Turn::Check);

  auto ps = cx.check_context(s);
  CHECK(value_of(ps, "cc(last)") == sep_join({"S", "VP", "saw"}));
  CHECK(value_of(ps, "cc(last*)") == sep_join({"S", "VP"}));
  CHECK(value_of(ps, "cc(begin)") == sep_join({"S", "NP", "I"}));
  CHECK(value_of(ps, "cc(begin,last)") == sep_join({"S", "NP", "I", "VP", "saw"}));
  CHECK(value_of(ps, "cc(begin*,last*)") == sep_join({"S", "NP", "VP"}));
  CHECK(value_of(ps, "production") == sep_join({"S", "NP", "VP"}));
  CHECK(value_of(ps, "sur(-1)") == sep_join({"<BOS>", "<BOS>"}));
  CHECK(value_of(ps, "sur(1)") == sep_join({"<EOS>", "<EOS>"}));
  CHECK(value_of(ps, "sur(1*)") == "<EOS>");
}

TEST_CASE("surrounding tokens of an inner proposal") {
  auto tokens = std::vector<std::string>{"the", "dog", "saw", "a", "cat", "."};
  auto cx = frequent_extractor(tokens);
  auto ctx = make_context(tokens);
  TreePtr gold = read_tree(
      "(S (NP (DT the) (NN dog)) (VP (VBD saw) (NP (DT a) (NN cat))) (. .))");
  Derivation d = derive(gold, ctx);
  // find the check turn whose proposal is the VP over tokens [2, 5)
  auto s = initial_state(ctx);
  std::optional<std::vector<Predicate>> found;
  for (const auto& a : d.actions) {
    if (s.pass == Pass::Structure && s.turn == Turn::Check) {
      auto p = proposed_constituent(s);
      if (p && p->label == "VP" && p->span_start == 2 && p->span_end == 5)
        found = cx.check_context(s);
    }
    s = apply(s, a);
  }
  REQUIRE(found.has_value());
  CHECK(value_of(*found, "sur(-1)") == sep_join({"NN", "dog"}));
  CHECK(value_of(*found, "sur(-2)") == sep_join({"DT", "the"}));
  CHECK(value_of(*found, "sur(1)") == sep_join({".", "."}));
  CHECK(value_of(*found, "sur(2)") == sep_join({"<EOS>", "<EOS>"}));
}

TEST_CASE("event collection replays gold derivations and skips underivable trees") {
  std::ostringstream warn;
  Corpus corpus = load_corpus(
      "(S (NP (PRP I)) (VP (VBD saw)))\n"
      "(TOP (S (NP (NNS dogs)) (VP (VBD ran))))\n",
      HeadRules::defaults(), &warn);
  REQUIRE(corpus.sentences.size() == 2);
  ContextExtractor cx(std::make_shared<std::unordered_map<std::string, int>>(
                          word_counts(corpus)),
                      5);
  std::ostringstream skip_warn;
  TrainingSamples samples = collect_events(corpus, cx, nullptr, &skip_warn);
  CHECK(samples.underivable_skipped == 1);
  CHECK(skip_warn.str().find("sentence 2") != std::string::npos);
  REQUIRE(samples.tag.size() == 2);
  REQUIRE(samples.chunk.size() == 2);
  REQUIRE(samples.build.size() == 2);
  REQUIRE(samples.check.size() == 2);
  CHECK(encode(samples.tag[0].action) == "TAG PRP");
  CHECK(encode(samples.build[1].action) == "BUILD Join S");
  CHECK(encode(samples.check[1].action) == "CHECK Yes");
  // every event carries at least the base templates
  for (const auto& e : samples.build) CHECK(e.context.size() >= 20);
}

TEST_CASE("context extraction is deterministic") {
  auto tokens = std::vector<std::string>{"the", "dog", "ran", "."};
  auto cx = frequent_extractor(tokens);
  auto ctx = make_context(tokens);
  TreePtr gold = read_tree("(S (NP (DT the) (NN dog)) (VP (VBD ran)) (. .))");
  Derivation d = derive(gold, ctx);
  ParserState s = initial_state(ctx);
  for (const auto& a : d.actions) {
    auto k1 = cx.context_keys(s);
    auto k2 = cx.context_keys(s);
    CHECK(k1 == k2);
    s = apply(s, a);
  }
}
