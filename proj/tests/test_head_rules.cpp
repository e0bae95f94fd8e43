#include <catch_amalgamated.hpp>

#include <fixtures.hpp>
#include <maxparse/corpus.hpp>
#include <maxparse/head_rules.hpp>

using namespace maxparse;

TEST_CASE("head rules parse and pick by priority and direction") {
  HeadRules hr = HeadRules::parse(
      "# comment\n"
      "VP left VBD VB\n"
      "NP right NN NNS\n");
  CHECK(hr.find_head("VP", std::vector<std::string>{"ADVP", "VBD", "NP", "VBD"}) == 1);  // leftmost VBD
  CHECK(hr.find_head("NP", std::vector<std::string>{"NN", "JJ", "NN"}) == 2);            // rightmost NN
  CHECK(hr.find_head("VP", std::vector<std::string>{"ADVP", "NP"}) == 0);                // fallback: leftmost child
  CHECK(hr.find_head("ZZZ", std::vector<std::string>{"A", "B"}) == 0);                   // unknown parent
}

TEST_CASE("head rule syntax errors name the line") {
  try {
    HeadRules::parse("NP right NN\nbogus\n");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("built-in table covers the usual labels") {
  const HeadRules& hr = HeadRules::defaults();
  CHECK(hr.find_head("PP", std::vector<std::string>{"IN", "NP"}) == 0);
  CHECK(hr.find_head("NP", std::vector<std::string>{"DT", "JJ", "NN"}) == 2);
  CHECK(hr.find_head("S", std::vector<std::string>{"NP", "VP", "."}) == 1);
}

TEST_CASE("the checked-in head rules file matches the built-in table") {
  CHECK(fixtures::slurp_file(fixtures::source_path("data/head_rules.txt")) ==
        HeadRules::default_table());
}

TEST_CASE("with_heads annotates recursively") {
  auto t = with_heads(read_tree("(S (NP (DT the) (NN dog)) (VP (VBD ran)) (. .))"),
                      HeadRules::defaults());
  CHECK(t->head_word == "ran");
  CHECK(t->children[0]->head_word == "dog");
  CHECK(t->children[0]->head_index == 1);
}

TEST_CASE("corpus loading normalizes, annotates and counts skips") {
  std::ostringstream warn;
  Corpus c = load_corpus(
      "(S (NP-SBJ (NN dog)) (VP (VBD ran)) (. .))\n"
      "(S (NP (-NONE- *)))\n",
      HeadRules::defaults(), &warn);
  REQUIRE(c.sentences.size() == 1);
  CHECK(c.vacuous_skipped == 1);
  CHECK(c.sentences[0].tokens == std::vector<std::string>{"dog", "ran", "."});
  CHECK(c.sentences[0].tree->head_word == "ran");
  CHECK(warn.str().find("tree 2") != std::string::npos);
}
