#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "cobweb/corpus.hpp"
#include "support/fixture_corpus.hpp"

using namespace cobweb;

namespace {

StopWords only(std::initializer_list<const char*> ws) {
  StopWords sw;
  for (const char* w : ws) sw.words.insert(w);
  return sw;
}

}  // namespace

TEST_CASE("tokenize lowercases and deletes punctuation") {
  auto toks = tokenize("The door, the DOOR!");
  CHECK(toks == std::vector<std::string>{"the", "door", "the", "door"});
  CHECK(tokenize("black-tor") == std::vector<std::string>{"blacktor"});
  CHECK(tokenize("  “Quoted” text… ") == std::vector<std::string>{"quoted", "text"});
  CHECK(tokenize("...").empty());
}

TEST_CASE("preprocess applies stop words and the minimum length") {
  std::vector<std::string> raw = {
      "The door, the DOOR!",                                         // 2 tokens -> dropped
      "alpha beta gamma delta epsilon zeta eta theta iota",          // 9 -> dropped
      "alpha beta gamma delta epsilon zeta eta theta iota kappa",    // 10 -> kept
      "the alpha beta gamma delta epsilon zeta eta theta iota kappa lambda",  // 11 -> kept
  };
  auto sents = preprocess(raw, only({"the"}), 10);
  REQUIRE(sents.size() == 2);
  CHECK(sents[0].source_index == 2);
  CHECK(sents[0].tokens.size() == 10);
  CHECK(sents[1].source_index == 3);
  CHECK(sents[1].tokens.size() == 11);
  CHECK(sents[1].tokens.front() == "alpha");
}

TEST_CASE("preprocess throws when nothing survives") {
  std::vector<std::string> raw = {"the the the", "a b"};
  CHECK_THROWS_AS(preprocess(raw, only({"the"}), 10), Error);
}

TEST_CASE("preprocess is idempotent") {
  auto raw = testsup::experiment_corpus(50, 31);
  auto once = preprocess(raw, StopWords::pinned(), 10);
  std::vector<std::string> rejoined;
  for (const auto& s : once) {
    std::string line;
    for (const auto& t : s.tokens) {
      if (!line.empty()) line += ' ';
      line += t;
    }
    rejoined.push_back(line);
  }
  auto twice = preprocess(rejoined, StopWords::pinned(), 10);
  REQUIRE(twice.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice[i].tokens == once[i].tokens);
}

TEST_CASE("windows truncate at sentence edges") {
  Sentence s;
  for (int i = 0; i < 12; ++i) s.tokens.push_back("w" + std::to_string(i));
  auto ws = windows(s, 4);
  REQUIRE(ws.size() == 12);
  CHECK(ws[0].context.size() == 4);   // nothing to the left
  CHECK(ws[2].context.size() == 6);   // 2 left + 4 right
  CHECK(ws[6].context.size() == 8);   // full window
  CHECK(ws[11].context.size() == 4);  // nothing to the right
  CHECK(ws[2].anchor == "w2");
  for (const auto& ex : ws)
    CHECK(std::find(ex.context.begin(), ex.context.end(), ex.anchor) == ex.context.end());
}

TEST_CASE("window context sizes satisfy the truncation identity") {
  Sentence s;
  for (int i = 0; i < 23; ++i) s.tokens.push_back("t" + std::to_string(i));
  const int w = 4;
  auto ws = windows(s, w);
  REQUIRE(ws.size() == s.tokens.size());
  std::size_t total = 0;
  for (const auto& ex : ws) total += ex.context.size();
  std::size_t expect = 0;
  for (int i = 0; i < static_cast<int>(s.tokens.size()); ++i)
    expect += std::min(i, w) + std::min(static_cast<int>(s.tokens.size()) - 1 - i, w);
  CHECK(total == expect);
}

TEST_CASE("single-token sentence yields one example with empty context") {
  Sentence s;
  s.tokens = {"solo"};
  auto ws = windows(s, 4);
  REQUIRE(ws.size() == 1);
  CHECK(ws[0].anchor == "solo");
  CHECK(ws[0].context.empty());
}

TEST_CASE("an eight-token context can repeat a word three times") {
  Sentence s;
  s.tokens = {"a", "the", "b", "the", "x", "d", "the", "e", "f"};
  auto ws = windows(s, 4);
  const auto& ex = ws[4];
  CHECK(ex.anchor == "x");
  CHECK(ex.context.size() == 8);
  CHECK(std::count(ex.context.begin(), ex.context.end(), "the") == 3);
}

TEST_CASE("top_frequent_words ranks by count then lexicographically") {
  auto mk = [](std::vector<std::string> toks) {
    Sentence s;
    s.tokens = std::move(toks);
    return s;
  };
  std::vector<Sentence> corpus{mk({"a", "a", "a", "b", "b", "c"})};
  auto top = top_frequent_words(corpus, 2);
  CHECK(top.words == std::vector<std::string>{"a", "b"});
  CHECK_FALSE(top.truncated);

  std::vector<Sentence> tie{mk({"b", "a", "b", "a"})};
  CHECK(top_frequent_words(tie, 1).words == std::vector<std::string>{"a"});

  auto short_list = top_frequent_words(corpus, 50);
  CHECK(short_list.truncated);
  CHECK(short_list.words.size() == 3);
}

TEST_CASE("the shipped stop-word file matches the pinned builtin list") {
  const char* dir = std::getenv("COBWEB_DATA_DIR");
  if (!dir) return;  // only checked when ctest provides the repo layout
  StopWords file = StopWords::load(std::string(dir) + "/stopwords_en.txt");
  CHECK(file.words == StopWords::pinned().words);
}

TEST_CASE("the reduction fixture drops to exactly 374 sentences") {
  auto raw = testsup::reduction_fixture();
  REQUIRE(raw.size() == 1040);
  auto sents = preprocess(raw, StopWords::pinned(), 10);
  CHECK(sents.size() == 374);
}
