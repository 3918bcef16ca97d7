#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "cobweb/types.hpp"

namespace cobweb {

struct Sentence {
  std::vector<std::string> tokens;
  std::size_t source_index = 0;
};

struct WindowedExample {
  std::string anchor;
  std::size_t position = 0;
  std::vector<std::string> context;  // up to `window` tokens each side, anchor excluded
};

struct StopWords {
  std::unordered_set<std::string> words;

  bool contains(const std::string& w) const { return words.count(w) != 0; }

  static StopWords load(const std::string& path);
  /// The pinned default English list shipped with the project.
  static const StopWords& pinned();
};

std::vector<std::string> read_lines(const std::string& path);

/// Lowercases, deletes punctuation code points, splits on whitespace.
std::vector<std::string> tokenize(const std::string& raw);

/// Tokenize each line, drop stop words, then drop sentences with fewer than
/// `min_len` surviving tokens. Throws empty_corpus when nothing survives.
std::vector<Sentence> preprocess(const std::vector<std::string>& raw, const StopWords& stops,
                                 std::size_t min_len = 10);

/// One example per token position; context truncates at the sentence edges.
std::vector<WindowedExample> windows(const Sentence& s, int window);

struct TopWords {
  std::vector<std::string> words;
  bool truncated = false;  // fewer distinct tokens than requested
};

/// The k most frequent tokens, ties broken lexicographically.
TopWords top_frequent_words(const std::vector<Sentence>& sentences, std::size_t k);

}  // namespace cobweb
