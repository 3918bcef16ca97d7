#include "cobweb/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace cobweb {

namespace {

// UTF-8 decode; invalid bytes decode as U+FFFD and one byte is consumed.
std::uint32_t decode_utf8(const std::string& s, std::size_t& i) {
  unsigned char b = s[i];
  if (b < 0x80) {
    ++i;
    return b;
  }
  int len = 0;
  std::uint32_t cp = 0;
  if ((b & 0xE0) == 0xC0) {
    len = 2;
    cp = b & 0x1F;
  } else if ((b & 0xF0) == 0xE0) {
    len = 3;
    cp = b & 0x0F;
  } else if ((b & 0xF8) == 0xF0) {
    len = 4;
    cp = b & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    unsigned char c = s[i + k];
    if ((c & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  i += len;
  return cp;
}

void encode_utf8(std::uint32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space_cp(std::uint32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\r' || cp == '\n' || cp == '\v' || cp == '\f' ||
         cp == 0xA0 || cp == 0x2028 || cp == 0x2029 || cp == 0xFEFF;
}

// Unicode punctuation (category P*) for ASCII plus the Latin/General
// Punctuation ranges that show up in English prose.
bool is_punct_cp(std::uint32_t cp) {
  if (cp < 0x80) {
    switch (cp) {
      case '!': case '"': case '#': case '%': case '&': case '\'':
      case '(': case ')': case '*': case ',': case '-': case '.':
      case '/': case ':': case ';': case '?': case '@':
      case '[': case '\\': case ']': case '_': case '{': case '}':
        return true;
      default:
        return false;
    }
  }
  if (cp == 0xA1 || cp == 0xA7 || cp == 0xAB || cp == 0xB6 || cp == 0xB7 || cp == 0xBB ||
      cp == 0xBF)
    return true;
  if (cp >= 0x2010 && cp <= 0x2027) return true;  // dashes, quotes, daggers, ellipsis
  if (cp >= 0x2030 && cp <= 0x205E) return true;  // permille through general punctuation tail
  if (cp >= 0x2E00 && cp <= 0x2E7F) return true;  // supplemental punctuation
  if (cp >= 0x3001 && cp <= 0x3003) return true;
  if (cp == 0x2E80) return false;
  return false;
}

std::uint32_t lower_cp(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  // Latin-1 supplement, excluding the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

}  // namespace

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open corpus file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

StopWords StopWords::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open stop-word file: " + path);
  StopWords sw;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r\n");
    sw.words.insert(line.substr(b, e - b + 1));
  }
  return sw;
}

std::vector<std::string> tokenize(const std::string& raw) {
  std::vector<std::string> tokens;
  std::string cur;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::uint32_t cp = decode_utf8(raw, i);
    if (is_punct_cp(cp)) continue;  // deleted, not replaced by a space
    if (is_space_cp(cp)) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    encode_utf8(lower_cp(cp), cur);
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<Sentence> preprocess(const std::vector<std::string>& raw, const StopWords& stops,
                                 std::size_t min_len) {
  std::vector<Sentence> out;
  for (std::size_t li = 0; li < raw.size(); ++li) {
    Sentence s;
    s.source_index = li;
    for (auto& tok : tokenize(raw[li])) {
      if (!stops.contains(tok)) s.tokens.push_back(std::move(tok));
    }
    if (s.tokens.size() >= min_len) out.push_back(std::move(s));
  }
  if (out.empty()) throw Error(ErrorKind::empty_corpus, "no sentences survive preprocessing");
  return out;
}

std::vector<WindowedExample> windows(const Sentence& s, int window) {
  if (window < 1) throw Error(ErrorKind::config, "window must be >= 1");
  std::vector<WindowedExample> out;
  out.reserve(s.tokens.size());
  const std::size_t n = s.tokens.size();
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < n; ++i) {
    WindowedExample ex;
    ex.anchor = s.tokens[i];
    ex.position = i;
    std::size_t lo = i >= w ? i - w : 0;
    std::size_t hi = std::min(n, i + w + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (j != i) ex.context.push_back(s.tokens[j]);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

TopWords top_frequent_words(const std::vector<Sentence>& sentences, std::size_t k) {
  if (sentences.empty()) throw Error(ErrorKind::empty_corpus, "no sentences");
  if (k < 1) throw Error(ErrorKind::config, "k must be >= 1");
  std::map<std::string, std::size_t> freq;  // ordered: lexicographic tie-break for free
  for (const auto& s : sentences)
    for (const auto& t : s.tokens) ++freq[t];

  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  TopWords out;
  out.truncated = items.size() < k;
  for (std::size_t i = 0; i < std::min(k, items.size()); ++i) out.words.push_back(items[i].first);
  return out;
}

}  // namespace cobweb
