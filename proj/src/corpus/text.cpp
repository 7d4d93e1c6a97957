#include "dman/corpus/text.hpp"

#include <array>
#include <cctype>

namespace dman {
namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_punct(unsigned char c) { return c < 128 && std::ispunct(c) != 0; }
bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool iends_with(std::string_view s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  const auto tail = s.substr(s.size() - suffix.size());
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(tail[i])) != suffix[i]) return false;
  }
  return true;
}

constexpr std::array<std::string_view, 6> kClitics = {"'s", "'re", "'ve", "'ll", "'d", "'m"};

// Splits a punctuation-free-at-the-edges word into stem + clitic.
void emit_word(std::string_view word, std::vector<std::string>& out) {
  if (word.size() > 3 && iends_with(word, "n't")) {
    out.emplace_back(word.substr(0, word.size() - 3));
    out.emplace_back(word.substr(word.size() - 3));
    return;
  }
  for (auto clitic : kClitics) {
    if (word.size() > clitic.size() && iends_with(word, clitic)) {
      out.emplace_back(word.substr(0, word.size() - clitic.size()));
      out.emplace_back(word.substr(word.size() - clitic.size()));
      return;
    }
  }
  out.emplace_back(word);
}

// Leading run of one repeated punctuation character, e.g. "..." or "(".
std::size_t punct_run(std::string_view s, std::size_t pos) {
  std::size_t end = pos + 1;
  while (end < s.size() && s[end] == s[pos]) ++end;
  return end - pos;
}

void emit_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = chunk.size();
  while (begin < end && is_punct(static_cast<unsigned char>(chunk[begin]))) {
    const std::size_t n = std::min(punct_run(chunk, begin), end - begin);
    out.emplace_back(chunk.substr(begin, n));
    begin += n;
  }
  std::vector<std::string> trailing;
  while (end > begin && is_punct(static_cast<unsigned char>(chunk[end - 1]))) {
    std::size_t start = end - 1;
    while (start > begin && chunk[start - 1] == chunk[end - 1]) --start;
    trailing.emplace_back(chunk.substr(start, end - start));
    end = start;
  }
  if (end > begin) emit_word(chunk.substr(begin, end - begin), out);
  for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) out.push_back(std::move(*it));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) emit_chunk(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  for (unsigned char c : token) {
    if (!is_punct(c)) return false;
  }
  return true;
}

std::vector<std::vector<std::string>> split_sentences(const std::vector<std::string>& tokens) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> current;
  for (const auto& t : tokens) {
    current.push_back(t);
    bool terminal = !t.empty();
    for (char c : t) terminal = terminal && (c == '.' || c == '!' || c == '?');
    if (terminal) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (static_cast<unsigned char>(c) < 128) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string lemma(std::string_view token) {
  std::string w = to_lower(token);
  auto has_vowel = [](std::string_view s) {
    for (char c : s) {
      if (is_vowel(c)) return true;
    }
    return false;
  };
  auto undouble = [](std::string& s) {
    const std::size_t n = s.size();
    if (n >= 3 && s[n - 1] == s[n - 2] && !is_vowel(s[n - 1]) && s[n - 1] != 'l' && s[n - 1] != 's' && s[n - 1] != 'z') {
      s.pop_back();
    }
  };

  if (w.size() > 4 && ends_with(w, "ies")) {
    w.resize(w.size() - 3);
    w += 'y';
  } else if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (w.size() >= 6 && ends_with(w, "ing") && has_vowel(std::string_view(w).substr(0, w.size() - 3))) {
    w.resize(w.size() - 3);
    undouble(w);
  } else if (w.size() >= 5 && ends_with(w, "ed") && has_vowel(std::string_view(w).substr(0, w.size() - 2))) {
    w.resize(w.size() - 2);
    undouble(w);
  } else if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us")) {
    w.pop_back();
  }
  return w;
}

std::vector<std::size_t> char_ids(std::string_view token) {
  std::vector<std::size_t> ids;
  ids.reserve(token.size());
  for (unsigned char c : token) {
    ids.push_back(c >= 32 && c <= 126 ? static_cast<std::size_t>(c) - 30 : 1);
  }
  return ids;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace dman
