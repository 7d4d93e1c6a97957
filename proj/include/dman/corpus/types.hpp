#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dman {

enum class Label : std::size_t { entailment = 0, neutral = 1, contradiction = 2 };
inline constexpr std::size_t kNumLabels = 3;

std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view s);

// Exact, lowercase, lemma match against the paired sentence.
using MatchFlags = std::array<bool, 3>;

struct TokenizedSentence {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<std::size_t> word_ids;
  std::vector<std::vector<std::size_t>> char_ids;
  std::vector<std::size_t> pos_ids;
  std::vector<std::size_t> ner_ids;
  std::vector<MatchFlags> em;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool featurized() const;
  // Throws std::logic_error when a populated parallel array has the wrong length.
  void check_parallel() const;
};

TokenizedSentence make_sentence(std::string_view text);
TokenizedSentence sentence_from_tokens(std::vector<std::string> tokens);

struct NLIExample {
  TokenizedSentence premise;
  TokenizedSentence hypothesis;
  Label gold = Label::neutral;
  std::vector<std::string> annotator_labels;
  // 0-based index among non-blank lines of the source file; sidecar rows
  // 2*i and 2*i+1 hold the premise and hypothesis tags.
  std::size_t source_index = 0;
  // Fields other than the four core ones, carried through for round-tripping.
  nlohmann::json extra = nlohmann::json::object();
};

inline const std::vector<std::string>& default_markers() {
  static const std::vector<std::string> m = {"but", "because", "if", "when", "so", "although", "before", "still"};
  return m;
}

struct MarkerPair {
  TokenizedSentence s1;
  TokenizedSentence s2;
  std::size_t marker = 0;
};

}  // namespace dman
