#include "dman/corpus/types.hpp"

#include <stdexcept>

#include "dman/corpus/text.hpp"

namespace dman {

std::string_view label_name(Label l) {
  switch (l) {
    case Label::entailment: return "entailment";
    case Label::neutral: return "neutral";
    case Label::contradiction: return "contradiction";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "entailment") return Label::entailment;
  if (s == "neutral") return Label::neutral;
  if (s == "contradiction") return Label::contradiction;
  return std::nullopt;
}

bool TokenizedSentence::featurized() const {
  return word_ids.size() == tokens.size() && char_ids.size() == tokens.size() && pos_ids.size() == tokens.size() &&
         ner_ids.size() == tokens.size();
}

void TokenizedSentence::check_parallel() const {
  auto check = [&](std::size_t n, const char* what) {
    if (n != 0 && n != tokens.size()) {
      throw std::logic_error(std::string(what) + " has " + std::to_string(n) + " entries for " +
                             std::to_string(tokens.size()) + " tokens");
    }
  };
  check(word_ids.size(), "word_ids");
  check(char_ids.size(), "char_ids");
  check(pos_ids.size(), "pos_ids");
  check(ner_ids.size(), "ner_ids");
  check(em.size(), "em");
}

TokenizedSentence make_sentence(std::string_view text) {
  TokenizedSentence s;
  s.text = std::string(text);
  s.tokens = tokenize(text);
  return s;
}

TokenizedSentence sentence_from_tokens(std::vector<std::string> tokens) {
  TokenizedSentence s;
  s.text = join(tokens);
  s.tokens = std::move(tokens);
  return s;
}

}  // namespace dman
