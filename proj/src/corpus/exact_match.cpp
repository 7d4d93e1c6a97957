#include "dman/corpus/exact_match.hpp"

#include <unordered_set>

#include "dman/corpus/text.hpp"

namespace dman {

std::vector<MatchFlags> match_flags(const std::vector<std::string>& s, const std::vector<std::string>& other) {
  std::unordered_set<std::string> exact, lower, lem;
  for (const auto& t : other) {
    exact.insert(t);
    lower.insert(to_lower(t));
    lem.insert(lemma(t));
  }
  std::vector<MatchFlags> flags;
  flags.reserve(s.size());
  for (const auto& t : s) {
    flags.push_back({exact.count(t) != 0, lower.count(to_lower(t)) != 0, lem.count(lemma(t)) != 0});
  }
  return flags;
}

void exact_match(TokenizedSentence& p, TokenizedSentence& h) {
  p.em = match_flags(p.tokens, h.tokens);
  h.em = match_flags(h.tokens, p.tokens);
}

}  // namespace dman
