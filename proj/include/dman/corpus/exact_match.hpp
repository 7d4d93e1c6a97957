#pragma once

#include <vector>

#include "dman/corpus/types.hpp"

namespace dman {

// Flags for each token of `s` against the token set of `other`.
std::vector<MatchFlags> match_flags(const std::vector<std::string>& s, const std::vector<std::string>& other);

// Fills p.em and h.em.
void exact_match(TokenizedSentence& p, TokenizedSentence& h);

}  // namespace dman
