#pragma once

#include <optional>
#include <vector>

#include "dman/corpus/tagging.hpp"
#include "dman/corpus/types.hpp"
#include "dman/corpus/vocab.hpp"

namespace dman {

// Word ids, char ids and tag ids for one sentence.
void featurize(TokenizedSentence& s, const Vocab& words, const TagVocabs& tags, const std::optional<TagRow>& sidecar);

// Featurizes both sides and computes exact-match flags. `sidecar`, when given,
// is indexed by NLIExample::source_index.
void featurize(NLIExample& ex, const Vocab& words, const TagVocabs& tags, const std::vector<TagRow>* sidecar);
void featurize(MarkerPair& p, const Vocab& words, const TagVocabs& tags);

// Adds every sidecar tag that appears for the given examples to `tags`.
void grow_tag_vocabs(TagVocabs& tags, const std::vector<NLIExample>& examples, const std::vector<TagRow>& sidecar);

}  // namespace dman
