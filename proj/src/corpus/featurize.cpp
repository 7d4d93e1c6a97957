#include "dman/corpus/featurize.hpp"

#include <stdexcept>

#include "dman/corpus/exact_match.hpp"
#include "dman/corpus/text.hpp"

namespace dman {

void featurize(TokenizedSentence& s, const Vocab& words, const TagVocabs& tags, const std::optional<TagRow>& sidecar) {
  s.word_ids.clear();
  s.char_ids.clear();
  for (const auto& t : s.tokens) {
    s.word_ids.push_back(words.id(t));
    s.char_ids.push_back(char_ids(t));
  }
  attach_tags(s, sidecar, tags);
}

namespace {

std::optional<TagRow> sidecar_row(const std::vector<TagRow>* sidecar, std::size_t row) {
  if (!sidecar) return std::nullopt;
  if (row >= sidecar->size()) {
    throw std::invalid_argument("tag sidecar has " + std::to_string(sidecar->size()) + " rows, need row " +
                                std::to_string(row + 1));
  }
  return (*sidecar)[row];
}

}  // namespace

void featurize(NLIExample& ex, const Vocab& words, const TagVocabs& tags, const std::vector<TagRow>* sidecar) {
  featurize(ex.premise, words, tags, sidecar_row(sidecar, 2 * ex.source_index));
  featurize(ex.hypothesis, words, tags, sidecar_row(sidecar, 2 * ex.source_index + 1));
  exact_match(ex.premise, ex.hypothesis);
}

void featurize(MarkerPair& p, const Vocab& words, const TagVocabs& tags) {
  featurize(p.s1, words, tags, std::nullopt);
  featurize(p.s2, words, tags, std::nullopt);
}

void grow_tag_vocabs(TagVocabs& tags, const std::vector<NLIExample>& examples, const std::vector<TagRow>& sidecar) {
  for (const auto& ex : examples) {
    for (std::size_t row : {2 * ex.source_index, 2 * ex.source_index + 1}) {
      if (row >= sidecar.size()) continue;
      for (const auto& t : sidecar[row].pos) tags.pos.add(t);
      for (const auto& t : sidecar[row].ner) tags.ner.add(t);
    }
  }
}

}  // namespace dman
