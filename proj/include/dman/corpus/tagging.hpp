#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dman/corpus/types.hpp"
#include "dman/corpus/vocab.hpp"

namespace dman {

// One sidecar row: tags for one sentence.
struct TagRow {
  std::vector<std::string> pos;
  std::vector<std::string> ner;
};

// TSV with columns pos_tags, ner_tags (space-joined), one row per sentence.
std::vector<TagRow> read_tag_sidecar(const std::string& path);
void write_tag_sidecar(const std::string& path, const std::vector<TagRow>& rows);

std::string rule_pos(const std::string& token);
// Capitalized token at position > 0 is an entity.
std::string rule_ner(const std::string& token, std::size_t position);
TagRow rule_tags(const std::vector<std::string>& tokens);

struct TagVocabs {
  Vocab pos;
  Vocab ner;
  // Seeded with every tag the rule tagger can emit.
  static TagVocabs with_rule_tags();
};

// Assigns pos_ids / ner_ids. With grow = true unseen sidecar tags are added to
// the vocabularies, otherwise they map to UNK.
void attach_tags(TokenizedSentence& s, const std::optional<TagRow>& sidecar, TagVocabs& vocabs, bool grow);
void attach_tags(TokenizedSentence& s, const std::optional<TagRow>& sidecar, const TagVocabs& vocabs);

}  // namespace dman
