#include "dman/corpus/tagging.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "dman/corpus/text.hpp"
#include "dman/errors.hpp"

namespace dman {
namespace {

const std::vector<std::string> kPosTags = {"NOUN", "VERB", "ADJ", "ADV", "DET", "PRON", "ADP", "CONJ", "NUM", "PUNCT"};
const std::vector<std::string> kNerTags = {"O", "ENT"};

using WordSet = std::unordered_set<std::string>;

const WordSet kDet = {"a", "an", "the", "this", "that", "these", "those", "some", "every", "each", "any", "no", "another"};
const WordSet kPron = {"i",   "you", "he",  "she",  "it",   "we",    "they",    "me",       "him",      "her",
                       "us",  "them", "his", "its",  "our",  "their", "my",      "your",     "someone",  "something",
                       "one", "who",  "what", "nobody", "everyone"};
const WordSet kAdp = {"in",    "on",     "at",      "of",      "with",   "by",     "for",   "from",  "to",
                      "into",  "onto",   "over",    "under",   "near",   "through", "during", "about", "across",
                      "behind", "inside", "outside", "against", "around", "between", "without", "up", "down"};
const WordSet kConj = {"and", "or",  "but",   "because", "if",   "when", "so",
                       "although", "before", "still", "while", "after", "though", "yet", "nor"};
const WordSet kVerb = {"is",  "are", "was", "were", "be",  "been", "being", "am",   "has",
                       "have", "had", "do",  "does", "did", "can",  "could", "will", "would"};
const WordSet kAdv = {"not", "n't", "very", "also", "too", "never", "always", "often", "here", "there", "now", "then"};
const std::vector<std::string> kAdjSuffixes = {"ous", "ful", "able", "ible", "ive", "less", "ical", "ish"};

bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

bool is_number(const std::string& t) {
  bool digit = false;
  for (unsigned char c : t) {
    if (std::isdigit(c)) {
      digit = true;
    } else if (c != '.' && c != ',' && c != '-') {
      return false;
    }
  }
  return digit;
}

}  // namespace

std::string rule_pos(const std::string& token) {
  if (is_punctuation_token(token)) return "PUNCT";
  if (is_number(token)) return "NUM";
  const std::string w = to_lower(token);
  if (kDet.count(w)) return "DET";
  if (kPron.count(w)) return "PRON";
  if (kAdp.count(w)) return "ADP";
  if (kConj.count(w)) return "CONJ";
  if (kVerb.count(w)) return "VERB";
  if (kAdv.count(w)) return "ADV";
  if (ends_with(w, "ing") || ends_with(w, "ed")) return "VERB";
  if (ends_with(w, "ly")) return "ADV";
  for (const auto& suf : kAdjSuffixes) {
    if (ends_with(w, suf)) return "ADJ";
  }
  return "NOUN";
}

std::string rule_ner(const std::string& token, std::size_t position) {
  const bool cap = !token.empty() && std::isupper(static_cast<unsigned char>(token[0]));
  return position > 0 && cap ? "ENT" : "O";
}

TagRow rule_tags(const std::vector<std::string>& tokens) {
  TagRow row;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    row.pos.push_back(rule_pos(tokens[i]));
    row.ner.push_back(rule_ner(tokens[i], i));
  }
  return row;
}

TagVocabs TagVocabs::with_rule_tags() {
  return TagVocabs{Vocab(kPosTags), Vocab(kNerTags)};
}

std::vector<TagRow> read_tag_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tag sidecar " + path);
  std::vector<TagRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cols = split_on(line, '\t');
    if (cols.size() != 2 && !(line.empty())) {
      throw FormatError(path, lineno, "expected 2 tab-separated columns, got " + std::to_string(cols.size()));
    }
    TagRow row;
    if (!line.empty()) {
      row.pos = split_on(cols[0], ' ');
      row.ner = split_on(cols[1], ' ');
    }
    if (row.pos.size() != row.ner.size()) {
      throw FormatError(path, lineno,
                        "pos has " + std::to_string(row.pos.size()) + " tags, ner has " + std::to_string(row.ner.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_tag_sidecar(const std::string& path, const std::vector<TagRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write tag sidecar " + path);
  for (const auto& r : rows) out << join(r.pos) << '\t' << join(r.ner) << '\n';
}

namespace {

void assign(TokenizedSentence& s, const std::optional<TagRow>& sidecar, TagVocabs* grow, const TagVocabs& vocabs) {
  const TagRow row = sidecar ? *sidecar : rule_tags(s.tokens);
  if (row.pos.size() != s.size() || row.ner.size() != s.size()) {
    throw std::invalid_argument("tag sidecar has " + std::to_string(row.pos.size()) + " tags for " +
                                std::to_string(s.size()) + " tokens");
  }
  s.pos_ids.clear();
  s.ner_ids.clear();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (grow) {
      s.pos_ids.push_back(grow->pos.add(row.pos[i]));
      s.ner_ids.push_back(grow->ner.add(row.ner[i]));
    } else {
      s.pos_ids.push_back(vocabs.pos.id(row.pos[i]));
      s.ner_ids.push_back(vocabs.ner.id(row.ner[i]));
    }
  }
}

}  // namespace

void attach_tags(TokenizedSentence& s, const std::optional<TagRow>& sidecar, TagVocabs& vocabs, bool grow) {
  assign(s, sidecar, grow ? &vocabs : nullptr, vocabs);
}

void attach_tags(TokenizedSentence& s, const std::optional<TagRow>& sidecar, const TagVocabs& vocabs) {
  assign(s, sidecar, nullptr, vocabs);
}

}  // namespace dman
