#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "dman/corpus/embeddings.hpp"
#include "dman/corpus/types.hpp"
#include "dman/rng.hpp"

namespace dman::synth {

inline constexpr std::size_t kCueVariants = 4;

// Pseudo-word lexicon. Every marker owns kCueVariants cue words; the marker
// of a pair, and the class of an NLI example, is determined by its cue.
struct Lexicon {
  std::vector<std::string> nouns;
  std::vector<std::string> verbs;
  std::vector<std::string> fillers;
  std::vector<std::array<std::string, kCueVariants>> cues;  // one row per marker

  std::vector<std::string> all_words() const;
  static Lexicon make(std::uint64_t seed, std::size_t markers = 8);
};

// Markers whose cue signals entailment; the rest signal contradiction.
bool entailing_marker(std::size_t marker);

// S1 = noun verb fillers; S2 = noun cue fillers, cue of the pair's marker.
std::vector<MarkerPair> marker_pairs(const Lexicon& lex, std::size_t n, const std::vector<std::size_t>& variants,
                                     Rng& rng);

// Raw text lines "S1 , marker S2 ." for the extraction pipeline.
std::vector<std::string> marker_text(const Lexicon& lex, std::size_t n, Rng& rng,
                                     const std::vector<std::string>& markers);

// Balanced NLI pairs: neutral when the hypothesis subject differs from the
// premise subject, otherwise entailment / contradiction by the cue's marker.
// Five annotator labels, with the gold label in the majority.
std::vector<NLIExample> nli_examples(const Lexicon& lex, std::size_t n, const std::vector<std::size_t>& variants,
                                     Rng& rng);

// Frozen random vectors for every lexicon word and the punctuation used.
EmbeddingTable embeddings(const Lexicon& lex, std::size_t dim, Rng& rng);

struct Suite {
  Lexicon lexicon;
  EmbeddingTable words;
  std::vector<MarkerPair> dmp_train;
  std::vector<MarkerPair> dmp_val;
  std::vector<NLIExample> nli_train;  // cue variant 0 only
  std::vector<NLIExample> nli_dev;    // unseen cue variants
};

struct SuiteSizes {
  std::size_t dmp_train = 800;
  std::size_t dmp_val = 200;
  std::size_t nli_train = 150;
  std::size_t nli_dev = 300;
  std::size_t word_dim = 16;
};

Suite make_suite(std::uint64_t seed, const SuiteSizes& sizes = {});

}  // namespace dman::synth
