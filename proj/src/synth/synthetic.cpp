#include "dman/synth/synthetic.hpp"

#include <set>
#include <stdexcept>

#include "dman/corpus/text.hpp"

namespace dman::synth {
namespace {

constexpr std::string_view kConsonants = "bdfgkmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string pseudo_word(Rng& rng) {
  const std::size_t syllables = 2 + rng.below(2);
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w += kConsonants[rng.below(kConsonants.size())];
    w += kVowels[rng.below(kVowels.size())];
  }
  return w;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.below(v.size())];
}

std::vector<std::string> fillers(const Lexicon& lex, Rng& rng, std::size_t lo, std::size_t hi) {
  const std::size_t n = lo + rng.below(hi - lo + 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pick(lex.fillers, rng));
  return out;
}

std::vector<std::string> first_clause(const Lexicon& lex, const std::string& noun, Rng& rng) {
  std::vector<std::string> s = {noun, pick(lex.verbs, rng)};
  for (auto& f : fillers(lex, rng, 1, 3)) s.push_back(std::move(f));
  return s;
}

std::vector<std::string> second_clause(const Lexicon& lex, const std::string& noun, const std::string& cue, Rng& rng) {
  std::vector<std::string> s = {noun, cue};
  for (auto& f : fillers(lex, rng, 1, 2)) s.push_back(std::move(f));
  return s;
}

}  // namespace

std::vector<std::string> Lexicon::all_words() const {
  std::vector<std::string> out;
  out.insert(out.end(), nouns.begin(), nouns.end());
  out.insert(out.end(), verbs.begin(), verbs.end());
  out.insert(out.end(), fillers.begin(), fillers.end());
  for (const auto& row : cues) out.insert(out.end(), row.begin(), row.end());
  return out;
}

Lexicon Lexicon::make(std::uint64_t seed, std::size_t markers) {
  Rng rng = Rng(seed).substream("synth.lexicon");
  std::set<std::string> used;
  auto fresh = [&] {
    while (true) {
      auto w = pseudo_word(rng);
      if (used.insert(w).second) return w;
    }
  };
  Lexicon lex;
  for (int i = 0; i < 24; ++i) lex.nouns.push_back(fresh());
  for (int i = 0; i < 12; ++i) lex.verbs.push_back(fresh());
  for (int i = 0; i < 16; ++i) lex.fillers.push_back(fresh());
  lex.cues.resize(markers);
  for (auto& row : lex.cues) {
    for (auto& c : row) c = fresh();
  }
  return lex;
}

bool entailing_marker(std::size_t marker) {
  // because, when, so, before
  return marker == 1 || marker == 3 || marker == 4 || marker == 6;
}

std::vector<MarkerPair> marker_pairs(const Lexicon& lex, std::size_t n, const std::vector<std::size_t>& variants,
                                     Rng& rng) {
  std::vector<MarkerPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    MarkerPair p;
    p.marker = rng.below(lex.cues.size());
    const auto& cue = lex.cues[p.marker][pick(variants, rng)];
    p.s1 = sentence_from_tokens(first_clause(lex, pick(lex.nouns, rng), rng));
    p.s2 = sentence_from_tokens(second_clause(lex, pick(lex.nouns, rng), cue, rng));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::string> marker_text(const Lexicon& lex, std::size_t n, Rng& rng,
                                     const std::vector<std::string>& markers) {
  if (markers.size() != lex.cues.size()) throw std::invalid_argument("marker list does not match the lexicon");
  std::vector<std::string> lines;
  std::vector<std::size_t> all(kCueVariants);
  for (std::size_t j = 0; j < kCueVariants; ++j) all[j] = j;
  for (const auto& p : marker_pairs(lex, n, all, rng)) {
    lines.push_back(join(p.s1.tokens) + " , " + markers[p.marker] + " " + join(p.s2.tokens) + " .");
  }
  return lines;
}

std::vector<NLIExample> nli_examples(const Lexicon& lex, std::size_t n, const std::vector<std::size_t>& variants,
                                     Rng& rng) {
  std::vector<std::size_t> ent, con;
  for (std::size_t m = 0; m < lex.cues.size(); ++m) (entailing_marker(m) ? ent : con).push_back(m);
  std::vector<NLIExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<Label>(i % kNumLabels);
    const std::string& subj = pick(lex.nouns, rng);
    std::string hyp_subj = subj;
    std::size_t marker;
    if (label == Label::neutral) {
      while (hyp_subj == subj) hyp_subj = pick(lex.nouns, rng);
      marker = rng.below(lex.cues.size());
    } else {
      marker = label == Label::entailment ? pick(ent, rng) : pick(con, rng);
    }
    const auto& cue = lex.cues[marker][pick(variants, rng)];
    auto prem = first_clause(lex, subj, rng);
    prem.push_back(".");
    auto hyp = second_clause(lex, hyp_subj, cue, rng);
    if (label == Label::neutral) {
      const std::set<std::string> seen(prem.begin(), prem.end());
      for (std::size_t k = 2; k < hyp.size(); ++k) {
        while (seen.count(hyp[k])) hyp[k] = pick(lex.fillers, rng);
      }
    }
    hyp.push_back(".");

    NLIExample ex;
    ex.premise = sentence_from_tokens(std::move(prem));
    ex.hypothesis = sentence_from_tokens(std::move(hyp));
    ex.gold = label;
    ex.source_index = i;
    const std::size_t agree = 3 + rng.below(3);
    for (std::size_t k = 0; k < 5; ++k) {
      Label l = label;
      if (k >= agree) l = static_cast<Label>((static_cast<std::size_t>(label) + 1 + rng.below(2)) % kNumLabels);
      ex.annotator_labels.emplace_back(label_name(l));
    }
    out.push_back(std::move(ex));
  }
  rng.shuffle(out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].source_index = i;
  return out;
}

EmbeddingTable embeddings(const Lexicon& lex, std::size_t dim, Rng& rng) {
  Vocab v(lex.all_words());
  v.add(".");
  v.add(",");
  return random_embeddings(v, dim, 1.0, rng, false);
}

Suite make_suite(std::uint64_t seed, const SuiteSizes& sizes) {
  Rng root(seed);
  Suite s;
  s.lexicon = Lexicon::make(seed);
  Rng emb_rng = root.substream("synth.embeddings");
  s.words = embeddings(s.lexicon, sizes.word_dim, emb_rng);
  Rng dmp_rng = root.substream("synth.dmp");
  const std::vector<std::size_t> all = {0, 1, 2, 3};
  auto pairs = marker_pairs(s.lexicon, sizes.dmp_train + sizes.dmp_val, all, dmp_rng);
  s.dmp_train.assign(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(sizes.dmp_train));
  s.dmp_val.assign(pairs.begin() + static_cast<std::ptrdiff_t>(sizes.dmp_train), pairs.end());
  Rng nli_rng = root.substream("synth.nli");
  s.nli_train = nli_examples(s.lexicon, sizes.nli_train, {0}, nli_rng);
  s.nli_dev = nli_examples(s.lexicon, sizes.nli_dev, {1, 2, 3}, nli_rng);
  return s;
}

}  // namespace dman::synth
