#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dman {

// Whitespace split, then punctuation detached as separate tokens and English
// clitics split off ("don't" -> "do" "n't"). Case is preserved.
std::vector<std::string> tokenize(std::string_view text);

// Splits a token stream after every token made only of '.', '!' or '?'.
std::vector<std::vector<std::string>> split_sentences(const std::vector<std::string>& tokens);

std::string to_lower(std::string_view s);
bool is_punctuation_token(std::string_view token);

// Deterministic suffix-stripping stemmer used as the lemma form.
std::string lemma(std::string_view token);

// Printable ASCII maps to 2..96; everything else is the unknown character.
inline constexpr std::size_t kCharsetSize = 97;
std::vector<std::size_t> char_ids(std::string_view token);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");
std::vector<std::string> split_on(std::string_view s, char sep);

}  // namespace dman
