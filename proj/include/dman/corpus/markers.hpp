#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dman/corpus/types.hpp"

namespace dman {

struct MarkerExtractionStats {
  std::size_t sentences = 0;
  std::size_t pairs = 0;
  std::size_t skipped_no_marker = 0;
  std::size_t skipped_multi_marker = 0;
  std::size_t skipped_short_clause = 0;
  std::size_t skipped_no_context = 0;  // sentence-initial marker without a usable previous sentence
};

// Sentences are split at '.', '!', '?' tokens and at line ends; a blank line
// clears the previous-sentence context. Markers match case-insensitively.
MarkerExtractionStats extract_marker_pairs(std::istream& in, const std::vector<std::string>& markers,
                                           const std::function<void(MarkerPair&&)>& sink);
MarkerExtractionStats extract_marker_pairs(const std::string& path, const std::vector<std::string>& markers,
                                           const std::function<void(MarkerPair&&)>& sink);

// TSV columns s1, s2, marker; clauses are space-joined tokens.
void write_marker_tsv(std::ostream& out, const std::vector<MarkerPair>& pairs, const std::vector<std::string>& markers);
void write_marker_tsv(const std::string& path, const std::vector<MarkerPair>& pairs,
                      const std::vector<std::string>& markers);
std::vector<MarkerPair> read_marker_tsv(const std::string& path, const std::vector<std::string>& markers);

struct MarkerStats {
  std::vector<std::string> markers;
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  double percent(std::size_t i) const;
  nlohmann::json to_json() const;
};

MarkerStats marker_stats(const std::vector<MarkerPair>& pairs, const std::vector<std::string>& markers);

}  // namespace dman
