#include "dman/corpus/markers.hpp"

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "dman/corpus/text.hpp"
#include "dman/errors.hpp"

namespace dman {
namespace {

std::optional<std::size_t> marker_index(const std::string& token, const std::vector<std::string>& markers) {
  const std::string lower = to_lower(token);
  for (std::size_t i = 0; i < markers.size(); ++i) {
    if (markers[i] == lower) return i;
  }
  return std::nullopt;
}

std::size_t count_markers(const std::vector<std::string>& tokens, const std::vector<std::string>& markers) {
  std::size_t n = 0;
  for (const auto& t : tokens) n += marker_index(t, markers).has_value();
  return n;
}

}  // namespace

MarkerExtractionStats extract_marker_pairs(std::istream& in, const std::vector<std::string>& markers,
                                           const std::function<void(MarkerPair&&)>& sink) {
  std::vector<std::string> lowered;
  for (const auto& m : markers) lowered.push_back(to_lower(m));

  MarkerExtractionStats stats;
  std::optional<std::vector<std::string>> previous;
  std::string line;
  while (std::getline(in, line)) {
    const auto tokens = tokenize(line);
    if (tokens.empty()) {
      previous.reset();
      continue;
    }
    for (auto& sentence : split_sentences(tokens)) {
      ++stats.sentences;
      std::size_t pos = 0;
      std::size_t found = 0;
      for (std::size_t i = 0; i < sentence.size(); ++i) {
        if (marker_index(sentence[i], lowered)) {
          pos = i;
          ++found;
        }
      }
      if (found == 0) {
        ++stats.skipped_no_marker;
      } else if (found > 1) {
        ++stats.skipped_multi_marker;
      } else {
        std::vector<std::string> left, right(sentence.begin() + static_cast<std::ptrdiff_t>(pos) + 1, sentence.end());
        bool ok = true;
        if (pos == 0) {
          if (!previous || count_markers(*previous, lowered) != 0) {
            ++stats.skipped_no_context;
            ok = false;
          } else {
            left = *previous;
          }
        } else {
          left.assign(sentence.begin(), sentence.begin() + static_cast<std::ptrdiff_t>(pos));
        }
        if (ok && (left.size() < 2 || right.size() < 2)) {
          ++stats.skipped_short_clause;
          ok = false;
        }
        if (ok) {
          MarkerPair pair;
          pair.marker = *marker_index(sentence[pos], lowered);
          pair.s1 = sentence_from_tokens(std::move(left));
          pair.s2 = sentence_from_tokens(std::move(right));
          ++stats.pairs;
          sink(std::move(pair));
        }
      }
      previous = std::move(sentence);
    }
  }
  return stats;
}

MarkerExtractionStats extract_marker_pairs(const std::string& path, const std::vector<std::string>& markers,
                                           const std::function<void(MarkerPair&&)>& sink) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return extract_marker_pairs(in, markers, sink);
}

void write_marker_tsv(std::ostream& out, const std::vector<MarkerPair>& pairs, const std::vector<std::string>& markers) {
  for (const auto& p : pairs) {
    if (p.marker >= markers.size()) throw std::out_of_range("marker id " + std::to_string(p.marker));
    out << join(p.s1.tokens) << '\t' << join(p.s2.tokens) << '\t' << markers[p.marker] << '\n';
  }
}

void write_marker_tsv(const std::string& path, const std::vector<MarkerPair>& pairs,
                      const std::vector<std::string>& markers) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_marker_tsv(out, pairs, markers);
}

std::vector<MarkerPair> read_marker_tsv(const std::string& path, const std::vector<std::string>& markers) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<MarkerPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split_on(line, '\t');
    if (cols.size() != 3) throw FormatError(path, lineno, "expected 3 columns, got " + std::to_string(cols.size()));
    if (cols[0].empty() || cols[1].empty()) throw FormatError(path, lineno, "empty clause");
    std::optional<std::size_t> m;
    for (std::size_t i = 0; i < markers.size(); ++i) {
      if (markers[i] == cols[2]) m = i;
    }
    if (!m) throw FormatError(path, lineno, "unknown marker '" + cols[2] + "'");
    MarkerPair p;
    p.s1 = sentence_from_tokens(split_on(cols[0], ' '));
    p.s2 = sentence_from_tokens(split_on(cols[1], ' '));
    p.marker = *m;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

double MarkerStats::percent(std::size_t i) const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(counts.at(i)) / static_cast<double>(total);
}

nlohmann::json MarkerStats::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < markers.size(); ++i) {
    rows.push_back({{"marker", markers[i]}, {"count", counts[i]}, {"percent", percent(i)}});
  }
  return {{"total", total}, {"markers", rows}};
}

MarkerStats marker_stats(const std::vector<MarkerPair>& pairs, const std::vector<std::string>& markers) {
  MarkerStats s{markers, std::vector<std::size_t>(markers.size(), 0), pairs.size()};
  for (const auto& p : pairs) s.counts.at(p.marker) += 1;
  return s;
}

}  // namespace dman
