#pragma once

#include <cstddef>
#include <vector>

#include "dman/corpus/types.hpp"

namespace dman {

// total[k]: examples with exactly k annotator labels.
// correct[k]: examples whose gold label occurs exactly k times among them.
// Both are indexed 1..max_k; index 0 is unused except correct[0].
struct LabelStats {
  std::size_t accepted = 0;
  std::size_t max_k = 5;
  std::vector<std::size_t> total;
  std::vector<std::size_t> correct;
  nlohmann::json to_json() const;
};

LabelStats label_stats(const std::vector<NLIExample>& examples);

}  // namespace dman
