#include "dman/corpus/label_stats.hpp"

#include <algorithm>

namespace dman {

LabelStats label_stats(const std::vector<NLIExample>& examples) {
  LabelStats s;
  s.accepted = examples.size();
  for (const auto& ex : examples) s.max_k = std::max(s.max_k, ex.annotator_labels.size());
  s.total.assign(s.max_k + 1, 0);
  s.correct.assign(s.max_k + 1, 0);
  for (const auto& ex : examples) {
    const auto gold = label_name(ex.gold);
    const auto hits = static_cast<std::size_t>(std::count(ex.annotator_labels.begin(), ex.annotator_labels.end(), gold));
    s.total[ex.annotator_labels.size()] += 1;
    s.correct[hits] += 1;
  }
  return s;
}

nlohmann::json LabelStats::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 1; k <= max_k; ++k) rows.push_back({{"k", k}, {"total", total[k]}, {"correct", correct[k]}});
  return {{"accepted", accepted}, {"rows", rows}, {"gold_absent", correct[0]}};
}

}  // namespace dman
