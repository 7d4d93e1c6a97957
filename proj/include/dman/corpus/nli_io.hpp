#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dman/corpus/types.hpp"

namespace dman {

struct NLIReadStats {
  std::size_t lines = 0;
  std::size_t accepted = 0;
  std::size_t skipped_no_consensus = 0;   // gold_label "-"
  std::size_t rejected_no_annotators = 0;
};

// Streams examples to `sink`. Malformed lines throw FormatError with the line number.
NLIReadStats read_nli_jsonl(std::istream& in, const std::string& name, const std::function<void(NLIExample&&)>& sink);
NLIReadStats read_nli_jsonl(const std::string& path, const std::function<void(NLIExample&&)>& sink);

struct NLIDataset {
  std::vector<NLIExample> examples;
  NLIReadStats stats;
};
NLIDataset read_nli_jsonl(const std::string& path);

nlohmann::json nli_to_json(const NLIExample& ex);
void write_nli_jsonl(std::ostream& out, const std::vector<NLIExample>& examples);
void write_nli_jsonl(const std::string& path, const std::vector<NLIExample>& examples);

}  // namespace dman
