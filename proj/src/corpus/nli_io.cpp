#include "dman/corpus/nli_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "dman/errors.hpp"

namespace dman {
namespace {

const std::string& require_string(const nlohmann::json& obj, const char* key, const std::string& name,
                                  std::size_t lineno) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw FormatError(name, lineno, std::string("missing or non-string field '") + key + "'");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

NLIReadStats read_nli_jsonl(std::istream& in, const std::string& name, const std::function<void(NLIExample&&)>& sink) {
  NLIReadStats stats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++stats.lines;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(name, lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw FormatError(name, lineno, "expected a JSON object");

    const std::string& gold = require_string(obj, "gold_label", name, lineno);
    if (gold == "-") {
      ++stats.skipped_no_consensus;
      continue;
    }
    auto label = parse_label(gold);
    if (!label) throw FormatError(name, lineno, "unknown gold_label '" + gold + "'");

    auto ann = obj.find("annotator_labels");
    if (ann == obj.end() || !ann->is_array()) throw FormatError(name, lineno, "missing array 'annotator_labels'");
    if (ann->empty()) {
      ++stats.rejected_no_annotators;
      continue;
    }
    NLIExample ex;
    for (const auto& a : *ann) {
      if (!a.is_string()) throw FormatError(name, lineno, "annotator label is not a string");
      ex.annotator_labels.push_back(a.get<std::string>());
    }
    ex.premise = make_sentence(require_string(obj, "sentence1", name, lineno));
    ex.hypothesis = make_sentence(require_string(obj, "sentence2", name, lineno));
    ex.gold = *label;
    ex.source_index = stats.lines - 1;
    for (const char* key : {"sentence1", "sentence2", "gold_label", "annotator_labels"}) obj.erase(key);
    ex.extra = std::move(obj);
    ++stats.accepted;
    sink(std::move(ex));
  }
  return stats;
}

NLIReadStats read_nli_jsonl(const std::string& path, const std::function<void(NLIExample&&)>& sink) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_nli_jsonl(in, path, sink);
}

NLIDataset read_nli_jsonl(const std::string& path) {
  NLIDataset ds;
  ds.stats = read_nli_jsonl(path, [&](NLIExample&& ex) { ds.examples.push_back(std::move(ex)); });
  return ds;
}

nlohmann::json nli_to_json(const NLIExample& ex) {
  nlohmann::json obj = ex.extra.is_object() ? ex.extra : nlohmann::json::object();
  obj["sentence1"] = ex.premise.text;
  obj["sentence2"] = ex.hypothesis.text;
  obj["gold_label"] = std::string(label_name(ex.gold));
  obj["annotator_labels"] = ex.annotator_labels;
  return obj;
}

void write_nli_jsonl(std::ostream& out, const std::vector<NLIExample>& examples) {
  for (const auto& ex : examples) out << nli_to_json(ex).dump() << '\n';
}

void write_nli_jsonl(const std::string& path, const std::vector<NLIExample>& examples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_nli_jsonl(out, examples);
}

}  // namespace dman
