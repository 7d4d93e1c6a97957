#include "dman/corpus/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dman/errors.hpp"

namespace dman {

void EmbeddingTable::validate() const {
  if (matrix.rank() != 2 || matrix.dim(0) != vocab.size() || matrix.dim(1) == 0) {
    throw std::logic_error("embedding matrix " + shape_str(matrix.shape()) + " does not match vocab of " +
                           std::to_string(vocab.size()));
  }
}

namespace {

struct FileRows {
  std::vector<std::string> tokens;
  std::vector<Real> values;  // row-major
  std::size_t dim = 0;
};

FileRows read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings " + path);
  FileRows rows;
  std::string line;
  std::size_t lineno = 0;
  std::vector<Real> row;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    row.clear();
    std::string field;
    while (ss >> field) {
      double v = 0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw FormatError(path, lineno, "token '" + token + "': value '" + field + "' is not a finite number");
      }
      row.push_back(static_cast<Real>(v));
    }
    if (row.empty()) throw FormatError(path, lineno, "token '" + token + "' has no values");
    if (rows.dim == 0) rows.dim = row.size();
    if (row.size() != rows.dim) {
      throw FormatError(path, lineno,
                        "expected " + std::to_string(rows.dim) + " values, got " + std::to_string(row.size()));
    }
    rows.tokens.push_back(token);
    rows.values.insert(rows.values.end(), row.begin(), row.end());
  }
  if (rows.tokens.empty()) throw FormatError(path + ": no embedding rows");
  return rows;
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path, VocabMode mode, const Vocab* target) {
  if (mode == VocabMode::project_onto && target == nullptr) {
    throw std::invalid_argument("project_onto requires a target vocabulary");
  }
  const FileRows rows = read_rows(path);
  const std::size_t d = rows.dim;
  const std::size_t n = rows.tokens.size();

  std::vector<Real> mean(d, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += rows.values[r * d + j];
  }
  for (auto& m : mean) m /= static_cast<Real>(n);

  EmbeddingTable table;
  if (mode == VocabMode::build_from_file) {
    for (const auto& t : rows.tokens) table.vocab.add(t);
  } else {
    std::unordered_map<std::string, bool> in_file;
    for (const auto& t : rows.tokens) in_file.emplace(t, true);
    for (std::size_t id = 2; id < target->size(); ++id) {
      if (in_file.count(target->token(id))) table.vocab.add(target->token(id));
    }
  }
  const std::size_t v = table.vocab.size();
  std::vector<Real> m(v * d, 0);
  for (std::size_t j = 0; j < d; ++j) m[kUnkId * d + j] = mean[j];
  std::vector<bool> filled(v, false);
  for (std::size_t r = 0; r < n; ++r) {
    if (!table.vocab.contains(rows.tokens[r])) continue;
    const std::size_t id = table.vocab.id(rows.tokens[r]);
    if (id < 2 || filled[id]) continue;  // first occurrence wins
    filled[id] = true;
    std::copy_n(rows.values.begin() + static_cast<std::ptrdiff_t>(r * d), d, m.begin() + static_cast<std::ptrdiff_t>(id * d));
  }
  table.matrix = Tensor({v, d}, std::move(m));
  return table;
}

void write_embeddings(const std::string& path, const EmbeddingTable& table) {
  table.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write embeddings " + path);
  const std::size_t d = table.dim();
  const auto vals = table.matrix.values();
  char buf[32];
  for (std::size_t id = 2; id < table.rows(); ++id) {
    out << table.vocab.token(id);
    for (std::size_t j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, " %.17g", static_cast<double>(vals[id * d + j]));
      out << buf;
    }
    out << '\n';
  }
}

EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t dim, Real range, Rng& rng, bool trainable) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
  std::vector<Real> m(vocab.size() * dim, 0);
  for (std::size_t i = dim; i < m.size(); ++i) m[i] = static_cast<Real>(rng.uniform(-range, range));
  return EmbeddingTable{vocab, Tensor({vocab.size(), dim}, std::move(m), trainable), trainable};
}

EmbeddingTable extend_embeddings(const EmbeddingTable& table, const std::vector<std::string>& extra, Real range,
                                 Rng& rng) {
  table.validate();
  EmbeddingTable out;
  out.vocab = table.vocab;
  out.trainable = table.trainable;
  for (const auto& t : extra) out.vocab.add(t);
  const std::size_t d = table.dim();
  std::vector<Real> m(table.matrix.values().begin(), table.matrix.values().end());
  m.resize(out.vocab.size() * d);
  for (std::size_t i = table.rows() * d; i < m.size(); ++i) m[i] = static_cast<Real>(rng.uniform(-range, range));
  out.matrix = Tensor({out.vocab.size(), d}, std::move(m), table.trainable);
  return out;
}

}  // namespace dman
