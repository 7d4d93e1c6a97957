#include "dman/io/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dman/autodiff/ops.hpp"
#include "dman/errors.hpp"

namespace dman {
namespace {

constexpr char kMagic[8] = {'D', 'M', 'A', 'N', 'C', 'K', 'P', 'T'};

template <typename T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    v = to_le(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in_) throw FormatError(path_ + ": truncated checkpoint");
    return to_le(v);
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    if (n > (1u << 30)) throw FormatError(path_ + ": string length out of range");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (!in_) throw FormatError(path_ + ": truncated checkpoint");
    return s;
  }

 private:
  std::istream& in_;
  std::string path_;
};

}  // namespace

bool Checkpoint::has(const std::string& name) const {
  return std::any_of(tensors.begin(), tensors.end(), [&](const auto& p) { return p.first == name; });
}

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw std::out_of_range("checkpoint has no tensor '" + name + "'");
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path);
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.pod(ckpt.version);
  w.pod(ckpt.hidden);
  w.pod(static_cast<std::uint32_t>(ckpt.markers.size()));
  for (const auto& m : ckpt.markers) w.str(m);
  w.str(ckpt.config.dump());
  w.pod(static_cast<std::uint32_t>(ckpt.tables.size()));
  for (const auto& [name, entries] : ckpt.tables) {
    w.str(name);
    w.pod(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) w.str(e);
  }
  w.pod(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    w.str(name);
    w.pod(static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) w.pod(static_cast<std::uint64_t>(e));
    for (auto v : t.values()) w.pod(static_cast<double>(v));
  }
  out.flush();
  if (!out) throw IoError("write failed for checkpoint " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw FormatError(path + ": not a checkpoint file");
  Reader r(in, path);
  Checkpoint ckpt;
  ckpt.version = r.pod<std::uint32_t>();
  if (ckpt.version != Checkpoint::kVersion) {
    throw FormatError(path + ": unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  ckpt.hidden = r.pod<std::uint32_t>();
  const auto n_markers = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_markers; ++i) ckpt.markers.push_back(r.str());
  try {
    ckpt.config = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": bad config block: " + e.what());
  }
  const auto n_tables = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_tables; ++i) {
    auto name = r.str();
    const auto n = r.pod<std::uint32_t>();
    std::vector<std::string> entries;
    entries.reserve(n);
    for (std::uint32_t j = 0; j < n; ++j) entries.push_back(r.str());
    ckpt.tables.emplace(std::move(name), std::move(entries));
  }
  const auto n_tensors = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    auto name = r.str();
    const auto rank = r.pod<std::uint32_t>();
    if (rank > 8) throw FormatError(path + ": tensor '" + name + "' has rank " + std::to_string(rank));
    Shape shape;
    std::size_t numel = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      shape.push_back(static_cast<std::size_t>(r.pod<std::uint64_t>()));
      numel *= shape.back();
    }
    if (numel > (std::size_t{1} << 33)) throw FormatError(path + ": tensor '" + name + "' too large");
    std::vector<Real> values(numel);
    for (auto& v : values) v = static_cast<Real>(r.pod<double>());
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return ckpt;
}

void assign_values(Tensor& target, const Tensor& source, const std::string& name) {
  if (target.shape() != source.shape()) {
    throw DimensionError("tensor '" + name + "': expected " + shape_str(target.shape()) + ", checkpoint has " +
                         shape_str(source.shape()));
  }
  auto dst = target.mutable_values();
  auto src = source.values();
  std::copy(src.begin(), src.end(), dst.begin());
}

}  // namespace dman
