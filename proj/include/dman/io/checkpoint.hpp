#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dman/autodiff/tensor.hpp"

namespace dman {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Binary layout, all integers little-endian:
//   "DMANCKPT" u32 version u32 hidden
//   u32 n_markers { str }            str = u32 length + bytes
//   str config_json
//   u32 n_tables { str name, u32 n { str } }
//   u32 n_tensors { str name, u32 rank, u64 extents[rank], f64 values[numel] }
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::uint32_t version = kVersion;
  std::uint32_t hidden = 0;
  std::vector<std::string> markers;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::vector<std::string>> tables;
  NamedTensors tensors;

  bool has(const std::string& name) const;
  // Throws std::out_of_range naming the missing tensor.
  const Tensor& tensor(const std::string& name) const;
  void add(const std::string& name, const Tensor& t) { tensors.emplace_back(name, t); }
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// Copies values of `source` into `target` after checking the shape; the
// target keeps its identity (and requires_grad).
void assign_values(Tensor& target, const Tensor& source, const std::string& name);

}  // namespace dman
