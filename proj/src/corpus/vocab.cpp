#include "dman/corpus/vocab.hpp"

#include <stdexcept>

namespace dman {

Vocab::Vocab() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
}

Vocab::Vocab(const std::vector<std::string>& tokens) : Vocab() {
  for (const auto& t : tokens) add(t);
}

std::size_t Vocab::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const std::size_t id = tokens_.size();
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::size_t Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token(std::size_t id) const {
  if (id >= tokens_.size()) throw std::out_of_range("vocab id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

}  // namespace dman
