#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dman {

inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kUnkId = 1;
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";

// Token <-> id map with PAD = 0 and UNK = 1 reserved.
class Vocab {
 public:
  Vocab();
  explicit Vocab(const std::vector<std::string>& tokens);

  // Returns the existing id if present.
  std::size_t add(const std::string& token);
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  // UNK for unknown tokens.
  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const;
  std::size_t size() const { return tokens_.size(); }
  // All entries including the two reserved ones, in id order.
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace dman
