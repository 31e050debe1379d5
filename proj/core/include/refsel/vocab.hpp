#pragma once

#include <map>
#include <string>
#include <vector>

#include "refsel/corpus.hpp"

namespace refsel {

// Token inventory fitted on the training split only; dev/test
// out-of-vocabulary tokens map to UNK. Entity labels are atomic tokens.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;

  static Vocabulary fit(const CorpusSplit& train);
  static Vocabulary from_tokens(std::vector<std::string> id_to_token);

  int id(const std::string& token) const;  // UNK for unknown tokens
  bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }
  const std::string& token(int id) const { return id_to_token_.at(id); }
  int size() const { return static_cast<int>(id_to_token_.size()); }
  int content_size() const { return size() - 2; }  // excluding PAD/UNK

  const std::vector<std::string>& tokens() const { return id_to_token_; }

 private:
  std::vector<std::string> id_to_token_;
  std::map<std::string, int> token_to_id_;
};

}  // namespace refsel
