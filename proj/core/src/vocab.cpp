#include "refsel/vocab.hpp"

#include <algorithm>

#include "refsel/errors.hpp"

namespace refsel {

Vocabulary Vocabulary::fit(const CorpusSplit& train) {
  std::map<std::string, std::size_t> counts;
  for (const Document& doc : train.documents)
    for (const Token& t : doc.tokens) ++counts[t.surface];

  std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> tokens = {"<pad>", "<unk>"};
  tokens.reserve(ordered.size() + 2);
  for (auto& [token, count] : ordered)
    if (token != "<pad>" && token != "<unk>") tokens.push_back(token);
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> id_to_token) {
  if (id_to_token.size() < 2 || id_to_token[0] != "<pad>" || id_to_token[1] != "<unk>")
    throw ValidationError("vocabulary must start with <pad>, <unk>");
  Vocabulary v;
  v.id_to_token_ = std::move(id_to_token);
  for (std::size_t i = 0; i < v.id_to_token_.size(); ++i) {
    if (!v.token_to_id_.emplace(v.id_to_token_[i], static_cast<int>(i)).second)
      throw ValidationError("duplicate vocabulary token: " + v.id_to_token_[i]);
  }
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

}  // namespace refsel
