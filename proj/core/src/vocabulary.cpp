#include "matscire/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "matscire/hashing.hpp"
#include "matscire/tokenizer.hpp"

namespace matscire {

Vocabulary::Vocabulary() {
  bot_ = add(kBot);
  eot_ = add(kEot);
  unk_ = add(kUnk);
  tuple_sep_ = add(kTupleSeparator);
  triplet_sep_ = add(kTripletSeparator);
  for (Relation r : kPropertyRelations) relation_ids_.push_back(add(relation_name(r)));
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  if (tokens.size() < static_cast<std::size_t>(v.size())) {
    throw Error("vocabulary file is missing the special tokens");
  }
  for (int i = 0; i < v.size(); ++i) {
    if (tokens[i] != v.token(i)) {
      throw Error("vocabulary entry " + std::to_string(i) + " is '" + tokens[i] +
                  "', expected '" + v.token(i) + "'");
    }
  }
  for (std::size_t i = v.size(); i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw Error("duplicate vocabulary entry '" + tokens[i] + "'");
    v.add(tokens[i]);
  }
  return v;
}

int Vocabulary::add(std::string_view token) {
  auto it = token_to_id_.find(std::string(token));
  if (it != token_to_id_.end()) return it->second;
  const int id = size();
  token_to_id_.emplace(std::string(token), id);
  id_to_token_.emplace_back(token);
  return id;
}

int Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? unk_ : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw Error("vocabulary id " + std::to_string(id) + " out of range");
  return id_to_token_[static_cast<std::size_t>(id)];
}

int Vocabulary::relation_id(Relation r) const {
  if (r == Relation::kEot) return eot_;
  return relation_ids_.at(static_cast<std::size_t>(relation_index(r)));
}

bool Vocabulary::is_relation_id(int id) const {
  return std::find(relation_ids_.begin(), relation_ids_.end(), id) != relation_ids_.end();
}

std::string Vocabulary::hash() const {
  std::string blob;
  for (const auto& t : id_to_token_) {
    blob += t;
    blob.push_back('\n');
  }
  return sha256_hex(blob);
}

std::vector<int> Vocabulary::ids(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

Vocabulary build_vocabulary(std::span<const Sentence> sentences, int min_count) {
  if (min_count < 1) throw Error("min_count must be at least 1");
  if (sentences.empty()) throw Error("cannot build a vocabulary from an empty corpus");
  std::map<std::string, int> counts;
  std::vector<std::string> order;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      if (counts[t]++ == 0) order.push_back(t);
    }
  }
  Vocabulary v;
  for (const auto& t : order) {
    if (counts[t] >= min_count) v.add(t);
  }
  return v;
}

CharVocabulary CharVocabulary::build(std::span<const Sentence> sentences) {
  std::vector<char32_t> chars;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      for (char32_t c : utf8_code_points(t)) chars.push_back(c);
    }
  }
  std::sort(chars.begin(), chars.end());
  chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
  return from_code_points(chars);
}

CharVocabulary CharVocabulary::from_code_points(const std::vector<char32_t>& chars) {
  CharVocabulary v;
  v.chars_ = chars;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    v.index_.emplace(chars[i], static_cast<int>(i) + 2);
  }
  return v;
}

int CharVocabulary::id(char32_t c) const {
  auto it = index_.find(c);
  return it == index_.end() ? kUnknown : it->second;
}

std::vector<int> CharVocabulary::ids(std::string_view token) const {
  std::vector<int> out;
  for (char32_t c : utf8_code_points(token)) out.push_back(id(c));
  return out;
}

}  // namespace matscire
