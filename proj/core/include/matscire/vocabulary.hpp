#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "matscire/types.hpp"

namespace matscire {

// Bijective token <-> id map shared by the encoder and the word decoder.
//
// Ids are dense from 0. The special tokens come first in a fixed order
// (BOT, EOT, UNK, '|', ';', the five relation names), followed by corpus
// tokens in order of first appearance.
class Vocabulary {
 public:
  static constexpr std::string_view kBot = "<BOT>";
  static constexpr std::string_view kEot = "<EOT>";
  static constexpr std::string_view kUnk = "<UNK>";
  static constexpr std::string_view kTupleSeparator = "|";
  static constexpr std::string_view kTripletSeparator = ";";

  Vocabulary();

  // Rebuilds a vocabulary from an id-ordered token list (e.g. a saved file).
  // Throws if the list is not a valid vocabulary.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(id_to_token_.size()); }

  // Adds `token` if absent; returns its id.
  int add(std::string_view token);

  // Id of `token`, or unk() when it is not in the vocabulary.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;

  int bot() const { return bot_; }
  int eot() const { return eot_; }
  int unk() const { return unk_; }
  int tuple_separator() const { return tuple_sep_; }
  int triplet_separator() const { return triplet_sep_; }
  int relation_id(Relation r) const;
  bool is_relation_id(int id) const;

  const std::vector<std::string>& tokens() const { return id_to_token_; }

  // SHA-256 (hex) over the id-ordered token list.
  std::string hash() const;

  std::vector<int> ids(std::span<const std::string> tokens) const;

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
  int bot_ = -1, eot_ = -1, unk_ = -1, tuple_sep_ = -1, triplet_sep_ = -1;
  std::vector<int> relation_ids_;
};

// Vocabulary over every token with corpus frequency >= min_count plus the
// special tokens. Throws on an empty corpus or min_count < 1.
Vocabulary build_vocabulary(std::span<const Sentence> sentences, int min_count = 1);

// Character inventory used by the character-level encoder features.
class CharVocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;

  CharVocabulary() = default;
  static CharVocabulary build(std::span<const Sentence> sentences);
  static CharVocabulary from_code_points(const std::vector<char32_t>& chars);

  int size() const { return static_cast<int>(chars_.size()) + 2; }
  int id(char32_t c) const;
  std::vector<int> ids(std::string_view token) const;
  const std::vector<char32_t>& code_points() const { return chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, int> index_;
};

}  // namespace matscire
