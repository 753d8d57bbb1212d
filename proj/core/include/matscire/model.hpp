#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "matscire/encoder.hpp"
#include "matscire/pointer_decoder.hpp"
#include "matscire/vocabulary.hpp"
#include "matscire/word_decoder.hpp"

namespace matscire {

enum class DecoderKind { kPointer, kWord };

std::string_view decoder_kind_name(DecoderKind k);  // "pointer" / "word"
DecoderKind parse_decoder_kind(std::string_view name);

struct ModelConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;
  DecoderKind kind = DecoderKind::kPointer;

  std::vector<std::string> problems() const;
  std::string to_json() const;
  static ModelConfig from_json(std::string_view text);
};

// Encoder plus one decoder, their parameters, and the vocabularies they were
// built for. Move-only.
class Model {
 public:
  Model(const ModelConfig& config, Vocabulary vocab, CharVocabulary chars, std::uint64_t seed);
  ~Model();
  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;

  // Builds word and character vocabularies from `train` (min_count 1).
  static Model for_corpus(const ModelConfig& config, std::span<const AnnotatedSentence> train,
                          std::uint64_t seed);

  const ModelConfig& config() const;
  DecoderKind kind() const { return config().kind; }
  const Vocabulary& vocabulary() const;
  const CharVocabulary& chars() const;
  nn::ParameterSet& params();
  const nn::ParameterSet& params() const;
  const Encoder& encoder() const;
  Encoder& encoder();
  // Null unless the model has that decoder kind.
  const PointerDecoder* pointer_decoder() const;
  const WordDecoder* word_decoder() const;

  // Training loss for one sentence; dropout is applied when `rng` is given.
  nn::Var loss(nn::Graph& g, const AnnotatedSentence& example, Rng* rng = nullptr,
               bool teacher_forcing = true) const;

  std::vector<Triplet> predict(const Sentence& s) const;

  // Writes the checkpoint at `path` and its vocabulary at `path` + ".vocab".
  void save(const std::filesystem::path& path) const;
  // Reads both files and checks the vocabulary hash recorded in the
  // checkpoint; with `expected`, also checks it against that vocabulary.
  static Model load(const std::filesystem::path& path, const Vocabulary* expected = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::filesystem::path vocabulary_path(const std::filesystem::path& checkpoint);

// Header fields of a checkpoint without loading the tensors.
struct CheckpointInfo {
  int version = 0;
  DecoderKind kind = DecoderKind::kPointer;
  ModelConfig config;
  std::string vocab_hash;
  std::size_t num_parameters = 0;
};
CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

}  // namespace matscire
