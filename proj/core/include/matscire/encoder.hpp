#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "matscire/nn/layers.hpp"
#include "matscire/types.hpp"
#include "matscire/vocabulary.hpp"

namespace matscire {

struct EncoderConfig {
  int word_dim = 100;         // D_wv
  int char_dim = 25;          // D_ch
  int char_feature_dim = 50;  // filters of the character convolution
  int char_window = 3;
  int hidden_dim = 300;       // D_h; each direction gets hidden_dim / 2
  double dropout = 0.5;
  std::string provider = "builtin";

  bool builtin() const { return provider == "builtin"; }
  // Every problem with the configuration; empty when valid.
  std::vector<std::string> problems() const;
  void validate() const;
};

// Per-token contextual vectors, one row per (possibly padded) position.
struct SentenceEncoding {
  Eigen::MatrixXd vectors;  // n_pad x D_e
  std::vector<bool> mask;   // true on real tokens
  int length = 0;

  int padded_length() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
};

// Pretrained contextual encoders plug in here. encode() returns one row per
// subword unit and, for each row, the whitespace token it belongs to.
class ContextualProvider {
 public:
  struct Output {
    Eigen::MatrixXd vectors;       // m x D
    std::vector<int> token_index;  // size m, non-decreasing, covers 0..n-1
  };
  virtual ~ContextualProvider() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual Output encode(std::span<const std::string> tokens) = 0;
};

// Pools subword rows to whitespace tokens by taking the first subword of each
// token. Provider exceptions are rethrown with the provider name; malformed
// alignments raise Error.
SentenceEncoding external_provider_encode(ContextualProvider& provider,
                                          std::span<const std::string> tokens);

class ProviderRegistry {
 public:
  using Factory = std::function<std::shared_ptr<ContextualProvider>()>;
  static ProviderRegistry& instance();

  void add(const std::string& name, Factory factory);
  bool contains(const std::string& name) const { return factories_.count(name) > 0; }
  std::shared_ptr<ContextualProvider> create(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Factory> factories_;
};

// Word embedding + character CNN features, then a BiLSTM; or an external
// provider when config.provider names a registered one.
class Encoder {
 public:
  Encoder(const EncoderConfig& config, const Vocabulary& vocab, const CharVocabulary& chars,
          nn::ParameterSet& params, Rng& rng);

  const EncoderConfig& config() const { return config_; }
  int output_dim() const;
  int embedding_dim() const { return config_.word_dim + config_.char_feature_dim; }

  // (D_wv + char_feature_dim) x n; dropout applies when `rng` is given.
  nn::Var embed(nn::Graph& g, const Sentence& s, Rng* rng = nullptr) const;
  // D_e x n.
  nn::Var encode(nn::Graph& g, nn::Var embeddings, Rng* rng = nullptr) const;
  nn::Var forward(nn::Graph& g, const Sentence& s, Rng* rng = nullptr) const;

  // Inference helpers returning one row per token.
  Eigen::MatrixXd embed_tokens(const Sentence& s) const;
  SentenceEncoding encode(const Sentence& s) const;
  // Pads every encoding to the longest sentence; padded rows are zero.
  std::vector<SentenceEncoding> encode_batch(std::span<const Sentence> sentences) const;

  // Initialises rows of the word embedding from "token v1 .. vD" lines.
  // Returns how many vocabulary tokens were found.
  std::size_t load_word_vectors(const std::filesystem::path& path);

  std::vector<int> word_ids(const Sentence& s) const;

 private:
  nn::Var char_features(nn::Graph& g, const std::string& token) const;

  EncoderConfig config_;
  const Vocabulary* vocab_;
  const CharVocabulary* chars_;
  nn::Parameter* word_emb_ = nullptr;  // D_wv x |V|
  nn::Parameter* char_emb_ = nullptr;  // D_ch x |C|
  nn::Linear char_conv_;
  nn::BiLstm bilstm_;
  std::shared_ptr<ContextualProvider> provider_;
};

}  // namespace matscire
