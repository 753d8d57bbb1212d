#pragma once

#include <span>
#include <string>
#include <vector>

#include "matscire/encoder.hpp"
#include "matscire/pointer_decoder.hpp"
#include "matscire/vocabulary.hpp"

namespace matscire {

// Ids the word decoder may emit for `sentence`: its tokens (UNK for unknown
// ones), the relation names, '|', ';', UNK and EOT. Indexed by id.
std::vector<bool> wdm_mask(const Vocabulary& vocab, const Sentence& sentence);

// "e1 | Relation | e2 ; e1 | Relation | e2" as tokens, without BOT/EOT.
std::vector<std::string> render_wdm(const Sentence& sentence, std::span<const Triplet> triplets);
// render_wdm mapped through the vocabulary, followed by EOT.
std::vector<int> wdm_target_ids(const Vocabulary& vocab, const AnnotatedSentence& annotated);

// The sentence token with the highest attention (leftmost on ties) when
// `predicted` is the UNK token; otherwise `predicted` unchanged.
std::string replace_unk(const std::string& predicted, const Eigen::VectorXd& attention,
                        const Sentence& sentence);

struct WdmParse {
  std::vector<Triplet> triplets;
  int dropped = 0;  // tuples that were malformed or could not be grounded
};

// Reads tokens up to the first EOT, splits tuples on ';' and fields on '|',
// and grounds each entity at its leftmost contiguous occurrence in the
// sentence. Duplicates are removed.
WdmParse parse_wdm_output(std::span<const std::string> tokens, const Sentence& sentence);

// Token-level LSTM decoder over the shared vocabulary:
//   a   = softmax(v . tanh(Wv V_i + Wh H_{t-1} + b)),  ctx = V a
//   H_t = LSTM([ctx; E(y_{t-1})], H_{t-1})
//   p   = masked softmax(Wo [H_t; ctx] + bo)
class WordDecoder {
 public:
  WordDecoder(const DecoderConfig& config, int encoder_dim, int embedding_dim,
              const Vocabulary& vocab, nn::ParameterSet& params, Rng& rng);

  const DecoderConfig& config() const { return config_; }

  struct Context {
    nn::Var v;  // D_e x n
    int length = 0;
    nn::Var wv_v;
    std::vector<bool> mask;
  };
  Context context(nn::Graph& g, nn::Var encoding, int length, const Sentence& s) const;

  struct Step {
    nn::Var attention;
    nn::Var h, c;
    nn::Var logits;
  };
  Step step(nn::Graph& g, const Context& ctx, int prev_token, nn::Var prev_h, nn::Var prev_c) const;

  // Summed NLL of `target_ids` (ending with EOT) with BOT as the first input.
  nn::Var loss(nn::Graph& g, const Context& ctx, std::span<const int> target_ids) const;

  struct StepResult {
    Eigen::VectorXd probs;
    Eigen::VectorXd attention;
    Eigen::VectorXd hidden, cell;
  };
  // One value-level step from explicit state.
  StepResult wdm_step(int prev_token, const Eigen::VectorXd& prev_hidden,
                      const Eigen::VectorXd& prev_cell, const SentenceEncoding& enc,
                      const std::vector<bool>& mask) const;

  // Greedy generation with UNK replacement, up to max_decode_length tokens;
  // the trailing EOT is not included.
  std::vector<std::string> generate(const Sentence& s, const SentenceEncoding& enc) const;
  WdmParse decode(const Sentence& s, const SentenceEncoding& enc) const;

 private:
  DecoderConfig config_;
  const Vocabulary* vocab_;
  int encoder_dim_;
  nn::Parameter* attn_wv_ = nullptr;
  nn::Parameter* attn_wh_ = nullptr;
  nn::Parameter* attn_b_ = nullptr;
  nn::Parameter* attn_v_ = nullptr;
  nn::Parameter* target_emb_ = nullptr;  // D_emb x |V|
  nn::Lstm lstm_;
  nn::Linear output_;
};

}  // namespace matscire
