#pragma once

#include <span>
#include <vector>

#include "matscire/encoder.hpp"
#include "matscire/nn/layers.hpp"
#include "matscire/types.hpp"

namespace matscire {

struct DecoderConfig {
  int hidden_dim = 300;       // D_h of the generator (and of the word decoder)
  int pointer_hidden = 150;   // D_BH, per direction
  int relation_dim = 100;     // D_rel
  int max_steps = 10;
  int max_span_length = 10;   // L_max in select_span
  int max_decode_length = 64; // word decoder only

  std::vector<std::string> problems() const;
  void validate() const;
};

// One target step: a pointer record, or the terminating EOT step when
// relation == Relation::kEot (its span fields are ignored).
struct TargetStep {
  int b1 = 0, e1 = 0, b2 = 0, e2 = 0;
  Relation relation = Relation::kEot;

  bool eot() const { return relation == Relation::kEot; }
  static TargetStep from(const PointerRecord& r) { return {r.b1, r.e1, r.b2, r.e2, r.relation}; }
  static TargetStep end() { return {}; }
};

// Distributions produced by one decoding step. Position vectors have one
// entry per padded position, exactly zero beyond the sentence length.
struct StepOutput {
  Eigen::VectorXd attention;
  Eigen::VectorXd begin1, end1, begin2, end2;
  Eigen::VectorXd relation_probs;  // kNumRelations entries, EOT last
  Eigen::VectorXd hidden;          // H_t
  Eigen::VectorXd tuple;           // embedding of this step's tuple
};

// argmax of begin[b] * end[e] over b <= e <= b + max_len, e < length; ties go
// to the smaller b, then the smaller e. `length` defaults to begin.size().
std::pair<int, int> select_span(const Eigen::VectorXd& begin, const Eigen::VectorXd& end,
                                int max_len = 10, int length = -1);

// Attention-driven LSTM generator with two pointer networks and a relation
// classifier.
//
// Per step t, with V the encoder rows and tup the running sum of previous
// tuple embeddings:
//   a      = softmax(v . tanh(Wv V_i + Wh H_{t-1} + Wt tup + b))
//   H_t    = LSTM([V a; tup], H_{t-1})
//   H^m    = BiLSTM1([H_t; V_i]);          begin1/end1 = softmax(w . H^m_i + b)
//   H^n    = BiLSTM2([H^m_i; H_t; V_i]);   begin2/end2 likewise
//   s      = tanh(Ws [V begin1; V end1; V begin2; V end2] + bs)
//   rel    = softmax(Wr [s; H_t] + br)
// The tuple embedding added to tup is [tanh(Ws [V_b1; V_e1; V_b2; V_e2] +
// bs); E_r[rel]] for the gold step (training) or the selected spans and
// predicted relation (inference).
class PointerDecoder {
 public:
  PointerDecoder(const DecoderConfig& config, int encoder_dim, nn::ParameterSet& params,
                 Rng& rng);

  const DecoderConfig& config() const { return config_; }
  int tuple_dim() const { return 2 * config_.relation_dim; }

  // ---- graph-level interface ----
  struct Context {
    nn::Var v;     // D_e x n_pad
    int length = 0;
    nn::Var wv_v;  // attention projection of v, cached
  };
  Context context(nn::Graph& g, nn::Var encoding, int length) const;

  struct State {
    nn::Var h, c;
    nn::Var tuple_sum;
  };
  State initial_state(nn::Graph& g) const;

  struct Step {
    nn::Var attention;  // n_pad x 1
    nn::Var h, c;
    nn::Var hm;         // 2 D_BH x length
    nn::Var begin1_logits, end1_logits, begin2_logits, end2_logits;  // n_pad x 1
    nn::Var begin1, end1, begin2, end2;
    nn::Var span_features;  // D_rel x 1
    nn::Var relation_logits, relation_probs;
  };
  Step step(nn::Graph& g, const Context& ctx, const State& prev) const;

  nn::Var tuple_embedding(nn::Graph& g, const Context& ctx, int b1, int e1, int b2, int e2,
                          Relation r) const;
  // Next state: H_t, c_t and tup + tuple.
  static State advance(const State& prev, const Step& s, nn::Var tuple);

  // Summed negative log-likelihood over the target steps: four position heads
  // plus the relation head, relation only on the EOT step.
  nn::Var loss(nn::Graph& g, const Context& ctx, std::span<const TargetStep> targets,
               bool teacher_forcing = true) const;

  // ---- value-level pieces ----
  struct Attention {
    Eigen::VectorXd context;
    Eigen::VectorXd weights;
  };
  Attention attend(const Eigen::VectorXd& prev_hidden, const SentenceEncoding& enc,
                   const Eigen::VectorXd& prev_tuple) const;
  std::pair<Eigen::VectorXd, Eigen::VectorXd> generator_step(const Eigen::VectorXd& context,
                                                             const Eigen::VectorXd& prev_tuple,
                                                             const Eigen::VectorXd& prev_hidden,
                                                             const Eigen::VectorXd& prev_cell) const;
  struct FirstPointer {
    Eigen::VectorXd begin, end;
    Eigen::MatrixXd hm;  // 2 D_BH x length
  };
  FirstPointer pointer_first(const Eigen::VectorXd& hidden, const SentenceEncoding& enc) const;
  std::pair<Eigen::VectorXd, Eigen::VectorXd> pointer_second(const Eigen::MatrixXd& hm,
                                                             const Eigen::VectorXd& hidden,
                                                             const SentenceEncoding& enc) const;
  Eigen::VectorXd classify_relation(const Eigen::VectorXd& span_features,
                                    const Eigen::VectorXd& hidden) const;

  // Greedy decoding until EOT or max_steps.
  std::vector<StepOutput> run(const SentenceEncoding& enc) const;
  std::vector<PointerRecord> decode_records(const SentenceEncoding& enc) const;
  std::vector<Triplet> decode(const Sentence& s, const SentenceEncoding& enc) const;

 private:
  nn::Var position_logits(nn::Graph& g, const nn::Linear& head, nn::Var hidden, int n_pad) const;
  nn::Var bilstm_input_first(const Context& ctx, nn::Var h) const;
  nn::Var attention(nn::Graph& g, const Context& ctx, nn::Var prev_h, nn::Var prev_tuple) const;
  nn::Var span_features(nn::Graph& g, const Context& ctx, nn::Var b1, nn::Var e1, nn::Var b2,
                        nn::Var e2) const;
  Context value_context(nn::Graph& g, const SentenceEncoding& enc) const;

  DecoderConfig config_;
  int encoder_dim_;
  nn::Parameter* attn_wv_ = nullptr;
  nn::Parameter* attn_wh_ = nullptr;
  nn::Parameter* attn_wt_ = nullptr;
  nn::Parameter* attn_b_ = nullptr;
  nn::Parameter* attn_v_ = nullptr;
  nn::Lstm generator_;
  nn::BiLstm ptr1_, ptr2_;
  nn::Linear begin1_, end1_, begin2_, end2_;
  nn::Linear span_proj_;
  nn::Linear relation_;
  nn::Parameter* relation_emb_ = nullptr;  // kNumRelations x D_rel
};

}  // namespace matscire
