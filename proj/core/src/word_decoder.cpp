#include "matscire/word_decoder.hpp"

#include <set>

namespace matscire {

using nn::Graph;
using nn::Var;

std::vector<bool> wdm_mask(const Vocabulary& vocab, const Sentence& sentence) {
  std::vector<bool> allowed(static_cast<std::size_t>(vocab.size()), false);
  for (const auto& t : sentence.tokens) allowed[static_cast<std::size_t>(vocab.id(t))] = true;
  for (Relation r : kPropertyRelations) allowed[static_cast<std::size_t>(vocab.relation_id(r))] = true;
  for (int id : {vocab.tuple_separator(), vocab.triplet_separator(), vocab.unk(), vocab.eot()}) {
    allowed[static_cast<std::size_t>(id)] = true;
  }
  allowed[static_cast<std::size_t>(vocab.bot())] = false;
  return allowed;
}

std::vector<std::string> render_wdm(const Sentence& sentence, std::span<const Triplet> triplets) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (k) out.emplace_back(Vocabulary::kTripletSeparator);
    for (int i = t.entity1.begin; i <= t.entity1.end; ++i) out.push_back(sentence.tokens[static_cast<std::size_t>(i)]);
    out.emplace_back(Vocabulary::kTupleSeparator);
    out.emplace_back(relation_name(t.relation));
    out.emplace_back(Vocabulary::kTupleSeparator);
    for (int i = t.entity2.begin; i <= t.entity2.end; ++i) out.push_back(sentence.tokens[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<int> wdm_target_ids(const Vocabulary& vocab, const AnnotatedSentence& annotated) {
  for (const auto& t : annotated.triplets) {
    check_span(annotated.sentence, t.entity1.begin, t.entity1.end);
    check_span(annotated.sentence, t.entity2.begin, t.entity2.end);
  }
  auto ids = vocab.ids(render_wdm(annotated.sentence, annotated.triplets));
  ids.push_back(vocab.eot());
  return ids;
}

std::string replace_unk(const std::string& predicted, const Eigen::VectorXd& attention,
                        const Sentence& sentence) {
  if (predicted != Vocabulary::kUnk) return predicted;
  const int n = std::min(sentence.size(), static_cast<int>(attention.size()));
  if (n == 0) return predicted;
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (attention(i) > attention(best)) best = i;
  }
  return sentence.tokens[static_cast<std::size_t>(best)];
}

namespace {

bool is_eot(const std::string& t) { return t == Vocabulary::kEot || t == "EOT"; }

std::optional<std::pair<int, int>> ground(const Sentence& s, const std::vector<std::string>& words) {
  if (words.empty()) return std::nullopt;
  const int n = s.size(), m = static_cast<int>(words.size());
  for (int b = 0; b + m <= n; ++b) {
    bool ok = true;
    for (int k = 0; k < m && ok; ++k) ok = s.tokens[static_cast<std::size_t>(b + k)] == words[static_cast<std::size_t>(k)];
    if (ok) return std::pair{b, b + m - 1};
  }
  return std::nullopt;
}

}  // namespace

WdmParse parse_wdm_output(std::span<const std::string> tokens, const Sentence& sentence) {
  std::vector<std::vector<std::string>> groups(1);
  for (const auto& t : tokens) {
    if (is_eot(t)) break;
    if (t == Vocabulary::kBot) continue;
    if (t == Vocabulary::kTripletSeparator) {
      groups.emplace_back();
    } else {
      groups.back().push_back(t);
    }
  }
  WdmParse out;
  std::vector<Triplet> found;
  for (const auto& grp : groups) {
    if (grp.empty()) continue;
    std::vector<std::vector<std::string>> fields(1);
    for (const auto& t : grp) {
      if (t == Vocabulary::kTupleSeparator) {
        fields.emplace_back();
      } else {
        fields.back().push_back(t);
      }
    }
    if (fields.size() != 3 || fields[1].size() != 1) {
      ++out.dropped;
      continue;
    }
    const auto rel = parse_relation(fields[1][0]);
    const auto e1 = ground(sentence, fields[0]);
    const auto e2 = ground(sentence, fields[2]);
    if (!rel || *rel == Relation::kEot || !e1 || !e2) {
      ++out.dropped;
      continue;
    }
    found.push_back(make_triplet(sentence, {e1->first, e1->second, e2->first, e2->second, *rel}));
  }
  out.triplets = unique_triplets(std::move(found));
  return out;
}

WordDecoder::WordDecoder(const DecoderConfig& config, int encoder_dim, int embedding_dim,
                         const Vocabulary& vocab, nn::ParameterSet& params, Rng& rng)
    : config_(config), vocab_(&vocab), encoder_dim_(encoder_dim) {
  config_.validate();
  if (embedding_dim <= 0) throw Error("word decoder embedding_dim must be positive");
  const int dh = config_.hidden_dim, de = encoder_dim;
  attn_wv_ = &params.add("wdm.attn.Wv", dh, de);
  attn_wh_ = &params.add("wdm.attn.Wh", dh, dh);
  attn_b_ = &params.add("wdm.attn.b", dh, 1);
  attn_v_ = &params.add("wdm.attn.v", 1, dh);
  nn::init_glorot(*attn_wv_, rng);
  nn::init_glorot(*attn_wh_, rng);
  nn::init_glorot(*attn_v_, rng);
  target_emb_ = &params.add("wdm.target_emb", embedding_dim, vocab.size());
  nn::init_uniform(*target_emb_, 0.1, rng);
  lstm_ = nn::Lstm(params, "wdm.lstm", de + embedding_dim, dh, rng);
  output_ = nn::Linear(params, "wdm.out", dh + de, vocab.size(), rng);
}

WordDecoder::Context WordDecoder::context(Graph& g, Var encoding, int length,
                                          const Sentence& s) const {
  if (encoding.rows() != encoder_dim_) throw Error("encoding dimension mismatch in word decoder");
  if (length <= 0 || length > encoding.cols()) throw Error("attention over an empty sentence");
  Context ctx;
  ctx.v = encoding;
  ctx.length = length;
  ctx.wv_v = nn::matmul(g.param(*attn_wv_), encoding);
  ctx.mask = wdm_mask(*vocab_, s);
  return ctx;
}

WordDecoder::Step WordDecoder::step(Graph& g, const Context& ctx, int prev_token, Var prev_h,
                                    Var prev_c) const {
  Step s;
  Var q = nn::add_bias(nn::matmul(g.param(*attn_wh_), prev_h), g.param(*attn_b_));
  Var e = nn::tanh(nn::add_bias(ctx.wv_v, q));
  s.attention = nn::masked_softmax(nn::transpose(nn::matmul(g.param(*attn_v_), e)), ctx.length);
  Var context = nn::matmul(ctx.v, s.attention);
  const int ids[1] = {prev_token};
  Var emb = nn::lookup(g, *target_emb_, ids);
  auto st = lstm_.step(g, nn::vcat({context, emb}), {prev_h, prev_c});
  s.h = st.h;
  s.c = st.c;
  s.logits = output_(g, nn::vcat({s.h, context}));
  return s;
}

Var WordDecoder::loss(Graph& g, const Context& ctx, std::span<const int> target_ids) const {
  if (target_ids.empty()) throw Error("empty target sequence");
  Var h = g.constant(Eigen::MatrixXd::Zero(config_.hidden_dim, 1));
  Var c;
  int prev = vocab_->bot();
  std::vector<Var> terms;
  for (int y : target_ids) {
    if (y < 0 || y >= vocab_->size()) throw Error("target id " + std::to_string(y) + " out of range");
    Step s = step(g, ctx, prev, h, c);
    terms.push_back(nn::nll(s.logits, ctx.mask, y));
    h = s.h;
    c = s.c;
    prev = y;
  }
  return nn::sum(terms);
}

WordDecoder::StepResult WordDecoder::wdm_step(int prev_token, const Eigen::VectorXd& prev_hidden,
                                              const Eigen::VectorXd& prev_cell,
                                              const SentenceEncoding& enc,
                                              const std::vector<bool>& mask) const {
  Graph g(false);
  Context ctx;
  ctx.v = g.constant(enc.vectors.transpose());
  ctx.length = enc.length;
  ctx.wv_v = nn::matmul(g.param(*attn_wv_), ctx.v);
  ctx.mask = mask;
  Step s = step(g, ctx, prev_token, g.constant(prev_hidden), g.constant(prev_cell));
  StepResult r;
  r.probs = nn::masked_softmax(s.logits, mask).value().col(0);
  r.attention = s.attention.value().col(0);
  r.hidden = s.h.value().col(0);
  r.cell = s.c.value().col(0);
  return r;
}

std::vector<std::string> WordDecoder::generate(const Sentence& s, const SentenceEncoding& enc) const {
  Graph g(false);
  Context ctx = context(g, g.constant(enc.vectors.transpose()), enc.length, s);
  Var h = g.constant(Eigen::MatrixXd::Zero(config_.hidden_dim, 1));
  Var c;
  int prev = vocab_->bot();
  std::vector<std::string> out;
  for (int t = 0; t < config_.max_decode_length; ++t) {
    Step st = step(g, ctx, prev, h, c);
    const Eigen::MatrixXd& z = st.logits.value();
    int best = -1;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (!ctx.mask[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || z(i) > z(best)) best = static_cast<int>(i);
    }
    if (best == vocab_->eot()) break;
    out.push_back(replace_unk(vocab_->token(best), st.attention.value().col(0), s));
    h = st.h;
    c = st.c;
    prev = best;
  }
  return out;
}

WdmParse WordDecoder::decode(const Sentence& s, const SentenceEncoding& enc) const {
  return parse_wdm_output(generate(s, enc), s);
}

}  // namespace matscire
