#include "matscire/pointer_decoder.hpp"

namespace matscire {

using nn::Graph;
using nn::Var;

std::vector<std::string> DecoderConfig::problems() const {
  std::vector<std::string> out;
  auto positive = [&](const char* name, int v) {
    if (v <= 0) out.push_back(std::string(name) + " must be positive, got " + std::to_string(v));
  };
  positive("hidden_dim", hidden_dim);
  positive("pointer_hidden", pointer_hidden);
  positive("relation_dim", relation_dim);
  positive("max_steps", max_steps);
  if (max_span_length < 0) {
    out.push_back("max_span_length must be nonnegative, got " + std::to_string(max_span_length));
  }
  positive("max_decode_length", max_decode_length);
  return out;
}

void DecoderConfig::validate() const {
  const auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid decoder config:";
  for (const auto& s : p) msg += "\n  " + s;
  throw Error(msg);
}

std::pair<int, int> select_span(const Eigen::VectorXd& begin, const Eigen::VectorXd& end,
                                int max_len, int length) {
  const int n = length < 0 ? static_cast<int>(begin.size()) : length;
  if (n <= 0 || n > begin.size() || n > end.size()) throw Error("select_span: bad length");
  int bb = 0, be = 0;
  double best = -1.0;
  for (int b = 0; b < n; ++b) {
    const int last = std::min(n - 1, b + max_len);
    for (int e = b; e <= last; ++e) {
      const double p = begin(b) * end(e);
      if (p > best) {
        best = p;
        bb = b;
        be = e;
      }
    }
  }
  return {bb, be};
}

PointerDecoder::PointerDecoder(const DecoderConfig& config, int encoder_dim,
                               nn::ParameterSet& params, Rng& rng)
    : config_(config), encoder_dim_(encoder_dim) {
  config_.validate();
  const int dh = config_.hidden_dim, de = encoder_dim, dt = tuple_dim();
  const int bh = config_.pointer_hidden, dr = config_.relation_dim;
  const int da = dh;
  attn_wv_ = &params.add("pnm.attn.Wv", da, de);
  attn_wh_ = &params.add("pnm.attn.Wh", da, dh);
  attn_wt_ = &params.add("pnm.attn.Wt", da, dt);
  attn_b_ = &params.add("pnm.attn.b", da, 1);
  attn_v_ = &params.add("pnm.attn.v", 1, da);
  nn::init_glorot(*attn_wv_, rng);
  nn::init_glorot(*attn_wh_, rng);
  nn::init_glorot(*attn_wt_, rng);
  nn::init_glorot(*attn_v_, rng);
  generator_ = nn::Lstm(params, "pnm.gen", de + dt, dh, rng);
  ptr1_ = nn::BiLstm(params, "pnm.ptr1", dh + de, bh, rng);
  begin1_ = nn::Linear(params, "pnm.ptr1.begin", 2 * bh, 1, rng);
  end1_ = nn::Linear(params, "pnm.ptr1.end", 2 * bh, 1, rng);
  ptr2_ = nn::BiLstm(params, "pnm.ptr2", 2 * bh + dh + de, bh, rng);
  begin2_ = nn::Linear(params, "pnm.ptr2.begin", 2 * bh, 1, rng);
  end2_ = nn::Linear(params, "pnm.ptr2.end", 2 * bh, 1, rng);
  span_proj_ = nn::Linear(params, "pnm.span", 4 * de, dr, rng);
  relation_ = nn::Linear(params, "pnm.rel", dr + dh, kNumRelations, rng);
  relation_emb_ = &params.add("pnm.rel_emb", kNumRelations, dr);
  nn::init_uniform(*relation_emb_, 0.1, rng);
}

PointerDecoder::Context PointerDecoder::context(Graph& g, Var encoding, int length) const {
  if (encoding.rows() != encoder_dim_) {
    throw Error("encoding has dimension " + std::to_string(encoding.rows()) + ", decoder expects " +
                std::to_string(encoder_dim_));
  }
  if (length <= 0) throw Error("attention over an empty or fully masked sentence");
  if (length > encoding.cols()) throw Error("sentence length exceeds encoding rows");
  Context ctx;
  ctx.v = encoding;
  ctx.length = length;
  ctx.wv_v = nn::matmul(g.param(*attn_wv_), encoding);
  return ctx;
}

PointerDecoder::State PointerDecoder::initial_state(Graph& g) const {
  State s;
  s.h = g.constant(Eigen::MatrixXd::Zero(config_.hidden_dim, 1));
  s.tuple_sum = g.constant(Eigen::MatrixXd::Zero(tuple_dim(), 1));
  return s;
}

Var PointerDecoder::position_logits(Graph& g, const nn::Linear& head, Var hidden,
                                    int n_pad) const {
  Var row = head(g, hidden);  // 1 x length
  if (row.cols() < n_pad) {
    row = nn::hcat(std::vector<Var>{row, g.constant(Eigen::MatrixXd::Zero(1, n_pad - row.cols()))});
  }
  return nn::transpose(row);
}

Var PointerDecoder::bilstm_input_first(const Context& ctx, Var h) const {
  Var v = ctx.length == ctx.v.cols() ? ctx.v : nn::cols(ctx.v, 0, ctx.length);
  return nn::vcat({nn::repeat_cols(h, ctx.length), v});
}

Var PointerDecoder::attention(Graph& g, const Context& ctx, Var prev_h, Var prev_tuple) const {
  Var q = nn::add_bias(nn::add(nn::matmul(g.param(*attn_wh_), prev_h),
                               nn::matmul(g.param(*attn_wt_), prev_tuple)),
                       g.param(*attn_b_));
  Var e = nn::tanh(nn::add_bias(ctx.wv_v, q));
  Var scores = nn::transpose(nn::matmul(g.param(*attn_v_), e));
  return nn::masked_softmax(scores, ctx.length);
}

Var PointerDecoder::span_features(Graph& g, const Context& ctx, Var b1, Var e1, Var b2,
                                  Var e2) const {
  Var mix = nn::vcat({nn::matmul(ctx.v, b1), nn::matmul(ctx.v, e1), nn::matmul(ctx.v, b2),
                      nn::matmul(ctx.v, e2)});
  return nn::tanh(span_proj_(g, mix));
}

PointerDecoder::Step PointerDecoder::step(Graph& g, const Context& ctx, const State& prev) const {
  const int n_pad = static_cast<int>(ctx.v.cols());
  Step s;
  s.attention = attention(g, ctx, prev.h, prev.tuple_sum);
  Var context = nn::matmul(ctx.v, s.attention);
  auto st = generator_.step(g, nn::vcat({context, prev.tuple_sum}), {prev.h, prev.c});
  s.h = st.h;
  s.c = st.c;
  Var in1 = bilstm_input_first(ctx, s.h);
  s.hm = ptr1_(g, in1);
  s.begin1_logits = position_logits(g, begin1_, s.hm, n_pad);
  s.end1_logits = position_logits(g, end1_, s.hm, n_pad);
  Var hn = ptr2_(g, nn::vcat({s.hm, in1}));
  s.begin2_logits = position_logits(g, begin2_, hn, n_pad);
  s.end2_logits = position_logits(g, end2_, hn, n_pad);
  s.begin1 = nn::masked_softmax(s.begin1_logits, ctx.length);
  s.end1 = nn::masked_softmax(s.end1_logits, ctx.length);
  s.begin2 = nn::masked_softmax(s.begin2_logits, ctx.length);
  s.end2 = nn::masked_softmax(s.end2_logits, ctx.length);
  s.span_features = span_features(g, ctx, s.begin1, s.end1, s.begin2, s.end2);
  s.relation_logits = relation_(g, nn::vcat({s.span_features, s.h}));
  s.relation_probs = nn::masked_softmax(s.relation_logits, kNumRelations);
  return s;
}

Var PointerDecoder::tuple_embedding(Graph& g, const Context& ctx, int b1, int e1, int b2, int e2,
                                    Relation r) const {
  Var spans;
  if (r == Relation::kEot) {
    spans = g.constant(Eigen::MatrixXd::Zero(config_.relation_dim, 1));
  } else {
    for (int i : {b1, e1, b2, e2}) {
      if (i < 0 || i >= ctx.length) {
        throw Error("tuple position " + std::to_string(i) + " out of range");
      }
    }
    Var mix = nn::vcat({nn::col(ctx.v, b1), nn::col(ctx.v, e1), nn::col(ctx.v, b2),
                        nn::col(ctx.v, e2)});
    spans = nn::tanh(span_proj_(g, mix));
  }
  return nn::vcat({spans, nn::row_as_col(g.param(*relation_emb_), relation_index(r))});
}

PointerDecoder::State PointerDecoder::advance(const State& prev, const Step& s, Var tuple) {
  return {s.h, s.c, nn::add(prev.tuple_sum, tuple)};
}

namespace {

int argmax(const Eigen::MatrixXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

Var PointerDecoder::loss(Graph& g, const Context& ctx, std::span<const TargetStep> targets,
                         bool teacher_forcing) const {
  if (targets.empty()) throw Error("empty target sequence");
  State state = initial_state(g);
  std::vector<Var> terms;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const TargetStep& gold = targets[t];
    Step s = step(g, ctx, state);
    terms.push_back(nn::nll(s.relation_logits, kNumRelations, relation_index(gold.relation)));
    if (gold.eot()) continue;
    for (int i : {gold.b1, gold.e1, gold.b2, gold.e2}) {
      if (i < 0 || i >= ctx.length) {
        throw Error("gold position " + std::to_string(i) + " outside sentence of length " +
                    std::to_string(ctx.length));
      }
    }
    terms.push_back(nn::nll(s.begin1_logits, ctx.length, gold.b1));
    terms.push_back(nn::nll(s.end1_logits, ctx.length, gold.e1));
    terms.push_back(nn::nll(s.begin2_logits, ctx.length, gold.b2));
    terms.push_back(nn::nll(s.end2_logits, ctx.length, gold.e2));
    if (t + 1 == targets.size()) break;
    Var tuple;
    if (teacher_forcing) {
      tuple = tuple_embedding(g, ctx, gold.b1, gold.e1, gold.b2, gold.e2, gold.relation);
    } else {
      const auto [b1, e1] = select_span(s.begin1.value().col(0), s.end1.value().col(0),
                                        config_.max_span_length, ctx.length);
      const auto [b2, e2] = select_span(s.begin2.value().col(0), s.end2.value().col(0),
                                        config_.max_span_length, ctx.length);
      tuple = tuple_embedding(g, ctx, b1, e1, b2, e2,
                              relation_from_index(argmax(s.relation_probs.value())));
    }
    state = advance(state, s, tuple);
  }
  return nn::sum(terms);
}

PointerDecoder::Context PointerDecoder::value_context(Graph& g, const SentenceEncoding& enc) const {
  return context(g, g.constant(enc.vectors.transpose()), enc.length);
}

PointerDecoder::Attention PointerDecoder::attend(const Eigen::VectorXd& prev_hidden,
                                                 const SentenceEncoding& enc,
                                                 const Eigen::VectorXd& prev_tuple) const {
  Graph g(false);
  Context ctx = value_context(g, enc);
  Var w = attention(g, ctx, g.constant(prev_hidden), g.constant(prev_tuple));
  return {nn::matmul(ctx.v, w).value().col(0), w.value().col(0)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> PointerDecoder::generator_step(
    const Eigen::VectorXd& context, const Eigen::VectorXd& prev_tuple,
    const Eigen::VectorXd& prev_hidden, const Eigen::VectorXd& prev_cell) const {
  Graph g(false);
  auto st = generator_.step(g, nn::vcat({g.constant(context), g.constant(prev_tuple)}),
                            {g.constant(prev_hidden), g.constant(prev_cell)});
  return {st.h.value().col(0), st.c.value().col(0)};
}

PointerDecoder::FirstPointer PointerDecoder::pointer_first(const Eigen::VectorXd& hidden,
                                                           const SentenceEncoding& enc) const {
  Graph g(false);
  Context ctx = value_context(g, enc);
  const int n_pad = static_cast<int>(ctx.v.cols());
  Var hm = ptr1_(g, bilstm_input_first(ctx, g.constant(hidden)));
  FirstPointer out;
  out.begin = nn::masked_softmax(position_logits(g, begin1_, hm, n_pad), ctx.length).value().col(0);
  out.end = nn::masked_softmax(position_logits(g, end1_, hm, n_pad), ctx.length).value().col(0);
  out.hm = hm.value();
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> PointerDecoder::pointer_second(
    const Eigen::MatrixXd& hm, const Eigen::VectorXd& hidden, const SentenceEncoding& enc) const {
  Graph g(false);
  Context ctx = value_context(g, enc);
  if (hm.cols() != ctx.length) throw Error("H^m does not match the sentence length");
  const int n_pad = static_cast<int>(ctx.v.cols());
  Var hn = ptr2_(g, nn::vcat({g.constant(hm), bilstm_input_first(ctx, g.constant(hidden))}));
  return {nn::masked_softmax(position_logits(g, begin2_, hn, n_pad), ctx.length).value().col(0),
          nn::masked_softmax(position_logits(g, end2_, hn, n_pad), ctx.length).value().col(0)};
}

Eigen::VectorXd PointerDecoder::classify_relation(const Eigen::VectorXd& span_feats,
                                                  const Eigen::VectorXd& hidden) const {
  Graph g(false);
  Var logits = relation_(g, nn::vcat({g.constant(span_feats), g.constant(hidden)}));
  return nn::masked_softmax(logits, kNumRelations).value().col(0);
}

std::vector<StepOutput> PointerDecoder::run(const SentenceEncoding& enc) const {
  Graph g(false);
  Context ctx = value_context(g, enc);
  State state = initial_state(g);
  std::vector<StepOutput> out;
  for (int t = 0; t < config_.max_steps; ++t) {
    Step s = step(g, ctx, state);
    StepOutput o;
    o.attention = s.attention.value().col(0);
    o.begin1 = s.begin1.value().col(0);
    o.end1 = s.end1.value().col(0);
    o.begin2 = s.begin2.value().col(0);
    o.end2 = s.end2.value().col(0);
    o.relation_probs = s.relation_probs.value().col(0);
    o.hidden = s.h.value().col(0);
    const Relation r = relation_from_index(argmax(s.relation_probs.value()));
    if (r == Relation::kEot) {
      out.push_back(std::move(o));
      break;
    }
    const auto [b1, e1] = select_span(o.begin1, o.end1, config_.max_span_length, ctx.length);
    const auto [b2, e2] = select_span(o.begin2, o.end2, config_.max_span_length, ctx.length);
    Var tuple = tuple_embedding(g, ctx, b1, e1, b2, e2, r);
    o.tuple = tuple.value().col(0);
    out.push_back(std::move(o));
    state = advance(state, s, tuple);
  }
  return out;
}

std::vector<PointerRecord> PointerDecoder::decode_records(const SentenceEncoding& enc) const {
  std::vector<PointerRecord> out;
  for (const auto& o : run(enc)) {
    const Relation r = relation_from_index(argmax(o.relation_probs));
    if (r == Relation::kEot) break;
    const auto [b1, e1] = select_span(o.begin1, o.end1, config_.max_span_length, enc.length);
    const auto [b2, e2] = select_span(o.begin2, o.end2, config_.max_span_length, enc.length);
    PointerRecord rec{b1, e1, b2, e2, r};
    if (std::find(out.begin(), out.end(), rec) == out.end()) out.push_back(rec);
  }
  return out;
}

std::vector<Triplet> PointerDecoder::decode(const Sentence& s, const SentenceEncoding& enc) const {
  if (enc.length != s.size()) throw Error("encoding length does not match the sentence");
  std::vector<Triplet> out;
  for (const auto& r : decode_records(enc)) out.push_back(make_triplet(s, r));
  return out;
}

}  // namespace matscire
