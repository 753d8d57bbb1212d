#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "matscire/pointer_decoder.hpp"
#include "pointer_oracle.hpp"

namespace matscire {
namespace {

using testing::Vec;

using testing::kDe;
using testing::random_encoding;
using testing::small_config;
using testing::brute_span;
using Fixture = testing::PointerOracle;

TEST(PointerDecoderOracle, Attention) {
  Fixture f;
  Rng rng(1);
  for (auto [len, pad] : {std::pair{4, 4}, std::pair{3, 7}, std::pair{1, 1}}) {
    const auto e = random_encoding(rng, len, pad);
    const auto h = testing::random_matrix(rng, 6, 1), tup = testing::random_matrix(rng, 8, 1);
    const auto a = f.dec.attend(h.col(0), e, tup.col(0));
    const Vec want = f.attention(e, testing::to_vec(h), testing::to_vec(tup));
    EXPECT_LT(testing::max_abs_diff(want, a.weights), 1e-6);
    EXPECT_LT(testing::max_abs_diff(f.mix(e, want), a.context), 1e-6);
  }
}

TEST(PointerDecoderOracle, GeneratorCell) {
  Fixture f;
  Rng rng(2);
  const auto ctx = testing::random_matrix(rng, kDe, 1), tup = testing::random_matrix(rng, 8, 1);
  const auto h = testing::random_matrix(rng, 6, 1), c = testing::random_matrix(rng, 6, 1);
  const auto [h1, c1] = f.dec.generator_step(ctx.col(0), tup.col(0), h.col(0), c.col(0));
  const auto want = testing::lstm_step_loop(f.lstm("pnm.gen"),
                                            testing::concat(testing::to_vec(ctx), testing::to_vec(tup)),
                                            {testing::to_vec(h), testing::to_vec(c)});
  EXPECT_LT(testing::max_abs_diff(want.h, h1), 1e-6);
  EXPECT_LT(testing::max_abs_diff(want.c, c1), 1e-6);
}

TEST(PointerDecoderOracle, PointerHeads) {
  Fixture f;
  Rng rng(3);
  const auto e = random_encoding(rng, 4, 6);
  const Vec h = testing::to_vec(testing::random_matrix(rng, 6, 1));
  const Eigen::VectorXd hv = Eigen::Map<const Eigen::VectorXd>(h.data(), 6);
  const auto first = f.dec.pointer_first(hv, e);
  const auto in1 = f.first_inputs(e, h);
  const auto hm = testing::bilstm_loop(f.bilstm("pnm.ptr1"), in1);
  EXPECT_LT(testing::max_abs_diff(f.head("pnm.ptr1.begin", hm, 6), first.begin), 1e-6);
  EXPECT_LT(testing::max_abs_diff(f.head("pnm.ptr1.end", hm, 6), first.end), 1e-6);
  for (int i = 0; i < 4; ++i) {
    EXPECT_LT(testing::max_abs_diff(hm[static_cast<std::size_t>(i)], first.hm.col(i)), 1e-6);
  }
  std::vector<Vec> in2;
  for (std::size_t i = 0; i < 4; ++i) in2.push_back(testing::concat(hm[i], in1[i]));
  const auto hn = testing::bilstm_loop(f.bilstm("pnm.ptr2"), in2);
  const auto [b2, e2] = f.dec.pointer_second(first.hm, hv, e);
  EXPECT_LT(testing::max_abs_diff(f.head("pnm.ptr2.begin", hn, 6), b2), 1e-6);
  EXPECT_LT(testing::max_abs_diff(f.head("pnm.ptr2.end", hn, 6), e2), 1e-6);
}

TEST(PointerDecoderOracle, RelationHead) {
  Fixture f;
  Rng rng(4);
  const Vec s = testing::to_vec(testing::random_matrix(rng, 4, 1));
  const Vec h = testing::to_vec(testing::random_matrix(rng, 6, 1));
  const auto got = f.dec.classify_relation(Eigen::Map<const Eigen::VectorXd>(s.data(), 4),
                                           Eigen::Map<const Eigen::VectorXd>(h.data(), 6));
  const Vec want = testing::softmax_loop(
      testing::affine_loop(f.p("pnm.rel.W"), testing::concat(s, h), &f.p("pnm.rel.b")), kNumRelations);
  EXPECT_LT(testing::max_abs_diff(want, got), 1e-6);
}

// The first decoding step assembled from the loops above.
TEST(PointerDecoderOracle, FirstStepOfRun) {
  Fixture f;
  Rng rng(5);
  const auto e = random_encoding(rng, 5, 8);
  const auto out = f.dec.run(e);
  ASSERT_FALSE(out.empty());
  const Vec h0(6, 0.0), tup0(8, 0.0);
  const Vec a = f.attention(e, h0, tup0);
  EXPECT_LT(testing::max_abs_diff(a, out[0].attention), 1e-6);
  const auto st = testing::lstm_step_loop(f.lstm("pnm.gen"), testing::concat(f.mix(e, a), tup0), {});
  EXPECT_LT(testing::max_abs_diff(st.h, out[0].hidden), 1e-6);
  const auto in1 = f.first_inputs(e, st.h);
  const auto hm = testing::bilstm_loop(f.bilstm("pnm.ptr1"), in1);
  std::vector<Vec> in2;
  for (std::size_t i = 0; i < in1.size(); ++i) in2.push_back(testing::concat(hm[i], in1[i]));
  const auto hn = testing::bilstm_loop(f.bilstm("pnm.ptr2"), in2);
  const Vec b1 = f.head("pnm.ptr1.begin", hm, 8), e1 = f.head("pnm.ptr1.end", hm, 8);
  const Vec b2 = f.head("pnm.ptr2.begin", hn, 8), e2 = f.head("pnm.ptr2.end", hn, 8);
  EXPECT_LT(testing::max_abs_diff(b1, out[0].begin1), 1e-6);
  EXPECT_LT(testing::max_abs_diff(e2, out[0].end2), 1e-6);
  Vec m = testing::concat(testing::concat(f.mix(e, b1), f.mix(e, e1)),
                          testing::concat(f.mix(e, b2), f.mix(e, e2)));
  Vec span = testing::affine_loop(f.p("pnm.span.W"), m, &f.p("pnm.span.b"));
  for (auto& x : span) x = std::tanh(x);
  const Vec rel = testing::softmax_loop(
      testing::affine_loop(f.p("pnm.rel.W"), testing::concat(span, st.h), &f.p("pnm.rel.b")),
      kNumRelations);
  EXPECT_LT(testing::max_abs_diff(rel, out[0].relation_probs), 1e-6);
}

TEST(SelectSpan, OneHot) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(20), e = Eigen::VectorXd::Zero(20);
  b(8) = 1.0;
  e(8) = 1.0;
  EXPECT_EQ(select_span(b, e), (std::pair{8, 8}));
  b.setZero();
  e.setZero();
  b(5) = 0.9;
  e(3) = 0.9;
  const auto [x, y] = select_span(b, e);
  EXPECT_LE(x, y);
}

TEST(SelectSpan, ExhaustiveUpToTwelve) {
  Rng rng(6);
  for (int n = 1; n <= 12; ++n) {
    for (int trial = 0; trial < 500; ++trial) {
      Eigen::VectorXd b(n), e(n);
      const bool coarse = trial % 2 == 0;  // coarse values produce ties
      for (int i = 0; i < n; ++i) {
        b(i) = coarse ? static_cast<double>(rng.below(3)) : rng.uniform();
        e(i) = coarse ? static_cast<double>(rng.below(3)) : rng.uniform();
      }
      b /= std::max(b.sum(), 1e-12);
      e /= std::max(e.sum(), 1e-12);
      for (int max_len : {0, 2, 10}) {
        ASSERT_EQ(select_span(b, e, max_len), brute_span(b, e, max_len, n)) << "n " << n;
      }
    }
  }
}

TEST(PointerDecoder, DistributionsOverRandomShapes) {
  Fixture f;
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int len = 1 + static_cast<int>(rng.below(64));
    const int pad = len + static_cast<int>(rng.below(4));
    const auto e = random_encoding(rng, len, pad);
    for (const auto& o : f.dec.run(e)) {
      for (const auto* v : {&o.attention, &o.begin1, &o.end1, &o.begin2, &o.end2}) {
        ASSERT_EQ(v->size(), pad);
        EXPECT_NEAR(v->head(len).sum(), 1.0, 1e-6);
        for (int i = len; i < pad; ++i) ASSERT_EQ((*v)(i), 0.0);
      }
      EXPECT_NEAR(o.relation_probs.sum(), 1.0, 1e-6);
    }
  }
}

TEST(PointerDecoder, EotFirstGivesNothing) {
  Fixture f;
  f.ps.get("pnm.rel.b").value(relation_index(Relation::kEot), 0) = 1e3;
  Rng rng(8);
  const auto e = random_encoding(rng, 6, 6);
  EXPECT_EQ(f.dec.run(e).size(), 1u);
  EXPECT_TRUE(f.dec.decode_records(e).empty());
}

TEST(PointerDecoder, DecodeBoundedAndDuplicateFree) {
  Fixture f;
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = random_encoding(rng, 3 + trial, 3 + trial);
    const auto recs = f.dec.decode_records(e);
    EXPECT_LE(recs.size(), 4u);
    std::set<PointerRecord> uniq(recs.begin(), recs.end());
    EXPECT_EQ(uniq.size(), recs.size());
    for (const auto& r : recs) {
      EXPECT_NE(r.relation, Relation::kEot);
      EXPECT_LE(r.b1, r.e1);
      EXPECT_LT(r.e2, 3 + trial);
    }
  }
}

TEST(PointerDecoder, RelationArgmaxScaleInvariant) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    nn::Graph g(false);
    const auto logits = testing::random_matrix(rng, kNumRelations, 1, 5.0);
    const double c = rng.uniform(0.01, 100.0);
    Eigen::Index a, b;
    nn::masked_softmax(g.constant(logits), kNumRelations).value().col(0).maxCoeff(&a);
    nn::masked_softmax(g.constant(c * logits), kNumRelations).value().col(0).maxCoeff(&b);
    EXPECT_EQ(a, b);
  }
}

TEST(PointerDecoder, GradientCheckFourTokens) {
  Fixture f;
  Rng rng(11);
  const nn::Matrix enc = testing::random_matrix(rng, kDe, 4);
  const std::vector<TargetStep> targets = {{0, 1, 3, 3, Relation::kCapacity}, TargetStep::end()};
  for (bool tf : {true, false}) {
    auto loss = [&](nn::Graph& g) {
      auto ctx = f.dec.context(g, g.constant(enc), 4);
      return f.dec.loss(g, ctx, targets, tf);
    };
    const auto res = testing::check_params(f.ps, loss, 25, 12);
    EXPECT_LT(res.max_rel_error, 1e-3) << res.worst;
  }
  // The four pointer heads in full.
  auto loss = [&](nn::Graph& g) {
    auto ctx = f.dec.context(g, g.constant(enc), 4);
    return f.dec.loss(g, ctx, targets, true);
  };
  f.ps.zero_grad();
  {
    nn::Graph g;
    g.backward(loss(g));
  }
  for (const char* name : {"pnm.ptr1.begin.W", "pnm.ptr1.end.W", "pnm.ptr2.begin.W", "pnm.ptr2.end.W"}) {
    auto& p = f.ps.get(name);
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      const double x = p.value.data()[i];
      const double h = 1e-6;
      p.value.data()[i] = x + h;
      nn::Graph g1(false);
      const double up = loss(g1).value()(0, 0);
      p.value.data()[i] = x - h;
      nn::Graph g2(false);
      const double down = loss(g2).value()(0, 0);
      p.value.data()[i] = x;
      EXPECT_LT(testing::rel_error(p.grad.data()[i], (up - down) / (2 * h)), 1e-3) << name << i;
    }
  }
}

TEST(PointerDecoder, RejectsBadTargets) {
  Fixture f;
  nn::Graph g;
  auto ctx = f.dec.context(g, g.constant(nn::Matrix::Zero(kDe, 3)), 3);
  const std::vector<TargetStep> bad = {{0, 0, 5, 5, Relation::kVoltage}, TargetStep::end()};
  EXPECT_THROW(f.dec.loss(g, ctx, bad), Error);
  EXPECT_THROW(f.dec.context(g, g.constant(nn::Matrix::Zero(kDe + 1, 3)), 3), Error);
  EXPECT_THROW(f.dec.context(g, g.constant(nn::Matrix::Zero(kDe, 3)), 0), Error);
}

TEST(DecoderConfig, ListsProblems) {
  DecoderConfig c;
  c.hidden_dim = 0;
  c.max_steps = -1;
  EXPECT_EQ(c.problems().size(), 2u);
}

}  // namespace
}  // namespace matscire
