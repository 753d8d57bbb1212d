#pragma once

// Loop-level reference for the pointer decoder, built from its named
// parameters.

#include <algorithm>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "matscire/pointer_decoder.hpp"
#include "oracles.hpp"

namespace matscire::testing {

constexpr int kDe = 5;

inline DecoderConfig small_config() {
  DecoderConfig c;
  c.hidden_dim = 6;
  c.pointer_hidden = 3;
  c.relation_dim = 4;
  c.max_steps = 4;
  return c;
}

inline SentenceEncoding random_encoding(Rng& rng, int length, int n_pad) {
  SentenceEncoding e;
  e.vectors = Eigen::MatrixXd::Zero(n_pad, kDe);
  e.vectors.topRows(length) = random_matrix(rng, length, kDe);
  e.length = length;
  e.mask.assign(static_cast<std::size_t>(n_pad), false);
  for (int i = 0; i < length; ++i) e.mask[static_cast<std::size_t>(i)] = true;
  return e;
}

struct PointerOracle {
  nn::ParameterSet ps;
  Rng rng{23};
  PointerDecoder dec{small_config(), kDe, ps, rng};

  const nn::Matrix& p(const std::string& name) { return ps.get(name).value; }
  nn::Lstm lstm(const std::string& name) {
    nn::Lstm l;
    l.wx = &ps.get(name + ".Wx");
    l.wh = &ps.get(name + ".Wh");
    l.b = &ps.get(name + ".b");
    return l;
  }
  nn::BiLstm bilstm(const std::string& name) {
    nn::BiLstm b;
    b.fwd = lstm(name + ".fwd");
    b.bwd = lstm(name + ".bwd");
    return b;
  }

  std::vector<Vec> rows(const SentenceEncoding& e) {
    std::vector<Vec> out;
    for (int i = 0; i < e.length; ++i) out.push_back(to_vec(e.vectors.row(i).transpose()));
    return out;
  }

  Vec attention(const SentenceEncoding& e, const Vec& h, const Vec& tup) {
    const auto V = rows(e);
    Vec scores(static_cast<std::size_t>(e.padded_length()), 0.0);
    const Vec q1 = affine_loop(p("pnm.attn.Wh"), h, &p("pnm.attn.b"));
    const Vec q2 = affine_loop(p("pnm.attn.Wt"), tup);
    for (int i = 0; i < e.length; ++i) {
      const Vec k = affine_loop(p("pnm.attn.Wv"), V[static_cast<std::size_t>(i)]);
      double s = 0.0;
      for (std::size_t a = 0; a < k.size(); ++a) {
        s += p("pnm.attn.v")(0, static_cast<Eigen::Index>(a)) * std::tanh(k[a] + q1[a] + q2[a]);
      }
      scores[static_cast<std::size_t>(i)] = s;
    }
    return softmax_loop(scores, static_cast<std::size_t>(e.length));
  }

  Vec head(const std::string& name, const std::vector<Vec>& hs, int n_pad) {
    Vec logits(static_cast<std::size_t>(n_pad), 0.0);
    for (std::size_t i = 0; i < hs.size(); ++i) {
      logits[i] = affine_loop(p(name + ".W"), hs[i], &p(name + ".b"))[0];
    }
    return softmax_loop(logits, hs.size());
  }

  std::vector<Vec> first_inputs(const SentenceEncoding& e, const Vec& h) {
    std::vector<Vec> out;
    for (const auto& v : rows(e)) out.push_back(concat(h, v));
    return out;
  }

  Vec mix(const SentenceEncoding& e, const Vec& w) {
    Vec out(kDe, 0.0);
    for (int i = 0; i < e.length; ++i) {
      for (int d = 0; d < kDe; ++d) out[static_cast<std::size_t>(d)] += w[static_cast<std::size_t>(i)] * e.vectors(i, d);
    }
    return out;
  }
};

// Exhaustive pair search with the documented tie rule.
inline std::pair<int, int> brute_span(const Eigen::VectorXd& b, const Eigen::VectorXd& e, int max_len, int n) {
  double best = -1.0;
  std::vector<std::pair<int, int>> arg;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j < i || j > i + max_len) continue;
      const double p = b(i) * e(j);
      if (p > best) {
        best = p;
        arg.clear();
      }
      if (p == best) arg.push_back({i, j});
    }
  }
  return *std::min_element(arg.begin(), arg.end());
}

}  // namespace matscire::testing
