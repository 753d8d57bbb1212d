#include "matscire/nn/layers.hpp"

namespace matscire::nn {

Linear::Linear(ParameterSet& ps, const std::string& name, int in, int out, Rng& rng) {
  w = &ps.add(name + ".W", out, in);
  b = &ps.add(name + ".b", out, 1);
  init_glorot(*w, rng);
}

Lstm::Lstm(ParameterSet& ps, const std::string& name, int in, int hidden, Rng& rng) {
  wx = &ps.add(name + ".Wx", 4 * hidden, in);
  wh = &ps.add(name + ".Wh", 4 * hidden, hidden);
  b = &ps.add(name + ".b", 4 * hidden, 1);
  init_glorot(*wx, rng);
  init_glorot(*wh, rng);
  b->value.middleRows(hidden, hidden).setOnes();
}

Lstm::State Lstm::step(Graph& g, Var x, const State& prev) const {
  Var gates = affine(g, *wx, *b, x);
  if (prev.h) gates = add(gates, matmul(g.param(*wh), prev.h));
  Var c = lstm_c(gates, prev.c);
  return {lstm_h(gates, c), c};
}

Var Lstm::sequence(Graph& g, Var x, bool reverse) const {
  const Eigen::Index n = x.cols();
  Var proj = affine(g, *wx, *b, x);
  Var whv = g.param(*wh);
  std::vector<Var> hs(static_cast<std::size_t>(n));
  State s;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index t = reverse ? n - 1 - k : k;
    Var gates = col(proj, t);
    if (s.h) gates = add(gates, matmul(whv, s.h));
    s.c = lstm_c(gates, s.c);
    s.h = lstm_h(gates, s.c);
    hs[static_cast<std::size_t>(t)] = s.h;
  }
  return hcat(hs);
}

BiLstm::BiLstm(ParameterSet& ps, const std::string& name, int in, int hidden_per_direction,
               Rng& rng)
    : fwd(ps, name + ".fwd", in, hidden_per_direction, rng),
      bwd(ps, name + ".bwd", in, hidden_per_direction, rng) {}

Var BiLstm::operator()(Graph& g, Var x) const {
  return vcat({fwd.sequence(g, x, false), bwd.sequence(g, x, true)});
}

}  // namespace matscire::nn
