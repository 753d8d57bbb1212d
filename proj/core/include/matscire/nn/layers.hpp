#pragma once

#include <string>

#include "matscire/nn/graph.hpp"

namespace matscire::nn {

struct Linear {
  Parameter* w = nullptr;  // out x in
  Parameter* b = nullptr;  // out x 1

  Linear() = default;
  Linear(ParameterSet& ps, const std::string& name, int in, int out, Rng& rng);
  Var operator()(Graph& g, Var x) const { return affine(g, *w, *b, x); }
  int in() const { return static_cast<int>(w->value.cols()); }
  int out() const { return static_cast<int>(w->value.rows()); }
};

// Single-layer LSTM. Weights: wx (4H x in), wh (4H x H), b (4H x 1), gate
// blocks ordered [input; forget; cell; output]. The forget bias starts at 1.
struct Lstm {
  Parameter* wx = nullptr;
  Parameter* wh = nullptr;
  Parameter* b = nullptr;

  Lstm() = default;
  Lstm(ParameterSet& ps, const std::string& name, int in, int hidden, Rng& rng);
  int hidden() const { return static_cast<int>(wh->value.cols()); }
  int in() const { return static_cast<int>(wx->value.cols()); }

  struct State {
    Var h;  // empty means zero
    Var c;
  };
  // One step on the input column x.
  State step(Graph& g, Var x, const State& prev) const;
  // Runs over the columns of x (in x n), left to right or right to left.
  // Column t of the result is the hidden state after reading column t.
  Var sequence(Graph& g, Var x, bool reverse) const;
};

// Forward and backward LSTMs; output rows are [forward; backward].
struct BiLstm {
  Lstm fwd, bwd;

  BiLstm() = default;
  BiLstm(ParameterSet& ps, const std::string& name, int in, int hidden_per_direction, Rng& rng);
  Var operator()(Graph& g, Var x) const;
  int out() const { return fwd.hidden() + bwd.hidden(); }
};

}  // namespace matscire::nn
