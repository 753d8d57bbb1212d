#pragma once

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "matscire/nn/parameters.hpp"

namespace matscire::nn {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  explicit operator bool() const { return graph != nullptr; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Tape for reverse-mode differentiation. Nodes are appended in evaluation
// order; backward() walks them in reverse. With gradients disabled the graph
// only evaluates.
class Graph {
 public:
  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Matrix value);
  // A leaf whose gradient is kept (for tests and external inputs).
  Var input(Matrix value);
  // One node per parameter per graph; gradients land in Parameter::grad when
  // backward() finishes.
  Var param(Parameter& p);

  // Seeds d(loss)/d(loss) = 1 for a 1x1 node and propagates.
  void backward(Var loss);

  const Matrix& value(Var v) const { return node(v.id).value_ref(); }
  // Gradient of the last backward() w.r.t. `v`; zero if it received none.
  Matrix grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // ---- internal interface used by the op implementations ----
  using Backward = std::function<void(Graph&, int)>;
  Var make(Matrix value, std::initializer_list<Var> inputs, Backward back);
  Var make(Matrix value, std::span<const Var> inputs, Backward back);
  // Accumulation buffer for node `id`, zero-initialised on first use.
  Matrix& grad_buffer(int id);
  const Matrix& grad_of(int id) const { return nodes_[id].grad; }
  const Matrix& value_of(int id) const { return node(id).value_ref(); }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Parameter* param = nullptr;
    Matrix grad;
    Backward back;
    bool needs_grad = false;
    const Matrix& value_ref() const { return external ? *external : value; }
  };
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  bool grad_enabled_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

// ---- Ops. Vectors are column matrices; sequences are D x n (one column per
// token). ----

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
// a (D x n) + b (D x 1) broadcast over columns.
Var add_bias(Var a, Var b);
Var cmul(Var a, Var b);
Var scale(Var a, double s);
Var tanh(Var a);
Var sigmoid(Var a);

// Stacks vertically (same column count) or horizontally (same row count).
Var vcat(std::span<const Var> parts);
Var vcat(std::initializer_list<Var> parts);
Var hcat(std::span<const Var> parts);

Var col(Var a, Eigen::Index j);
Var cols(Var a, Eigen::Index j, Eigen::Index count);
// Row i of `a` as a column vector.
Var row_as_col(Var a, Eigen::Index i);
Var repeat_cols(Var v, Eigen::Index n);
Var transpose(Var a);
// Row-wise maximum over columns: D x n -> D x 1.
Var max_cols(Var a);
// Sum of all entries -> 1 x 1.
Var sum(Var a);
Var sum(std::span<const Var> scalars);

// Softmax over the first `n_valid` entries of a row or column vector; the
// remaining entries are exactly zero.
Var masked_softmax(Var x, Eigen::Index n_valid);
// Softmax restricted to the entries with allowed[i] true; others exactly 0.
Var masked_softmax(Var x, const std::vector<bool>& allowed);
// -log softmax(x)[gold] with the same masking rules, computed stably.
Var nll(Var logits, Eigen::Index n_valid, Eigen::Index gold);
Var nll(Var logits, const std::vector<bool>& allowed, Eigen::Index gold);

// LSTM cell pieces. `gates` is 4H x 1 laid out as [input; forget; cell;
// output] pre-activations. lstm_c returns f*c_prev + i*g (c_prev may be an
// empty Var, meaning zero); lstm_h returns o*tanh(c).
Var lstm_c(Var gates, Var c_prev);
Var lstm_h(Var gates, Var c);

// Inverted dropout with a freshly drawn mask; identity when rate == 0.
Var dropout(Var a, double rate, Rng& rng);

// Column j of the result stacks columns j-h..j+h of `a` (h = window/2),
// zero outside [0, n). window must be odd.
Var unfold_cols(Var a, int window);

// Columns table[:, ids[k]]; gradients are scattered into the parameter.
Var lookup(Graph& g, Parameter& table, std::span<const int> ids);

// W x + b.
Var affine(Graph& g, Parameter& w, Parameter& b, Var x);

}  // namespace matscire::nn
