#include "matscire/nn/graph.hpp"

#include <cmath>
#include <limits>

#include "matscire/types.hpp"

namespace matscire::nn {
namespace {

Graph& graph_of(Var a) {
  if (!a.graph) throw Error("use of an empty Var");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  if (a.graph != b.graph || !a.graph) throw Error("Vars belong to different graphs");
  return *a.graph;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("shape error in ") + what);
}

}  // namespace

const Matrix& Var::value() const { return graph->value(*this); }

Var Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::input(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.needs_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_[&p] = id;
  return {this, id};
}

Var Graph::make(Matrix value, std::initializer_list<Var> inputs, Backward back) {
  return make(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
              std::move(back));
}

Var Graph::make(Matrix value, std::span<const Var> inputs, Backward back) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) {
    for (const Var& v : inputs) {
      if (v.graph != this) throw Error("Vars belong to different graphs");
      if (nodes_[static_cast<std::size_t>(v.id)].needs_grad) n.needs_grad = true;
    }
    if (n.needs_grad) n.back = std::move(back);
  }
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Matrix& Graph::grad_buffer(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value_ref().rows(), n.value_ref().cols());
  return n.grad;
}

Matrix Graph::grad(Var v) const {
  const Node& n = node(v.id);
  if (n.grad.size() == 0) return Matrix::Zero(n.value_ref().rows(), n.value_ref().cols());
  return n.grad;
}

void Graph::backward(Var loss) {
  if (!grad_enabled_) throw Error("backward() on a graph without gradients");
  if (loss.graph != this) throw Error("loss belongs to another graph");
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) throw Error("backward() needs a 1x1 loss");
  grad_buffer(loss.id)(0, 0) += 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0 || !n.needs_grad) continue;
    if (n.back) n.back(*this, id);
  }
  for (Node& n : nodes_) {
    if (n.param && n.grad.size() != 0) n.param->grad += n.grad;
  }
}

// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require(a.cols() == b.rows(), "matmul");
  const int ia = a.id, ib = b.id;
  return g.make(a.value() * b.value(), {a, b}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.needs_grad(ia)) g.grad_buffer(ia).noalias() += d * g.value_of(ib).transpose();
    if (g.needs_grad(ib)) g.grad_buffer(ib).noalias() += g.value_of(ia).transpose() * d;
  });
}

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add");
  const int ia = a.id, ib = b.id;
  return g.make(a.value() + b.value(), {a, b}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.needs_grad(ia)) g.grad_buffer(ia) += d;
    if (g.needs_grad(ib)) g.grad_buffer(ib) += d;
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub");
  const int ia = a.id, ib = b.id;
  return g.make(a.value() - b.value(), {a, b}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.needs_grad(ia)) g.grad_buffer(ia) += d;
    if (g.needs_grad(ib)) g.grad_buffer(ib) -= d;
  });
}

Var add_bias(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require(b.cols() == 1 && a.rows() == b.rows(), "add_bias");
  const int ia = a.id, ib = b.id;
  Matrix out = a.value();
  out.colwise() += b.value().col(0);
  return g.make(std::move(out), {a, b}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.needs_grad(ia)) g.grad_buffer(ia) += d;
    if (g.needs_grad(ib)) g.grad_buffer(ib) += d.rowwise().sum();
  });
}

Var cmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "cmul");
  const int ia = a.id, ib = b.id;
  return g.make(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.needs_grad(ia)) g.grad_buffer(ia) += d.cwiseProduct(g.value_of(ib));
    if (g.needs_grad(ib)) g.grad_buffer(ib) += d.cwiseProduct(g.value_of(ia));
  });
}

Var scale(Var a, double s) {
  Graph& g = graph_of(a);
  const int ia = a.id;
  return g.make(a.value() * s, {a}, [ia, s](Graph& g, int self) {
    g.grad_buffer(ia) += s * g.grad_of(self);
  });
}

Var tanh(Var a) {
  Graph& g = graph_of(a);
  const int ia = a.id;
  return g.make(a.value().array().tanh().matrix(), {a}, [ia](Graph& g, int self) {
    const Matrix& y = g.value_of(self);
    g.grad_buffer(ia).array() += g.grad_of(self).array() * (1.0 - y.array().square());
  });
}

Var sigmoid(Var a) {
  Graph& g = graph_of(a);
  const int ia = a.id;
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return g.make(std::move(y), {a}, [ia](Graph& g, int self) {
    const Matrix& y = g.value_of(self);
    g.grad_buffer(ia).array() += g.grad_of(self).array() * y.array() * (1.0 - y.array());
  });
}

Var vcat(std::initializer_list<Var> parts) {
  return vcat(std::span<const Var>(parts.begin(), parts.size()));
}

Var vcat(std::span<const Var> parts) {
  require(!parts.empty(), "vcat");
  Graph& g = graph_of(parts[0]);
  const Eigen::Index c = parts[0].cols();
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    require(p.cols() == c, "vcat");
    r += p.rows();
  }
  Matrix out(r, c);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    ids.push_back(p.id);
    offsets.push_back(off);
    off += p.rows();
  }
  return g.make(std::move(out), parts, [ids, offsets](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.needs_grad(ids[k])) continue;
      Matrix& gb = g.grad_buffer(ids[k]);
      gb += d.middleRows(offsets[k], gb.rows());
    }
  });
}

Var hcat(std::span<const Var> parts) {
  require(!parts.empty(), "hcat");
  Graph& g = graph_of(parts[0]);
  const Eigen::Index r = parts[0].rows();
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    require(p.rows() == r, "hcat");
    c += p.cols();
  }
  Matrix out(r, c);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    ids.push_back(p.id);
    offsets.push_back(off);
    off += p.cols();
  }
  return g.make(std::move(out), parts, [ids, offsets](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.needs_grad(ids[k])) continue;
      Matrix& gb = g.grad_buffer(ids[k]);
      gb += d.middleCols(offsets[k], gb.cols());
    }
  });
}

Var col(Var a, Eigen::Index j) { return cols(a, j, 1); }

Var cols(Var a, Eigen::Index j, Eigen::Index count) {
  Graph& g = graph_of(a);
  require(j >= 0 && count >= 1 && j + count <= a.cols(), "cols");
  const int ia = a.id;
  return g.make(a.value().middleCols(j, count), {a}, [ia, j, count](Graph& g, int self) {
    g.grad_buffer(ia).middleCols(j, count) += g.grad_of(self);
  });
}

Var row_as_col(Var a, Eigen::Index i) {
  Graph& g = graph_of(a);
  require(i >= 0 && i < a.rows(), "row_as_col");
  const int ia = a.id;
  return g.make(a.value().row(i).transpose(), {a}, [ia, i](Graph& g, int self) {
    g.grad_buffer(ia).row(i) += g.grad_of(self).col(0).transpose();
  });
}

Var repeat_cols(Var v, Eigen::Index n) {
  Graph& g = graph_of(v);
  require(v.cols() == 1 && n >= 1, "repeat_cols");
  const int iv = v.id;
  return g.make(v.value().replicate(1, n), {v}, [iv](Graph& g, int self) {
    g.grad_buffer(iv) += g.grad_of(self).rowwise().sum();
  });
}

Var transpose(Var a) {
  Graph& g = graph_of(a);
  const int ia = a.id;
  return g.make(a.value().transpose(), {a}, [ia](Graph& g, int self) {
    g.grad_buffer(ia) += g.grad_of(self).transpose();
  });
}

Var max_cols(Var a) {
  Graph& g = graph_of(a);
  const Matrix& x = a.value();
  require(x.cols() >= 1, "max_cols");
  Matrix out(x.rows(), 1);
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < x.cols(); ++j) {
      if (x(i, j) > x(i, best)) best = j;
    }
    arg[static_cast<std::size_t>(i)] = best;
    out(i, 0) = x(i, best);
  }
  const int ia = a.id;
  return g.make(std::move(out), {a}, [ia, arg](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    Matrix& gb = g.grad_buffer(ia);
    for (std::size_t i = 0; i < arg.size(); ++i) {
      gb(static_cast<Eigen::Index>(i), arg[i]) += d(static_cast<Eigen::Index>(i), 0);
    }
  });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  const int ia = a.id;
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return g.make(std::move(out), {a}, [ia](Graph& g, int self) {
    g.grad_buffer(ia).array() += g.grad_of(self)(0, 0);
  });
}

Var sum(std::span<const Var> scalars) {
  require(!scalars.empty(), "sum");
  Graph& g = graph_of(scalars[0]);
  Matrix out = Matrix::Zero(1, 1);
  std::vector<int> ids;
  for (const Var& s : scalars) {
    require(s.rows() == 1 && s.cols() == 1, "sum");
    out(0, 0) += s.value()(0, 0);
    ids.push_back(s.id);
  }
  return g.make(std::move(out), scalars, [ids](Graph& g, int self) {
    const double d = g.grad_of(self)(0, 0);
    for (int id : ids) {
      if (g.needs_grad(id)) g.grad_buffer(id)(0, 0) += d;
    }
  });
}

namespace {

std::vector<bool> prefix_mask(Eigen::Index n, Eigen::Index n_valid) {
  std::vector<bool> m(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < std::min(n, n_valid); ++i) m[static_cast<std::size_t>(i)] = true;
  return m;
}

Matrix softmax_values(const Matrix& x, const std::vector<bool>& allowed) {
  const Eigen::Index n = x.size();
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (allowed[static_cast<std::size_t>(i)]) mx = std::max(mx, x(i));
  }
  Matrix y = Matrix::Zero(x.rows(), x.cols());
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (allowed[static_cast<std::size_t>(i)]) {
      y(i) = std::exp(x(i) - mx);
      z += y(i);
    }
  }
  y /= z;
  return y;
}

void check_mask(const Var& x, const std::vector<bool>& allowed, const char* what) {
  require(x.rows() == 1 || x.cols() == 1, what);
  require(static_cast<std::size_t>(x.value().size()) == allowed.size(), what);
  bool any = false;
  for (bool b : allowed) any = any || b;
  if (!any) throw Error(std::string(what) + ": every position is masked");
}

}  // namespace

Var masked_softmax(Var x, Eigen::Index n_valid) {
  return masked_softmax(x, prefix_mask(x.value().size(), n_valid));
}

Var masked_softmax(Var x, const std::vector<bool>& allowed) {
  Graph& g = graph_of(x);
  check_mask(x, allowed, "masked_softmax");
  const int ix = x.id;
  return g.make(softmax_values(x.value(), allowed), {x}, [ix](Graph& g, int self) {
    const Matrix& y = g.value_of(self);
    const Matrix& d = g.grad_of(self);
    const double dot = y.cwiseProduct(d).sum();
    g.grad_buffer(ix).array() += y.array() * (d.array() - dot);
  });
}

Var nll(Var logits, Eigen::Index n_valid, Eigen::Index gold) {
  return nll(logits, prefix_mask(logits.value().size(), n_valid), gold);
}

Var nll(Var logits, const std::vector<bool>& allowed, Eigen::Index gold) {
  Graph& g = graph_of(logits);
  check_mask(logits, allowed, "nll");
  if (gold < 0 || gold >= logits.value().size() || !allowed[static_cast<std::size_t>(gold)]) {
    throw Error("gold index " + std::to_string(gold) + " outside the allowed positions");
  }
  const Matrix& x = logits.value();
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (allowed[static_cast<std::size_t>(i)]) mx = std::max(mx, x(i));
  }
  double z = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (allowed[static_cast<std::size_t>(i)]) z += std::exp(x(i) - mx);
  }
  Matrix out(1, 1);
  out(0, 0) = mx + std::log(z) - x(gold);
  const int il = logits.id;
  return g.make(std::move(out), {logits}, [il, allowed, gold](Graph& g, int self) {
    Matrix p = softmax_values(g.value_of(il), allowed);
    p(gold) -= 1.0;
    g.grad_buffer(il) += g.grad_of(self)(0, 0) * p;
  });
}

Var lstm_c(Var gates, Var c_prev) {
  Graph& g = graph_of(gates);
  require(gates.cols() == 1 && gates.rows() % 4 == 0, "lstm_c");
  const Eigen::Index h = gates.rows() / 4;
  const Matrix& z = gates.value();
  const Matrix i = (1.0 / (1.0 + (-z.topRows(h).array()).exp())).matrix();
  const Matrix f = (1.0 / (1.0 + (-z.middleRows(h, h).array()).exp())).matrix();
  const Matrix gg = z.middleRows(2 * h, h).array().tanh().matrix();
  Matrix c = i.cwiseProduct(gg);
  const bool has_prev = static_cast<bool>(c_prev);
  if (has_prev) {
    require(c_prev.rows() == h && c_prev.cols() == 1, "lstm_c");
    c += f.cwiseProduct(c_prev.value());
  }
  const int iz = gates.id, ic = has_prev ? c_prev.id : -1;
  auto back = [iz, ic, h, i, f, gg](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.needs_grad(iz)) {
      Matrix& gz = g.grad_buffer(iz);
      gz.topRows(h).array() += d.array() * gg.array() * i.array() * (1.0 - i.array());
      if (ic >= 0) {
        gz.middleRows(h, h).array() +=
            d.array() * g.value_of(ic).array() * f.array() * (1.0 - f.array());
      }
      gz.middleRows(2 * h, h).array() += d.array() * i.array() * (1.0 - gg.array().square());
    }
    if (ic >= 0 && g.needs_grad(ic)) g.grad_buffer(ic) += d.cwiseProduct(f);
  };
  if (has_prev) return g.make(std::move(c), {gates, c_prev}, back);
  return g.make(std::move(c), {gates}, back);
}

Var lstm_h(Var gates, Var c) {
  Graph& g = graph_of(gates, c);
  require(gates.cols() == 1 && gates.rows() == 4 * c.rows() && c.cols() == 1, "lstm_h");
  const Eigen::Index h = c.rows();
  const Matrix o = (1.0 / (1.0 + (-gates.value().bottomRows(h).array()).exp())).matrix();
  const Matrix tc = c.value().array().tanh().matrix();
  const int iz = gates.id, ic = c.id;
  return g.make(o.cwiseProduct(tc), {gates, c}, [iz, ic, h, o, tc](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.needs_grad(iz)) {
      g.grad_buffer(iz).bottomRows(h).array() +=
          d.array() * tc.array() * o.array() * (1.0 - o.array());
    }
    if (g.needs_grad(ic)) {
      g.grad_buffer(ic).array() += d.array() * o.array() * (1.0 - tc.array().square());
    }
  });
}

Var dropout(Var a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw Error("dropout rate must be below 1");
  Graph& g = graph_of(a);
  Matrix mask(a.rows(), a.cols());
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index j = 0; j < mask.cols(); ++j) {
    for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = rng.bernoulli(rate) ? 0.0 : keep;
  }
  const int ia = a.id;
  Matrix out = a.value().cwiseProduct(mask);
  return g.make(std::move(out), {a}, [ia, mask](Graph& g, int self) {
    g.grad_buffer(ia) += g.grad_of(self).cwiseProduct(mask);
  });
}

Var unfold_cols(Var a, int window) {
  Graph& g = graph_of(a);
  require(window >= 1 && window % 2 == 1, "unfold_cols");
  const Eigen::Index d = a.rows(), n = a.cols(), half = window / 2;
  const Matrix& x = a.value();
  Matrix out = Matrix::Zero(d * window, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < window; ++k) {
      const Eigen::Index src = j - half + k;
      if (src >= 0 && src < n) out.block(k * d, j, d, 1) = x.col(src);
    }
  }
  const int ia = a.id;
  return g.make(std::move(out), {a}, [ia, d, n, half, window](Graph& g, int self) {
    const Matrix& dy = g.grad_of(self);
    Matrix& gx = g.grad_buffer(ia);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < window; ++k) {
        const Eigen::Index src = j - half + k;
        if (src >= 0 && src < n) gx.col(src) += dy.block(k * d, j, d, 1);
      }
    }
  });
}

Var lookup(Graph& g, Parameter& table, std::span<const int> ids) {
  require(!ids.empty(), "lookup");
  Matrix out(table.value.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || ids[k] >= table.value.cols()) {
      throw Error("lookup id " + std::to_string(ids[k]) + " outside table " + table.name);
    }
    out.col(static_cast<Eigen::Index>(k)) = table.value.col(ids[k]);
  }
  if (!g.grad_enabled()) return g.constant(std::move(out));
  std::vector<int> idv(ids.begin(), ids.end());
  Parameter* p = &table;
  // A gradient-carrying leaf whose backward scatters into the table.
  Var leaf = g.input(Matrix());
  (void)leaf;
  return g.make(std::move(out), {leaf}, [p, idv](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    for (std::size_t k = 0; k < idv.size(); ++k) {
      p->grad.col(idv[k]) += d.col(static_cast<Eigen::Index>(k));
    }
  });
}

Var affine(Graph& g, Parameter& w, Parameter& b, Var x) {
  return add_bias(matmul(g.param(w), x), g.param(b));
}

}  // namespace matscire::nn
