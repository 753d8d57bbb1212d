#pragma once

// Plain-loop reference implementations used to cross-check the graph ops.

#include <cmath>
#include <vector>

#include "matscire/nn/layers.hpp"

namespace matscire::testing {

using Vec = std::vector<double>;

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// W (rows x cols) times x, plus optional bias column.
inline Vec affine_loop(const nn::Matrix& w, const Vec& x, const nn::Matrix* b = nullptr) {
  Vec out(static_cast<std::size_t>(w.rows()), 0.0);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    double s = b ? (*b)(r, 0) : 0.0;
    for (Eigen::Index c = 0; c < w.cols(); ++c) s += w(r, c) * x[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = s;
  }
  return out;
}

inline Vec concat(const Vec& a, const Vec& b) {
  Vec out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline Vec softmax_loop(const Vec& x, std::size_t valid) {
  Vec out(x.size(), 0.0);
  double mx = x[0];
  for (std::size_t i = 1; i < valid; ++i) mx = std::max(mx, x[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < valid; ++i) z += std::exp(x[i] - mx);
  for (std::size_t i = 0; i < valid; ++i) out[i] = std::exp(x[i] - mx) / z;
  return out;
}

struct LoopState {
  Vec h, c;
};

inline LoopState lstm_step_loop(const nn::Lstm& cell, const Vec& x, const LoopState& prev) {
  const int H = cell.hidden();
  const Vec h0 = prev.h.empty() ? Vec(static_cast<std::size_t>(H), 0.0) : prev.h;
  const Vec c0 = prev.c.empty() ? Vec(static_cast<std::size_t>(H), 0.0) : prev.c;
  const Vec gx = affine_loop(cell.wx->value, x, &cell.b->value);
  const Vec gh = affine_loop(cell.wh->value, h0);
  LoopState out{Vec(static_cast<std::size_t>(H)), Vec(static_cast<std::size_t>(H))};
  for (int j = 0; j < H; ++j) {
    auto pre = [&](int block) {
      const auto r = static_cast<std::size_t>(block * H + j);
      return gx[r] + gh[r];
    };
    const double c = logistic(pre(1)) * c0[static_cast<std::size_t>(j)] +
                     logistic(pre(0)) * std::tanh(pre(2));
    out.c[static_cast<std::size_t>(j)] = c;
    out.h[static_cast<std::size_t>(j)] = logistic(pre(3)) * std::tanh(c);
  }
  return out;
}

// Columns of xs in, one hidden vector per column out.
inline std::vector<Vec> lstm_sequence_loop(const nn::Lstm& cell, const std::vector<Vec>& xs,
                                           bool reverse) {
  std::vector<Vec> out(xs.size());
  LoopState s;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const std::size_t t = reverse ? xs.size() - 1 - k : k;
    s = lstm_step_loop(cell, xs[t], s);
    out[t] = s.h;
  }
  return out;
}

inline std::vector<Vec> bilstm_loop(const nn::BiLstm& bi, const std::vector<Vec>& xs) {
  const auto f = lstm_sequence_loop(bi.fwd, xs, false);
  const auto b = lstm_sequence_loop(bi.bwd, xs, true);
  std::vector<Vec> out;
  for (std::size_t t = 0; t < xs.size(); ++t) out.push_back(concat(f[t], b[t]));
  return out;
}

inline Vec to_vec(const Eigen::MatrixXd& m) { return Vec(m.data(), m.data() + m.size()); }

inline double max_abs_diff(const Vec& a, const Eigen::VectorXd& b) {
  double d = a.size() == static_cast<std::size_t>(b.size()) ? 0.0 : 1e300;
  for (std::size_t i = 0; i < a.size() && i < static_cast<std::size_t>(b.size()); ++i) {
    d = std::max(d, std::abs(a[i] - b(static_cast<Eigen::Index>(i))));
  }
  return d;
}

}  // namespace matscire::testing
