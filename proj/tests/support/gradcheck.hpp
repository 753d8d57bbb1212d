#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "matscire/nn/graph.hpp"
#include "matscire/nn/parameters.hpp"
#include "matscire/random.hpp"

namespace matscire::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;
  int checked = 0;
  int significant = 0;  // coordinates whose numeric gradient exceeds 1e-5
  double max_abs_diff = 0.0;
};

// Differences below `floor` are treated as agreement; central differences
// cannot resolve them.
inline double rel_error(double analytic, double numeric, double floor = 1e-7) {
  const double d = std::abs(analytic - numeric);
  if (d < floor) return 0.0;
  return d / std::max(std::abs(analytic) + std::abs(numeric), 1e-12);
}

using InputLoss = std::function<nn::Var(nn::Graph&, const std::vector<nn::Var>&)>;

inline double eval_loss(const InputLoss& f, const std::vector<nn::Matrix>& inputs) {
  nn::Graph g(false);
  std::vector<nn::Var> vars;
  for (const auto& m : inputs) vars.push_back(g.input(m));
  return f(g, vars).value()(0, 0);
}

// Gradients w.r.t. graph inputs against central differences.
inline GradCheck check_inputs(const InputLoss& f, std::vector<nn::Matrix> inputs, double h = 1e-6) {
  nn::Graph g;
  std::vector<nn::Var> vars;
  for (const auto& m : inputs) vars.push_back(g.input(m));
  g.backward(f(g, vars));
  GradCheck out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const nn::Matrix analytic = g.grad(vars[k]);
    for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
      const double x = inputs[k].data()[i];
      inputs[k].data()[i] = x + h;
      const double up = eval_loss(f, inputs);
      inputs[k].data()[i] = x - h;
      const double down = eval_loss(f, inputs);
      inputs[k].data()[i] = x;
      const double e = rel_error(analytic.data()[i], (up - down) / (2 * h));
      ++out.checked;
      if (e > out.max_rel_error) {
        out.max_rel_error = e;
        out.worst = "input " + std::to_string(k) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

// Gradients w.r.t. parameters; `per_param` entries sampled from each tensor
// (all entries when the tensor is smaller).
inline GradCheck check_params(nn::ParameterSet& ps, const std::function<nn::Var(nn::Graph&)>& f,
                              int per_param, std::uint64_t seed, double h = 1e-6) {
  ps.zero_grad();
  {
    nn::Graph g;
    g.backward(f(g));
  }
  auto loss = [&] {
    nn::Graph g(false);
    return f(g).value()(0, 0);
  };
  Rng rng(seed);
  GradCheck out;
  for (auto& p : ps.all()) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(p.value.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
    rng.shuffle(idx);
    if (static_cast<int>(idx.size()) > per_param) idx.resize(static_cast<std::size_t>(per_param));
    for (Eigen::Index i : idx) {
      const double x = p.value.data()[i];
      p.value.data()[i] = x + h;
      const double up = loss();
      p.value.data()[i] = x - h;
      const double down = loss();
      p.value.data()[i] = x;
      const double numeric = (up - down) / (2 * h);
      const double e = rel_error(p.grad.data()[i], numeric);
      ++out.checked;
      out.significant += std::abs(numeric) > 1e-5;
      out.max_abs_diff = std::max(out.max_abs_diff, std::abs(p.grad.data()[i] - numeric));
      if (e > out.max_rel_error) {
        out.max_rel_error = e;
        out.worst = p.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

inline nn::Matrix random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  nn::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

}  // namespace matscire::testing
