#pragma once

#include <Eigen/Dense>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "matscire/random.hpp"

namespace matscire::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  // Adam moments.
  Matrix m;
  Matrix v;
};

// Named parameters in registration order. Element addresses are stable.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;

  // Zero-initialised; throws on a duplicate name.
  Parameter& add(const std::string& name, int rows, int cols);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::deque<Parameter>& all() { return params_; }
  const std::deque<Parameter>& all() const { return params_; }
  std::size_t num_scalars() const;

  void zero_grad();
  double grad_norm() const;
  // Rescales all gradients so their joint L2 norm is at most `max_norm`.
  // Returns the norm before clipping.
  double clip_grad_norm(double max_norm);
  bool grads_finite() const;

  std::vector<Matrix> snapshot() const;
  void restore(const std::vector<Matrix>& values);

 private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

void init_uniform(Parameter& p, double scale, Rng& rng);
// U(-a, a) with a = sqrt(6 / (rows + cols)).
void init_glorot(Parameter& p, Rng& rng);

class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParameterSet& params);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace matscire::nn
