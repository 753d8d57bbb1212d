#include "matscire/nn/parameters.hpp"

#include <cmath>

#include "matscire/types.hpp"

namespace matscire::nn {

Parameter& ParameterSet::add(const std::string& name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw Error("parameter " + name + " has non-positive shape " + std::to_string(rows) + "x" +
                std::to_string(cols));
  }
  if (index_.count(name)) throw Error("duplicate parameter " + name);
  index_[name] = params_.size();
  Parameter& p = params_.emplace_back();
  p.name = name;
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  p.m = Matrix::Zero(rows, cols);
  p.v = Matrix::Zero(rows, cols);
  return p;
}

Parameter& ParameterSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter " + name);
  return params_[it->second];
}

const Parameter& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter " + name);
  return params_[it->second];
}

std::size_t ParameterSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

double ParameterSet::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) s += p.grad.squaredNorm();
  return std::sqrt(s);
}

double ParameterSet::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (max_norm > 0 && norm > max_norm) {
    const double k = max_norm / norm;
    for (auto& p : params_) p.grad *= k;
  }
  return norm;
}

bool ParameterSet::grads_finite() const {
  for (const auto& p : params_) {
    if (!p.grad.allFinite()) return false;
  }
  return true;
}

std::vector<Matrix> ParameterSet::snapshot() const {
  std::vector<Matrix> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void ParameterSet::restore(const std::vector<Matrix>& values) {
  if (values.size() != params_.size()) throw Error("snapshot does not match parameter set");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].rows() != params_[i].value.rows() || values[i].cols() != params_[i].value.cols()) {
      throw Error("snapshot shape mismatch for " + params_[i].name);
    }
    params_[i].value = values[i];
  }
}

void init_uniform(Parameter& p, double scale, Rng& rng) {
  for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) p.value(i, j) = rng.uniform(-scale, scale);
  }
}

void init_glorot(Parameter& p, Rng& rng) {
  init_uniform(p, std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols())), rng);
}

void Adam::step(ParameterSet& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& p : params.all()) {
    p.m = beta1_ * p.m + (1.0 - beta1_) * p.grad;
    p.v = beta2_ * p.v + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr_ * (p.m.array() / c1) / ((p.v.array() / c2).sqrt() + eps_);
  }
}

}  // namespace matscire::nn
