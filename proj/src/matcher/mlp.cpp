#include "jigsaw/matcher/mlp.hpp"

#include <cmath>

#include "jigsaw/error.hpp"
#include "jigsaw/rng.hpp"

namespace jigsaw {

Mlp::Mlp(std::vector<int> widths, bool relu_output) : relu_output_(relu_output) {
  if (widths.size() < 2) throw Error(Errc::InvalidArgument, "an MLP needs at least input and output widths");
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    if (widths[k] <= 0 || widths[k + 1] <= 0) throw Error(Errc::InvalidArgument, "layer widths must be positive");
    layers_.push_back({Eigen::MatrixXd::Zero(widths[k + 1], widths[k]), Eigen::VectorXd::Zero(widths[k + 1])});
  }
}

void Mlp::initialize(Rng& rng) {
  for (DenseLayer& layer : layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.inputs()));
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = rng.uniform(-bound, bound);
    layer.bias.setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Cache* cache) const {
  if (input.rows() != input_width()) throw Error(Errc::ShapeMismatch, "MLP input width mismatch");
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(input);
  }
  Eigen::MatrixXd x = input;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Eigen::MatrixXd y = layers_[k].weight * x;
    y.colwise() += layers_[k].bias;
    if (k + 1 < layers_.size() || relu_output_) y = y.cwiseMax(0.0);
    x = std::move(y);
    if (cache) cache->activations.push_back(x);
  }
  return x;
}

Eigen::MatrixXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_output, Mlp& grads) const {
  Eigen::MatrixXd g = grad_output;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Eigen::MatrixXd& out = cache.activations[k + 1];
    if (k + 1 < layers_.size() || relu_output_) g = g.cwiseProduct((out.array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd& in = cache.activations[k];
    grads.layers_[k].weight.noalias() += g * in.transpose();
    grads.layers_[k].bias += g.rowwise().sum();
    g = layers_[k].weight.transpose() * g;
  }
  return g;
}

Mlp Mlp::zeros_like() const {
  Mlp out = *this;
  for (DenseLayer& layer : out.layers_) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (const DenseLayer& layer : layers_) count += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return count;
}

bool Mlp::all_finite() const {
  for (const DenseLayer& layer : layers_) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

Adam::Adam(std::vector<Mlp*> params, Options opts) : params_(std::move(params)), opts_(opts) {
  for (const Mlp* p : params_) {
    first_moment_.push_back(p->zeros_like());
    second_moment_.push_back(p->zeros_like());
  }
}

void Adam::step(const std::vector<const Mlp*>& grads) {
  if (grads.size() != params_.size()) throw Error(Errc::SizeMismatch, "gradient set does not match parameters");
  ++step_count_;
  const double correction1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_count_));
  const double correction2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_count_));
  auto update = [&](Eigen::Ref<Eigen::MatrixXd> param, Eigen::Ref<const Eigen::MatrixXd> grad, Eigen::Ref<Eigen::MatrixXd> m,
                    Eigen::Ref<Eigen::MatrixXd> v) {
    m = opts_.beta1 * m + (1.0 - opts_.beta1) * grad;
    v = opts_.beta2 * v + (1.0 - opts_.beta2) * grad.cwiseAbs2();
    param.array() -= opts_.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + opts_.epsilon);
  };
  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto& layers = params_[p]->layers();
    const auto& glayers = grads[p]->layers();
    auto& mlayers = first_moment_[p].layers();
    auto& vlayers = second_moment_[p].layers();
    for (std::size_t k = 0; k < layers.size(); ++k) {
      update(layers[k].weight, glayers[k].weight, mlayers[k].weight, vlayers[k].weight);
      update(layers[k].bias, glayers[k].bias, mlayers[k].bias, vlayers[k].bias);
    }
  }
}

}  // namespace jigsaw
