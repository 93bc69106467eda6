#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace jigsaw {

class Rng;

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;

  Eigen::Index inputs() const { return weight.cols(); }
  Eigen::Index outputs() const { return weight.rows(); }
  bool operator==(const DenseLayer& other) const { return weight == other.weight && bias == other.bias; }
};

// Fully connected stack operating on column batches (features x batch).
// ReLU follows every hidden layer and, when relu_output is set, the last one.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then the output of every layer
  };

  Mlp() = default;
  Mlp(std::vector<int> widths, bool relu_output);

  // Kaiming-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
  void initialize(Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Cache* cache = nullptr) const;

  // Accumulates parameter gradients into `grads` (same shape as this network)
  // and returns the gradient w.r.t. the input batch.
  Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& grad_output, Mlp& grads) const;

  Mlp zeros_like() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  bool relu_output() const { return relu_output_; }
  int input_width() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().inputs()); }
  int output_width() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().outputs()); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  bool operator==(const Mlp& other) const { return relu_output_ == other.relu_output_ && layers_ == other.layers_; }

 private:
  std::vector<DenseLayer> layers_;
  bool relu_output_ = false;
};

// Adam with bias correction over every parameter of a set of networks.
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam(std::vector<Mlp*> params, Options opts);

  // One update from gradients laid out like the parameters.
  void step(const std::vector<const Mlp*>& grads);

 private:
  std::vector<Mlp*> params_;
  std::vector<Mlp> first_moment_;
  std::vector<Mlp> second_moment_;
  Options opts_;
  long step_count_ = 0;
};

}  // namespace jigsaw
