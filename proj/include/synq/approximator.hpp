#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "synq/dynamics.hpp"

namespace synq {

enum class Activation { Relu, Tanh, Identity };

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::Identity;

  bool operator==(const LayerSpec&) const = default;
};

struct Layer {
  LayerSpec spec;
  Eigen::MatrixXd weight;  // output_dim x input_dim
  Eigen::VectorXd bias;
};

/// Flat parameter array tagged with a stable name; used for checkpoints.
struct NamedArray {
  std::string name;
  std::vector<double> values;

  bool operator==(const NamedArray&) const = default;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-layer gradients of a scalar objective plus the gradient with respect to
/// the network input (one column per sample).
struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input;
};

/// Activations recorded by a forward pass, consumed by backward().
struct Tape {
  std::vector<Eigen::MatrixXd> inputs;   // input to each layer
  std::vector<Eigen::MatrixXd> outputs;  // post-activation output of each layer
};

class Network {
 public:
  Network() = default;
  /// Uniform fan-in initialisation: U(-1/sqrt(in), 1/sqrt(in)) for weights and
  /// biases, drawn layer by layer, weights before biases.
  Network(std::vector<LayerSpec> specs, Rng& rng);
  /// Zero-initialised network with the given architecture.
  explicit Network(std::vector<LayerSpec> specs);

  std::size_t input_dim() const { return layers_.front().spec.input_dim; }
  std::size_t output_dim() const { return layers_.back().spec.output_dim; }
  std::size_t parameter_count() const;

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<LayerSpec> specs() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  /// Batched evaluation, one sample per column.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, Tape& tape) const;

  /// Reverse-mode gradients of sum(output .* upstream) over the batch. With
  /// `parameter_grads` false only the input gradient is produced.
  Gradients backward(const Tape& tape, const Eigen::MatrixXd& upstream,
                     bool parameter_grads = true) const;

  std::vector<NamedArray> export_parameters(const std::string& prefix) const;
  /// Loads arrays named as by export_parameters(prefix). Throws
  /// DimensionMismatch on missing names or wrong lengths.
  void import_parameters(const std::vector<NamedArray>& arrays,
                         const std::string& prefix);

  bool operator==(const Network& other) const;

 private:
  void check_input(Eigen::Index rows) const;

  std::vector<Layer> layers_;
};

/// Adam optimiser state for one network.
struct OptimizerState {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Eigen::MatrixXd> m_weight, v_weight;
  std::vector<Eigen::VectorXd> m_bias, v_bias;

  static OptimizerState for_network(const Network& net, double learning_rate);

  std::vector<NamedArray> export_state(const std::string& prefix) const;
  void import_state(const std::vector<NamedArray>& arrays, const std::string& prefix);
};

/// One bias-corrected Adam descent step along `grads`.
void optimizer_step(Network& net, const Gradients& grads, OptimizerState& opt);

/// target <- tau * source + (1 - tau) * target, parameter-wise.
void soft_update(Network& target, const Network& source, double tau);

/// Hidden-layer stack with the given output activation.
std::vector<LayerSpec> mlp_specs(std::size_t input_dim,
                                 const std::vector<std::size_t>& hidden,
                                 std::size_t output_dim, Activation hidden_act,
                                 Activation output_act);

}  // namespace synq
