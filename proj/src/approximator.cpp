#include "synq/approximator.hpp"

#include <cmath>

namespace synq {

namespace {

void activate(Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::Relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::Tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::Identity:
      break;
  }
}

// Multiplies the upstream gradient by the activation derivative, expressed in
// terms of the activation output.
void activation_backward(Eigen::MatrixXd& grad, const Eigen::MatrixXd& out,
                         Activation act) {
  switch (act) {
    case Activation::Relu:
      grad = (out.array() > 0.0).select(grad, 0.0);
      break;
    case Activation::Tanh:
      grad.array() *= 1.0 - out.array().square();
      break;
    case Activation::Identity:
      break;
  }
}

const NamedArray& find_array(const std::vector<NamedArray>& arrays,
                             const std::string& name, std::size_t expected) {
  for (const auto& a : arrays) {
    if (a.name == name) {
      if (a.values.size() != expected)
        throw DimensionMismatch("array '" + name + "' has " +
                                std::to_string(a.values.size()) + " values, expected " +
                                std::to_string(expected));
      return a;
    }
  }
  throw DimensionMismatch("missing parameter array '" + name + "'");
}

template <typename Derived>
std::vector<double> flatten(const Eigen::MatrixBase<Derived>& m) {
  // Column-major, matching Eigen's storage order.
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::MatrixXd>(out.data(), m.rows(), m.cols()) = m;
  return out;
}

std::string layer_key(const std::string& prefix, std::size_t i, const char* what) {
  return prefix + ".layer" + std::to_string(i) + "." + what;
}

}  // namespace

std::vector<LayerSpec> mlp_specs(std::size_t input_dim,
                                 const std::vector<std::size_t>& hidden,
                                 std::size_t output_dim, Activation hidden_act,
                                 Activation output_act) {
  std::vector<LayerSpec> specs;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    specs.push_back({in, h, hidden_act});
    in = h;
  }
  specs.push_back({in, output_dim, output_act});
  return specs;
}

Network::Network(std::vector<LayerSpec> specs) {
  if (specs.empty()) throw DimensionMismatch("network needs at least one layer");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (s.input_dim == 0 || s.output_dim == 0)
      throw DimensionMismatch("layer dimensions must be positive");
    if (i > 0 && specs[i - 1].output_dim != s.input_dim)
      throw DimensionMismatch("layer " + std::to_string(i) +
                              " input does not match previous output");
    Layer layer;
    layer.spec = s;
    layer.weight = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.output_dim),
                                         static_cast<Eigen::Index>(s.input_dim));
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.output_dim));
    layers_.push_back(std::move(layer));
  }
}

Network::Network(std::vector<LayerSpec> specs, Rng& rng) : Network(std::move(specs)) {
  for (auto& layer : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.spec.input_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = dist(rng);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = dist(rng);
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_)
    n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<LayerSpec> Network::specs() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers_) out.push_back(l.spec);
  return out;
}

void Network::check_input(Eigen::Index rows) const {
  if (layers_.empty()) throw DimensionMismatch("empty network");
  if (rows != static_cast<Eigen::Index>(input_dim()))
    throw DimensionMismatch("input has " + std::to_string(rows) + " rows, network expects " +
                            std::to_string(input_dim()));
}

Eigen::VectorXd Network::forward(const Eigen::VectorXd& input) const {
  Eigen::MatrixXd batch = input;
  return forward(batch).col(0);
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& batch) const {
  check_input(batch.rows());
  Eigen::MatrixXd h = batch;
  for (const auto& l : layers_) {
    Eigen::MatrixXd z = l.weight * h;
    z.colwise() += l.bias;
    activate(z, l.spec.activation);
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& batch, Tape& tape) const {
  check_input(batch.rows());
  tape.inputs.clear();
  tape.outputs.clear();
  const Eigen::MatrixXd* h = &batch;
  for (const auto& l : layers_) {
    tape.inputs.push_back(*h);
    Eigen::MatrixXd z = l.weight * *h;
    z.colwise() += l.bias;
    activate(z, l.spec.activation);
    tape.outputs.push_back(std::move(z));
    h = &tape.outputs.back();
  }
  return tape.outputs.back();
}

Gradients Network::backward(const Tape& tape, const Eigen::MatrixXd& upstream,
                           bool parameter_grads) const {
  if (tape.outputs.size() != layers_.size())
    throw DimensionMismatch("tape does not belong to this network");
  if (upstream.rows() != tape.outputs.back().rows() ||
      upstream.cols() != tape.outputs.back().cols())
    throw DimensionMismatch("upstream gradient shape does not match network output");

  Gradients g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    activation_backward(delta, tape.outputs[k], l.spec.activation);
    if (parameter_grads) {
      g.weight[k].noalias() = delta * tape.inputs[k].transpose();
      g.bias[k] = delta.rowwise().sum();
    }
    Eigen::MatrixXd next;
    next.noalias() = l.weight.transpose() * delta;
    delta = std::move(next);
  }
  g.input = std::move(delta);
  return g;
}

std::vector<NamedArray> Network::export_parameters(const std::string& prefix) const {
  std::vector<NamedArray> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.push_back({layer_key(prefix, i, "weight"), flatten(layers_[i].weight)});
    out.push_back({layer_key(prefix, i, "bias"), flatten(layers_[i].bias)});
  }
  return out;
}

void Network::import_parameters(const std::vector<NamedArray>& arrays,
                                const std::string& prefix) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& l = layers_[i];
    const auto& w = find_array(arrays, layer_key(prefix, i, "weight"),
                               static_cast<std::size_t>(l.weight.size()));
    const auto& b = find_array(arrays, layer_key(prefix, i, "bias"),
                               static_cast<std::size_t>(l.bias.size()));
    l.weight = Eigen::Map<const Eigen::MatrixXd>(w.values.data(), l.weight.rows(),
                                                 l.weight.cols());
    l.bias = Eigen::Map<const Eigen::VectorXd>(b.values.data(), l.bias.size());
  }
}

bool Network::operator==(const Network& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (!(a.spec == b.spec) || a.weight != b.weight || a.bias != b.bias) return false;
  }
  return true;
}

OptimizerState OptimizerState::for_network(const Network& net, double learning_rate) {
  OptimizerState s;
  s.learning_rate = learning_rate;
  for (const auto& l : net.layers()) {
    s.m_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    s.v_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    s.m_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    s.v_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return s;
}

std::vector<NamedArray> OptimizerState::export_state(const std::string& prefix) const {
  std::vector<NamedArray> out;
  out.push_back({prefix + ".step", {static_cast<double>(step)}});
  for (std::size_t i = 0; i < m_weight.size(); ++i) {
    out.push_back({layer_key(prefix, i, "m_weight"), flatten(m_weight[i])});
    out.push_back({layer_key(prefix, i, "v_weight"), flatten(v_weight[i])});
    out.push_back({layer_key(prefix, i, "m_bias"), flatten(m_bias[i])});
    out.push_back({layer_key(prefix, i, "v_bias"), flatten(v_bias[i])});
  }
  return out;
}

void OptimizerState::import_state(const std::vector<NamedArray>& arrays,
                                  const std::string& prefix) {
  step = static_cast<std::uint64_t>(find_array(arrays, prefix + ".step", 1).values[0]);
  auto load_matrix = [&](Eigen::MatrixXd& m, const std::string& key) {
    const auto& a = find_array(arrays, key, static_cast<std::size_t>(m.size()));
    m = Eigen::Map<const Eigen::MatrixXd>(a.values.data(), m.rows(), m.cols());
  };
  auto load_vector = [&](Eigen::VectorXd& v, const std::string& key) {
    const auto& a = find_array(arrays, key, static_cast<std::size_t>(v.size()));
    v = Eigen::Map<const Eigen::VectorXd>(a.values.data(), v.size());
  };
  for (std::size_t i = 0; i < m_weight.size(); ++i) {
    load_matrix(m_weight[i], layer_key(prefix, i, "m_weight"));
    load_matrix(v_weight[i], layer_key(prefix, i, "v_weight"));
    load_vector(m_bias[i], layer_key(prefix, i, "m_bias"));
    load_vector(v_bias[i], layer_key(prefix, i, "v_bias"));
  }
}

void optimizer_step(Network& net, const Gradients& grads, OptimizerState& opt) {
  auto& layers = net.layers();
  if (grads.weight.size() != layers.size() || opt.m_weight.size() != layers.size())
    throw DimensionMismatch("gradient/optimizer shape does not match network");
  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  const double b1 = opt.beta1;
  const double b2 = opt.beta2;
  const double lr = opt.learning_rate;
  const double eps = opt.epsilon;
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, grads.weight[i], opt.m_weight[i], opt.v_weight[i]);
    update(layers[i].bias, grads.bias[i], opt.m_bias[i], opt.v_bias[i]);
  }
}

void soft_update(Network& target, const Network& source, double tau) {
  if (target.specs() != source.specs())
    throw DimensionMismatch("soft_update requires identical architectures");
  auto& t = target.layers();
  const auto& s = source.layers();
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i].weight = tau * s[i].weight + (1.0 - tau) * t[i].weight;
    t[i].bias = tau * s[i].bias + (1.0 - tau) * t[i].bias;
  }
}

}  // namespace synq
