#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "clap/rng.hpp"

namespace clap {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1, Tanh = 2, Sigmoid = 3 };

class NnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense multilayer perceptron. Layer l maps sizes[l] -> sizes[l+1] through
// weights[l] * x + biases[l] followed by activations[l]. Batched inputs are
// column vectors of a (input_size x batch) matrix.
template <typename Scalar>
struct Mlp {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<Matrix> weights;  // weights[l] is (out x in)
  std::vector<Vector> biases;
  std::vector<Activation> activations;

  int layer_count() const { return static_cast<int>(weights.size()); }
  int input_size() const { return static_cast<int>(weights.front().cols()); }
  int output_size() const { return static_cast<int>(weights.back().rows()); }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
  }

  std::vector<int> layer_sizes() const {
    std::vector<int> sizes;
    sizes.push_back(input_size());
    for (const auto& w : weights) sizes.push_back(static_cast<int>(w.rows()));
    return sizes;
  }
};

template <typename Scalar>
struct MlpGrads {
  std::vector<typename Mlp<Scalar>::Matrix> weights;
  std::vector<typename Mlp<Scalar>::Vector> biases;
};

// Outputs of every layer, input included; enough to run backward because all
// supported activation derivatives are expressible from the activation value.
template <typename Scalar>
struct ForwardCache {
  std::vector<typename Mlp<Scalar>::Matrix> outputs;  // outputs[0] = input, outputs[l+1] = layer l
};

template <typename Scalar>
Scalar apply_activation(Activation act, Scalar z) {
  switch (act) {
    case Activation::Identity: return z;
    case Activation::Relu: return z > Scalar(0) ? z : Scalar(0);
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return Scalar(1) / (Scalar(1) + std::exp(-z));
  }
  throw NnError("unknown activation");
}

// Derivative in terms of the activation output a = act(z).
template <typename Scalar>
Scalar activation_grad_from_output(Activation act, Scalar a) {
  switch (act) {
    case Activation::Identity: return Scalar(1);
    case Activation::Relu: return a > Scalar(0) ? Scalar(1) : Scalar(0);
    case Activation::Tanh: return Scalar(1) - a * a;
    case Activation::Sigmoid: return a * (Scalar(1) - a);
  }
  throw NnError("unknown activation");
}

// He-uniform initialization: weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
// biases zero. Pure function of (sizes, activations, seed).
template <typename Scalar>
Mlp<Scalar> make_mlp(const std::vector<int>& sizes, const std::vector<Activation>& activations,
                     std::uint64_t seed) {
  if (sizes.size() < 2) throw NnError("mlp needs at least one layer");
  if (activations.size() != sizes.size() - 1) throw NnError("one activation per layer required");
  for (int s : sizes) {
    if (s <= 0) throw NnError("layer sizes must be positive");
  }
  Mlp<Scalar> mlp;
  mlp.activations = activations;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    typename Mlp<Scalar>::Matrix w(out, in);
    for (int c = 0; c < in; ++c) {
      for (int r = 0; r < out; ++r) w(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
    }
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(Mlp<Scalar>::Vector::Zero(out));
  }
  return mlp;
}

template <typename Scalar>
MlpGrads<Scalar> zero_grads(const Mlp<Scalar>& mlp) {
  MlpGrads<Scalar> g;
  for (const auto& w : mlp.weights) g.weights.push_back(Mlp<Scalar>::Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : mlp.biases) g.biases.push_back(Mlp<Scalar>::Vector::Zero(b.size()));
  return g;
}

template <typename Scalar>
void accumulate_grads(MlpGrads<Scalar>& into, const MlpGrads<Scalar>& from) {
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    into.weights[l] += from.weights[l];
    into.biases[l] += from.biases[l];
  }
}

// Forward pass over a batch of column vectors; fills the cache for backward.
template <typename Scalar>
typename Mlp<Scalar>::Matrix forward(const Mlp<Scalar>& mlp,
                                     const typename Mlp<Scalar>::Matrix& input,
                                     ForwardCache<Scalar>* cache = nullptr) {
  if (input.rows() != mlp.input_size()) throw NnError("forward: input size mismatch");
  if (cache != nullptr) {
    cache->outputs.clear();
    cache->outputs.reserve(mlp.weights.size() + 1);
    cache->outputs.push_back(input);
  }
  typename Mlp<Scalar>::Matrix a = input;
  for (int l = 0; l < mlp.layer_count(); ++l) {
    typename Mlp<Scalar>::Matrix z = mlp.weights[l] * a;
    z.colwise() += mlp.biases[l];
    const Activation act = mlp.activations[l];
    a = z.unaryExpr([act](Scalar v) { return apply_activation(act, v); });
    if (cache != nullptr) cache->outputs.push_back(a);
  }
  return a;
}

// Exact analytic gradients of the composed function for the batch in `cache`.
// `output_grad` is dL/d(output), shape (output_size x batch). Returns dL/d(input)
// through `input_grad` when provided.
template <typename Scalar>
MlpGrads<Scalar> backward(const Mlp<Scalar>& mlp, const ForwardCache<Scalar>& cache,
                          const typename Mlp<Scalar>::Matrix& output_grad,
                          typename Mlp<Scalar>::Matrix* input_grad = nullptr) {
  if (cache.outputs.size() != mlp.weights.size() + 1) throw NnError("backward: cache mismatch");
  if (output_grad.rows() != mlp.output_size() || output_grad.cols() != cache.outputs.back().cols())
    throw NnError("backward: output grad shape mismatch");

  MlpGrads<Scalar> grads;
  grads.weights.resize(mlp.weights.size());
  grads.biases.resize(mlp.biases.size());

  typename Mlp<Scalar>::Matrix delta = output_grad;
  for (int l = mlp.layer_count() - 1; l >= 0; --l) {
    const auto& a = cache.outputs[static_cast<std::size_t>(l) + 1];
    const Activation act = mlp.activations[static_cast<std::size_t>(l)];
    // dL/dz = dL/da (.) act'(z), with act'(z) recovered from a.
    typename Mlp<Scalar>::Matrix dz =
        delta.cwiseProduct(a.unaryExpr([act](Scalar v) { return activation_grad_from_output(act, v); }));
    grads.weights[static_cast<std::size_t>(l)] = dz * cache.outputs[static_cast<std::size_t>(l)].transpose();
    grads.biases[static_cast<std::size_t>(l)] = dz.rowwise().sum();
    if (l > 0 || input_grad != nullptr) delta = mlp.weights[static_cast<std::size_t>(l)].transpose() * dz;
  }
  if (input_grad != nullptr) *input_grad = delta;
  return grads;
}

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  AdamConfig config;
  std::vector<typename Mlp<Scalar>::Matrix> m_weights, v_weights;
  std::vector<typename Mlp<Scalar>::Vector> m_biases, v_biases;
  long long step = 0;
};

template <typename Scalar>
AdamState<Scalar> make_adam(const Mlp<Scalar>& mlp, const AdamConfig& config = {}) {
  AdamState<Scalar> s;
  s.config = config;
  for (const auto& w : mlp.weights) {
    s.m_weights.push_back(Mlp<Scalar>::Matrix::Zero(w.rows(), w.cols()));
    s.v_weights.push_back(Mlp<Scalar>::Matrix::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : mlp.biases) {
    s.m_biases.push_back(Mlp<Scalar>::Vector::Zero(b.size()));
    s.v_biases.push_back(Mlp<Scalar>::Vector::Zero(b.size()));
  }
  return s;
}

namespace detail {

template <typename Derived, typename OtherDerived>
void adam_update_block(Eigen::MatrixBase<Derived>& param, const Eigen::MatrixBase<OtherDerived>& grad,
                       Eigen::MatrixBase<Derived>& m, Eigen::MatrixBase<Derived>& v,
                       const AdamConfig& cfg, double bias1, double bias2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  param.array() -= cfg.learning_rate * (m.array() / bias1) /
                   ((v.array() / bias2).sqrt() + cfg.epsilon);
}

}  // namespace detail

// Standard Adam with bias correction. Aborts loudly on non-finite gradients.
template <typename Scalar>
void adam_step(Mlp<Scalar>& mlp, const MlpGrads<Scalar>& grads, AdamState<Scalar>& state) {
  for (const auto& g : grads.weights) {
    if (!g.allFinite()) throw NnError("adam_step: non-finite weight gradient");
  }
  for (const auto& g : grads.biases) {
    if (!g.allFinite()) throw NnError("adam_step: non-finite bias gradient");
  }
  state.step += 1;
  const double bias1 = 1.0 - std::pow(state.config.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.config.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    detail::adam_update_block(mlp.weights[l], grads.weights[l], state.m_weights[l], state.v_weights[l],
                              state.config, bias1, bias2);
    detail::adam_update_block(mlp.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l],
                              state.config, bias1, bias2);
  }
}

using MlpD = Mlp<double>;
using MlpGradsD = MlpGrads<double>;
using ForwardCacheD = ForwardCache<double>;
using AdamStateD = AdamState<double>;

// ---------------------------------------------------------------------------
// Checkpoint container: named sections of MLPs, vectors and scalars in a
// versioned binary format with a trailing checksum. Round-trips bit-exactly.
// ---------------------------------------------------------------------------

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointWriter {
 public:
  void add_mlp(const std::string& name, const MlpD& mlp);
  void add_vector(const std::string& name, const Eigen::VectorXd& v);
  void add_scalar(const std::string& name, double v);
  void add_u64(const std::string& name, std::uint64_t v);

  std::vector<std::uint8_t> bytes() const;
  void write(const std::filesystem::path& path) const;

 private:
  struct Section {
    std::string name;
    std::uint8_t kind;
    std::vector<std::uint8_t> payload;
  };
  std::vector<Section> sections_;
};

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::filesystem::path& path);
  explicit CheckpointReader(const std::vector<std::uint8_t>& bytes);

  bool has(const std::string& name) const;
  MlpD mlp(const std::string& name) const;
  Eigen::VectorXd vector(const std::string& name) const;
  double scalar(const std::string& name) const;
  std::uint64_t u64(const std::string& name) const;

 private:
  void parse(const std::vector<std::uint8_t>& bytes);
  struct Section {
    std::uint8_t kind;
    std::vector<std::uint8_t> payload;
  };
  std::map<std::string, Section> sections_;
};

// Single-network convenience wrappers.
void save_params(const MlpD& mlp, const std::filesystem::path& path);
MlpD load_params(const std::filesystem::path& path);

bool same_params(const MlpD& a, const MlpD& b);  // bitwise comparison

}  // namespace clap
