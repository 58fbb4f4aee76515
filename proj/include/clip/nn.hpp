#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "clip/matrix.hpp"
#include "clip/rng.hpp"

namespace clip {

enum class Activation { Relu, Tanh };

std::string_view activation_name(Activation a) noexcept;
Activation parse_activation(std::string_view name);

/// Affine layer. `weight` is stored input-major: weight(i, o) multiplies
/// input i into output o, so its shape is in x out.
struct Dense {
  Matrix weight;
  std::vector<double> bias;

  int in() const noexcept { return static_cast<int>(weight.rows()); }
  int out() const noexcept { return static_cast<int>(weight.cols()); }

  friend bool operator==(const Dense&, const Dense&) = default;
};

/// Stack of affine layers with `activation` after every layer but the last.
struct MlpParams {
  std::vector<Dense> layers;
  Activation activation = Activation::Relu;

  /// dims = {in, hidden..., out}. Glorot-uniform weights, zero biases.
  static MlpParams init(std::span<const int> dims, Activation act, Rng& rng);
  /// Same shapes, all entries zero.
  MlpParams zeros_like() const;

  int in_dim() const noexcept { return layers.empty() ? 0 : layers.front().in(); }
  int out_dim() const noexcept { return layers.empty() ? 0 : layers.back().out(); }
  std::size_t parameter_count() const noexcept;
  /// Weight then bias of each layer, in layer order.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;
  void set_zero();
  bool all_finite() const noexcept;
  /// Throws ShapeMismatch unless consecutive layers chain.
  void validate() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct MlpGradient;

/// Primal record of one forward pass. Single use: `backward` consumes it.
class MlpTape {
 public:
  bool recorded() const noexcept { return params_ != nullptr; }
  bool consumed() const noexcept { return consumed_; }

 private:
  friend Matrix mlp_forward_rows(const MlpParams&, const Matrix&, MlpTape*);
  friend Matrix backward_rows(MlpTape&, const Matrix&, MlpParams&, bool);
  friend MlpGradient backward(MlpTape&, std::span<const double>);

  const MlpParams* params_ = nullptr;
  // inputs_[l] is the input of layer l; inputs_[l + 1] is its activated output.
  std::vector<Matrix> inputs_;
  bool consumed_ = false;
};

/// Row-batched forward: each row of x is one input.
Matrix mlp_forward_rows(const MlpParams& p, const Matrix& x, MlpTape* tape = nullptr);

std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> x,
                                MlpTape* tape = nullptr);

/// Reverse pass over a row-batched tape. Parameter gradients are added into
/// `grads`; returns d(loss)/d(input) when `want_input_grad`, else an empty
/// matrix.
Matrix backward_rows(MlpTape& tape, const Matrix& output_grad, MlpParams& grads,
                     bool want_input_grad = true);

struct MlpGradient {
  MlpParams params;
  std::vector<double> input;
};

MlpGradient backward(MlpTape& tape, std::span<const double> output_grad);

/// Adam with bias correction over an ordered list of parameter tensors.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double base_lr = 1e-3;
  long step = 0;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
};

void adam_step(AdamState& s, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, double lr);
void adam_step(AdamState& s, MlpParams& params, const MlpParams& grads, double lr);

/// base * 0.5^floor(epoch / period).
double lr_at(int epoch, double base, int period = 50);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// -log softmax(logits)[label] and its logit gradient softmax - onehot(label).
LossAndGrad softmax_cross_entropy(std::span<const double> logits, int label);

}  // namespace clip
