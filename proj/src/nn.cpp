#include "clip/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clip/error.hpp"

namespace clip {

namespace {

// z = x * W + b for every row. Accumulation over inputs runs in index order
// for each output entry, so equal rows produce bitwise-equal results.
void affine_rows(const Matrix& x, const Dense& layer, Matrix& z) {
  const std::size_t n = x.rows();
  const std::size_t in = layer.weight.rows();
  const std::size_t out = layer.weight.cols();
  z.reset(n, out);
  const double* __restrict w = layer.weight.data();
  const double* __restrict b = layer.bias.data();
  for (std::size_t r = 0; r < n; ++r) {
    double* __restrict zr = z.data() + r * out;
    const double* __restrict xr = x.data() + r * in;
    for (std::size_t o = 0; o < out; ++o) zr[o] = b[o];
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      const double* __restrict wi = w + i * out;
      for (std::size_t o = 0; o < out; ++o) zr[o] += xi * wi[o];
    }
  }
}

void activate(Matrix& z, Activation act) {
  auto v = z.values();
  if (act == Activation::Relu) {
    for (double& e : v) e = e > 0.0 ? e : 0.0;
  } else {
    for (double& e : v) e = std::tanh(e);
  }
}

// dz = dy * act'(.) expressed through the activated output y.
void activation_backward(Matrix& dy, const Matrix& y, Activation act) {
  auto d = dy.values();
  const auto yv = y.values();
  if (act == Activation::Relu) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(yv[i] > 0.0)) d[i] = 0.0;
    }
  } else {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - yv[i] * yv[i];
  }
}

}  // namespace

std::string_view activation_name(Activation a) noexcept {
  return a == Activation::Relu ? "relu" : "tanh";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw Error(Errc::InvalidConfig, "unknown activation '" + std::string(name) + "'");
}

MlpParams MlpParams::init(std::span<const int> dims, Activation act, Rng& rng) {
  if (dims.size() < 2) throw Error(Errc::ShapeMismatch, "an MLP needs at least one layer");
  MlpParams p;
  p.activation = act;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    if (in < 1 || out < 1) throw Error(Errc::ShapeMismatch, "layer dimensions must be positive");
    Dense d{Matrix(in, out), std::vector<double>(out, 0.0)};
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& w : d.weight.values()) w = u(rng);
    p.layers.push_back(std::move(d));
  }
  return p;
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z = *this;
  z.set_zero();
  return z;
}

std::size_t MlpParams::parameter_count() const noexcept {
  std::size_t total = 0;
  for (const auto& l : layers) total += l.weight.size() + l.bias.size();
  return total;
}

std::vector<std::span<double>> MlpParams::tensors() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.push_back(l.weight.values());
    out.emplace_back(l.bias);
  }
  return out;
}

std::vector<std::span<const double>> MlpParams::tensors() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers) {
    out.push_back(l.weight.values());
    out.emplace_back(l.bias);
  }
  return out;
}

void MlpParams::set_zero() {
  for (auto& l : layers) {
    l.weight.fill(0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

bool MlpParams::all_finite() const noexcept {
  for (const auto& l : layers) {
    if (!l.weight.all_finite()) return false;
    for (double b : l.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

void MlpParams::validate() const {
  if (layers.empty()) throw Error(Errc::ShapeMismatch, "MLP has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].bias.size() != layers[l].weight.cols()) {
      throw Error(Errc::ShapeMismatch, "bias length differs from layer output width");
    }
    if (l > 0 && layers[l].in() != layers[l - 1].out()) {
      throw Error(Errc::ShapeMismatch, "layer " + std::to_string(l) + " does not chain");
    }
  }
}

Matrix mlp_forward_rows(const MlpParams& p, const Matrix& x, MlpTape* tape) {
  if (static_cast<int>(x.cols()) != p.in_dim()) {
    throw Error(Errc::DimensionMismatch, "input width " + std::to_string(x.cols()) +
                                             " != MLP input " + std::to_string(p.in_dim()));
  }
  const std::size_t depth = p.layers.size();
  if (tape) {
    tape->params_ = &p;
    tape->consumed_ = false;
    tape->inputs_.resize(depth + 1);
    tape->inputs_[0] = x;
    for (std::size_t l = 0; l < depth; ++l) {
      affine_rows(tape->inputs_[l], p.layers[l], tape->inputs_[l + 1]);
      if (l + 1 < depth) activate(tape->inputs_[l + 1], p.activation);
    }
    return tape->inputs_[depth];
  }
  Matrix cur = x;
  Matrix next;
  for (std::size_t l = 0; l < depth; ++l) {
    affine_rows(cur, p.layers[l], next);
    if (l + 1 < depth) activate(next, p.activation);
    std::swap(cur, next);
  }
  return cur;
}

std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> x, MlpTape* tape) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "MLP input contains NaN or inf");
  }
  Matrix row(1, x.size());
  std::copy(x.begin(), x.end(), row.row(0).begin());
  const Matrix y = mlp_forward_rows(p, row, tape);
  return {y.values().begin(), y.values().end()};
}

Matrix backward_rows(MlpTape& tape, const Matrix& output_grad, MlpParams& grads,
                     bool want_input_grad) {
  if (!tape.recorded()) throw Error(Errc::TapeAlreadyConsumed, "tape holds no forward pass");
  if (tape.consumed_) throw Error(Errc::TapeAlreadyConsumed, "tape was already consumed");
  const MlpParams& p = *tape.params_;
  const std::size_t depth = p.layers.size();
  const Matrix& y = tape.inputs_[depth];
  if (output_grad.rows() != y.rows() || output_grad.cols() != y.cols()) {
    throw Error(Errc::ShapeMismatch, "output gradient shape differs from forward output");
  }
  if (grads.layers.size() != depth) {
    throw Error(Errc::ShapeMismatch, "gradient accumulator does not match parameters");
  }
  tape.consumed_ = true;

  Matrix dz = output_grad;
  Matrix dx;
  const std::size_t n = dz.rows();
  for (std::size_t l = depth; l-- > 0;) {
    const Dense& layer = p.layers[l];
    Dense& g = grads.layers[l];
    const Matrix& x = tape.inputs_[l];
    const std::size_t in = layer.weight.rows();
    const std::size_t out = layer.weight.cols();
    if (g.weight.rows() != in || g.weight.cols() != out) {
      throw Error(Errc::ShapeMismatch, "gradient accumulator does not match parameters");
    }

    double* __restrict gw = g.weight.data();
    double* __restrict gb = g.bias.data();
    for (std::size_t r = 0; r < n; ++r) {
      const double* __restrict dzr = dz.data() + r * out;
      const double* __restrict xr = x.data() + r * in;
      for (std::size_t o = 0; o < out; ++o) gb[o] += dzr[o];
      for (std::size_t i = 0; i < in; ++i) {
        const double xi = xr[i];
        if (xi == 0.0) continue;
        double* __restrict gwi = gw + i * out;
        for (std::size_t o = 0; o < out; ++o) gwi[o] += xi * dzr[o];
      }
    }

    if (l == 0 && !want_input_grad) break;

    dx.reset(n, in);
    const double* __restrict w = layer.weight.data();
    for (std::size_t r = 0; r < n; ++r) {
      const double* __restrict dzr = dz.data() + r * out;
      double* __restrict dxr = dx.data() + r * in;
      for (std::size_t i = 0; i < in; ++i) {
        const double* __restrict wi = w + i * out;
        double acc = 0.0;
        for (std::size_t o = 0; o < out; ++o) acc += wi[o] * dzr[o];
        dxr[i] = acc;
      }
    }
    if (l > 0) activation_backward(dx, x, p.activation);
    std::swap(dz, dx);
  }
  tape.inputs_.clear();
  if (!want_input_grad) return {};
  return dz;
}

MlpGradient backward(MlpTape& tape, std::span<const double> output_grad) {
  if (!tape.recorded()) throw Error(Errc::TapeAlreadyConsumed, "tape holds no forward pass");
  if (tape.consumed()) throw Error(Errc::TapeAlreadyConsumed, "tape was already consumed");
  MlpGradient out;
  out.params = tape.params_->zeros_like();
  Matrix dy(1, output_grad.size());
  std::copy(output_grad.begin(), output_grad.end(), dy.row(0).begin());
  const Matrix dx = backward_rows(tape, dy, out.params, true);
  out.input.assign(dx.values().begin(), dx.values().end());
  return out;
}

void adam_step(AdamState& s, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, double lr) {
  if (params.size() != grads.size()) throw Error(Errc::ShapeMismatch, "parameter/gradient count");
  if (s.first.empty()) {
    for (const auto& p : params) {
      s.first.emplace_back(p.size(), 0.0);
      s.second.emplace_back(p.size(), 0.0);
    }
  }
  if (s.first.size() != params.size()) throw Error(Errc::ShapeMismatch, "optimizer state");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grads[t].size() || s.first[t].size() != params[t].size()) {
      throw Error(Errc::ShapeMismatch, "tensor " + std::to_string(t) + " shape differs");
    }
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    double* __restrict p = params[t].data();
    const double* __restrict g = grads[t].data();
    double* __restrict m = s.first[t].data();
    double* __restrict v = s.second[t].data();
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  }
}

void adam_step(AdamState& s, MlpParams& params, const MlpParams& grads, double lr) {
  const auto p = params.tensors();
  const auto g = grads.tensors();
  adam_step(s, p, g, lr);
}

double lr_at(int epoch, double base, int period) {
  if (epoch < 0) throw Error(Errc::InvalidConfig, "epoch must be non-negative");
  if (period < 1) throw Error(Errc::InvalidConfig, "halving period must be positive");
  return std::ldexp(base, -(epoch / period));
}

LossAndGrad softmax_cross_entropy(std::span<const double> logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw Error(Errc::LabelOutOfRange, "label " + std::to_string(label) + " with " +
                                           std::to_string(logits.size()) + " classes");
  }
  for (double v : logits) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "logits contain NaN or inf");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  LossAndGrad out;
  out.grad.resize(logits.size());
  double z = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    out.grad[c] = std::exp(logits[c] - mx);
    z += out.grad[c];
  }
  out.loss = std::log(z) - (logits[label] - mx);
  for (double& g : out.grad) g /= z;
  out.grad[label] -= 1.0;
  return out;
}

}  // namespace clip
