#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clip/coloring.hpp"
#include "clip/graph.hpp"
#include "clip/nn.hpp"
#include "clip/rng.hpp"

namespace clip {

/// `ClipConfig::colorings` value selecting the full coloring set.
inline constexpr int kAllColorings = -1;

struct ClipConfig {
  int hops = 3;        ///< aggregation rounds T, at least 1
  int colorings = 16;  ///< k: 0 disables coloring, kAllColorings enumerates
  int hidden = 16;
  int attr_dim = 1;   ///< node attribute width m
  int color_dim = 0;  ///< one-hot color width; 0 exactly when colorings == 0
  int num_classes = 2;
  int eval_samples = 1;
  int mlp_layers = 2;  ///< weight layers in each phi / psi / readout MLP
  Activation activation = Activation::Relu;
  /// Read out the concatenated node sums of every hop (GIN-style) instead of
  /// the last hop only.
  bool jumping_knowledge = false;
  std::uint64_t enumeration_cap = kEnumerationThreshold;

  /// Throws InvalidConfig.
  void validate() const;
  int input_dim() const noexcept { return attr_dim + color_dim; }
  int readout_dim() const noexcept;

  friend bool operator==(const ClipConfig&, const ClipConfig&) = default;
};

struct HopParams {
  MlpParams phi;  ///< applied to each neighbor before summation
  MlpParams psi;  ///< combines (own state, neighbor sum)

  friend bool operator==(const HopParams&, const HopParams&) = default;
};

/// Trainable parameters; also used as the gradient accumulator.
struct ClipParams {
  std::vector<HopParams> hops;
  MlpParams readout;
  MlpParams head;  ///< single affine layer to class logits

  ClipParams zeros_like() const;
  void set_zero();
  std::size_t parameter_count() const noexcept;
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;

  friend bool operator==(const ClipParams&, const ClipParams&) = default;
};

struct ClipModel {
  ClipConfig config;
  ClipParams params;

  static ClipModel init(const ClipConfig& config, Rng& rng);

  friend bool operator==(const ClipModel&, const ClipModel&) = default;
};

/// psi(x, sum_y phi(y)) for a single node. Neighbor vectors are summed in
/// lexicographic order so any ordering of `neighbor_xs` gives the same bits;
/// an empty neighborhood contributes the zero vector.
std::vector<double> node_aggregation(const MlpParams& phi, const MlpParams& psi,
                                     std::span<const double> x,
                                     std::span<const std::vector<double>> neighbor_xs);

/// Intermediate values of one clip_forward call, consumed by clip_backward.
class ClipTape {
 public:
  bool recorded() const noexcept { return recorded_; }

 private:
  friend std::vector<double> clip_forward(const ClipModel&, const Graph&, const ColoringSample&,
                                          ClipTape*);
  friend void clip_backward(ClipTape&, std::span<const double>, ClipParams&);
  friend std::vector<std::vector<double>> colored_readouts(const ClipModel&, const Graph&,
                                                           const ColoringSample&);

  struct Hop {
    MlpTape phi;
    MlpTape psi;
  };
  struct Branch {
    std::vector<Hop> hops;
  };

  const ClipModel* model_ = nullptr;
  const Graph* graph_ = nullptr;
  std::vector<Branch> branches_;
  std::vector<int> winner_;  // per readout coordinate: branch achieving the max
  MlpTape readout_;
  MlpTape head_;
  bool recorded_ = false;
};

/// Colored initialization, T hops, node sum, coefficient-wise max over the
/// sample's colorings, readout MLP and affine head. Ignores `sample` when the
/// model is configured without colorings. Returns class logits.
std::vector<double> clip_forward(const ClipModel& model, const Graph& g,
                                 const ColoringSample& sample, ClipTape* tape = nullptr);

/// Adds d(loss)/d(params) into `grads` given d(loss)/d(logits). The max
/// routes each coordinate to the lowest-index coloring achieving it.
void clip_backward(ClipTape& tape, std::span<const double> logit_grad, ClipParams& grads);

/// Node-summed readout vector of every coloring branch, before the max.
std::vector<std::vector<double>> colored_readouts(const ClipModel& model, const Graph& g,
                                                  const ColoringSample& sample);

/// Colorings for one forward pass according to the model's k.
ColoringSample draw_colorings(const ClipConfig& config, const Partition& p, Rng& rng);

struct Example {
  const Graph* graph = nullptr;
  int label = 0;
};

struct LossAndGrads {
  double loss = 0.0;
  ClipParams grads;
};

/// Mean softmax cross-entropy over the batch, with fresh colorings per graph.
LossAndGrads loss_and_grads(const ClipModel& model, std::span<const Example> batch, Rng& rng);
/// Same with caller-supplied colorings, one sample per example.
LossAndGrads loss_and_grads(const ClipModel& model, std::span<const Example> batch,
                            std::span<const ColoringSample> samples);

/// Logits averaged over `eval_samples` independent coloring samples.
/// Deterministic configurations (no colorings, or the full set) run once.
std::vector<double> predict_logits(const ClipModel& model, const Graph& g, int eval_samples,
                                   Rng& rng);

/// Argmax of predict_logits, ties to the lowest class index.
int predict(const ClipModel& model, const Graph& g, int eval_samples, Rng& rng);

int argmax_lowest(std::span<const double> v);

}  // namespace clip
