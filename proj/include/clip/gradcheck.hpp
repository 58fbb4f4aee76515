#pragma once

#include <cstdint>

#include "clip/nn.hpp"

namespace clip {

struct GradcheckOptions {
  int configs = 100;  ///< configurations that must be compared (ties excluded)
  std::uint64_t seed = 1;
  int max_nodes = 6;
  int max_hops = 2;
  int max_width = 4;
  double step = 1e-5;
  double rel_tol = 1e-4;
  double abs_tol = 1e-7;
  /// Top-two gap below which a max coordinate counts as tied.
  double tie_gap = 1e-6;
  Activation activation = Activation::Tanh;
};

struct GradcheckReport {
  int configs = 0;
  int skipped_ties = 0;
  long entries = 0;
  long failures = 0;
  double max_rel_error = 0.0;

  bool passed() const noexcept { return configs > 0 && failures == 0; }
};

/// Compares loss_and_grads against central finite differences of the loss on
/// random small graphs, colorings and models.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace clip
