#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clip {

enum class Errc {
  // graph-core
  AsymmetricAdjacency,
  SelfLoop,
  NonBinaryAdjacency,
  DimensionMismatch,
  SizeCapExceeded,
  InvalidPermutation,
  DegreeOverflow,
  IndexOutOfRange,
  // coloring
  EnumerationCapExceeded,
  RejectionBudgetExhausted,
  ColorDimTooSmall,
  // tensor-nn
  NonFiniteInput,
  TapeAlreadyConsumed,
  ShapeMismatch,
  LabelOutOfRange,
  // clip-model
  ColoringMismatch,
  InvalidConfig,
  // datasets
  DegenerateSkipLink,
  IsomorphicSkipValues,
  MissingFile,
  MalformedLine,
  DanglingEdge,
  NonContiguousGraphIds,
  ClassTooSmall,
  UnsupportedAttributes,
  // checkpoints
  BadCheckpoint,
};

std::string_view errc_name(Errc code) noexcept;

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace clip
