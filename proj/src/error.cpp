#include "clip/error.hpp"

namespace clip {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::AsymmetricAdjacency: return "AsymmetricAdjacency";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::NonBinaryAdjacency: return "NonBinaryAdjacency";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SizeCapExceeded: return "SizeCapExceeded";
    case Errc::InvalidPermutation: return "InvalidPermutation";
    case Errc::DegreeOverflow: return "DegreeOverflow";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case Errc::RejectionBudgetExhausted: return "RejectionBudgetExhausted";
    case Errc::ColorDimTooSmall: return "ColorDimTooSmall";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::TapeAlreadyConsumed: return "TapeAlreadyConsumed";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::ColoringMismatch: return "ColoringMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::DegenerateSkipLink: return "DegenerateSkipLink";
    case Errc::IsomorphicSkipValues: return "IsomorphicSkipValues";
    case Errc::MissingFile: return "MissingFile";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::DanglingEdge: return "DanglingEdge";
    case Errc::NonContiguousGraphIds: return "NonContiguousGraphIds";
    case Errc::ClassTooSmall: return "ClassTooSmall";
    case Errc::UnsupportedAttributes: return "UnsupportedAttributes";
    case Errc::BadCheckpoint: return "BadCheckpoint";
  }
  return "Unknown";
}

}  // namespace clip
