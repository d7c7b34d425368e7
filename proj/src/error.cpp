#include "pdfcorpus/error.hpp"

namespace pdfcorpus {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::BadTimestamp: return "BadTimestamp";
    case ErrorCode::BadField: return "BadField";
    case ErrorCode::UnparsableUrl: return "UnparsableUrl";
    case ErrorCode::SingleLabelHost: return "SingleLabelHost";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::MissingUrlProvenance: return "MissingUrlProvenance";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::SidecarMismatch: return "SidecarMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DegenerateRow: return "DegenerateRow";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::PerplexityTooLarge: return "PerplexityTooLarge";
    case ErrorCode::UnknownPage: return "UnknownPage";
    case ErrorCode::NeedBothClasses: return "NeedBothClasses";
    case ErrorCode::NoModel: return "NoModel";
    case ErrorCode::ArtifactValidationFailed: return "ArtifactValidationFailed";
    case ErrorCode::BindFailed: return "BindFailed";
  }
  return "Unknown";
}

}  // namespace pdfcorpus
