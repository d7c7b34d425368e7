#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdfcorpus {

enum class ErrorCode {
  // ingest
  ArityMismatch,
  BadTimestamp,
  BadField,
  UnparsableUrl,
  SingleLabelHost,
  EmptyCorpus,
  MissingUrlProvenance,
  // manifest / generic io
  IoFailure,
  BadFormat,
  InvalidArgument,
  // embedding store
  BadMagic,
  SidecarMismatch,
  NonFiniteValue,
  NotNormalized,
  DimMismatch,
  ZeroVector,
  // analytics
  EmptyGroup,
  KTooLarge,
  DegenerateInput,
  // projection
  DegenerateRow,
  TooFewRows,
  PerplexityTooLarge,
  // learner
  UnknownPage,
  NeedBothClasses,
  NoModel,
  // service
  ArtifactValidationFailed,
  BindFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pdfcorpus
