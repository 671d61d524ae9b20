#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tibtts {

// Machine-readable failure categories. The CLI and the review server report
// these names verbatim.
enum class ErrorCategory {
  InvalidUtf8,
  InvalidConfig,
  UnsupportedMagnitude,
  EmptyCorpus,
  TargetTooSmall,
  InvalidTokenId,
  InvalidModel,
  MalformedHeader,
  UnsupportedEncoding,
  InvalidRate,
  AllZeroInput,
  FullySilent,
  EmptyBuffer,
  ZeroDuration,
  ZeroSyllables,
  EmptyReference,
  OutOfRangeScore,
  UnreadableIndex,
  UnreadableFile,
  UnwritableOutput,
  NoAcceptedRecords,
  UnknownId,
  NotReviewable,
  InvalidEdit,
  BadRequest,
};

constexpr std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::InvalidUtf8: return "InvalidUtf8";
    case ErrorCategory::InvalidConfig: return "InvalidConfig";
    case ErrorCategory::UnsupportedMagnitude: return "UnsupportedMagnitude";
    case ErrorCategory::EmptyCorpus: return "EmptyCorpus";
    case ErrorCategory::TargetTooSmall: return "TargetTooSmall";
    case ErrorCategory::InvalidTokenId: return "InvalidTokenId";
    case ErrorCategory::InvalidModel: return "InvalidModel";
    case ErrorCategory::MalformedHeader: return "MalformedHeader";
    case ErrorCategory::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCategory::InvalidRate: return "InvalidRate";
    case ErrorCategory::AllZeroInput: return "AllZeroInput";
    case ErrorCategory::FullySilent: return "FullySilent";
    case ErrorCategory::EmptyBuffer: return "EmptyBuffer";
    case ErrorCategory::ZeroDuration: return "ZeroDuration";
    case ErrorCategory::ZeroSyllables: return "ZeroSyllables";
    case ErrorCategory::EmptyReference: return "EmptyReference";
    case ErrorCategory::OutOfRangeScore: return "OutOfRangeScore";
    case ErrorCategory::UnreadableIndex: return "UnreadableIndex";
    case ErrorCategory::UnreadableFile: return "UnreadableFile";
    case ErrorCategory::UnwritableOutput: return "UnwritableOutput";
    case ErrorCategory::NoAcceptedRecords: return "NoAcceptedRecords";
    case ErrorCategory::UnknownId: return "UnknownId";
    case ErrorCategory::NotReviewable: return "NotReviewable";
    case ErrorCategory::InvalidEdit: return "InvalidEdit";
    case ErrorCategory::BadRequest: return "BadRequest";
  }
  return "Unknown";
}

// Every recoverable failure in the library is an Error. `position` carries a
// byte offset, token index or line number when the category has one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message,
        std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(std::string(category_name(category)) + ": " + message),
        category_(category),
        detail_(message),
        position_(position) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  ErrorCategory category_;
  std::string detail_;
  std::optional<std::size_t> position_;
};

}  // namespace tibtts
