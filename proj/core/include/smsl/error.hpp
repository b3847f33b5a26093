// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smsl {

enum class ErrorCode {
  ZeroRow,
  DimensionMismatch,
  ShapeMismatch,
  ParseError,
  RangeError,
  IoError,
  EmptyLabelSet,
  IndexOutOfRange,
  InvalidThreshold,
  MissingSimilarity,
  InvalidConfig,
  InvalidSchedule,
  NonFinite,
  EmptyRelevantSet,
  AllZeroGains,
  EmptyEnsemble,
  DivergenceDetected,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the ErrorCode kinds so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string &detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace smsl
