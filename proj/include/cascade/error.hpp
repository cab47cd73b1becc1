#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cascade {

enum class ErrorCode {
  MissingField,
  DuplicatePath,
  EmptyProblemStatement,
  InvalidValue,
  NoEditBlocks,
  MalformedBlock,
  UnknownPath,
  SearchNotFound,
  MalformedDiff,
  BackendUnavailable,
  ContextTooLong,
  ProviderError,
  MissingBinding,
  EmptyReduction,
  IndexOutOfRange,
  MissingInput,
  EmptyPool,
  ZeroWeakCost,
  ConfigError,
  EmptyRecordSet,
  EmptyGold,
  NoGoldPatches,
  DecodeError,
  EmptyDataset,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-checkable code plus a
// human readable message. The message always starts with the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace cascade
