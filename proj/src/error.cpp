#include "cascade/error.hpp"

namespace cascade {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::DuplicatePath: return "DuplicatePath";
    case ErrorCode::EmptyProblemStatement: return "EmptyProblemStatement";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::NoEditBlocks: return "NoEditBlocks";
    case ErrorCode::MalformedBlock: return "MalformedBlock";
    case ErrorCode::UnknownPath: return "UnknownPath";
    case ErrorCode::SearchNotFound: return "SearchNotFound";
    case ErrorCode::MalformedDiff: return "MalformedDiff";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ContextTooLong: return "ContextTooLong";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::EmptyReduction: return "EmptyReduction";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::ZeroWeakCost: return "ZeroWeakCost";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::EmptyRecordSet: return "EmptyRecordSet";
    case ErrorCode::EmptyGold: return "EmptyGold";
    case ErrorCode::NoGoldPatches: return "NoGoldPatches";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

}  // namespace cascade
