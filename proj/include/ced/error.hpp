#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ced {

enum class ErrorCode {
    MalformedHeader,
    TruncatedBody,
    UnsupportedProperty,
    EmptyCloud,
    NonPositiveLeaf,
    InvalidTransform,
    NegativeSigma,
    NonPositiveRadius,
    IndexOutOfRange,
    EmptyNeighborhood,
    NoColor,
    InvalidParams,
    MisalignedFields,
    CountOutOfRange,
    InvalidSpec,
    InvalidConfig,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::TruncatedBody: return "TruncatedBody";
        case ErrorCode::UnsupportedProperty: return "UnsupportedProperty";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::NonPositiveLeaf: return "NonPositiveLeaf";
        case ErrorCode::InvalidTransform: return "InvalidTransform";
        case ErrorCode::NegativeSigma: return "NegativeSigma";
        case ErrorCode::NonPositiveRadius: return "NonPositiveRadius";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
        case ErrorCode::NoColor: return "NoColor";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::MisalignedFields: return "MisalignedFields";
        case ErrorCode::CountOutOfRange: return "CountOutOfRange";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// Exception type thrown by every operation in the library. The code lets
/// callers (and tests) branch on the failure kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ced
