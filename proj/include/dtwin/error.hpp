#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dtwin {

enum class ErrorCode {
    // model validation
    NonFiniteValue,
    TimeAxisGap,
    EmptyModel,
    DimensionMismatch,
    EmptySignal,
    UnknownCompetency,
    UnknownTaxonomyLevel,
    InvalidTaxonomy,
    InvalidMask,
    // indicator engine
    InsufficientHistory,
    DegenerateWindow,
    IndexOutOfRange,
    InvalidWindowSpec,
    // regimes and generator
    OutOfRange,
    UnknownChannel,
    NonFiniteInput,
    InvalidConfig,
    // serialization
    MalformedHeader,
    MalformedNumber,
    MalformedRow,
    NonMonotonicTime,
    MalformedDocument,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Position inside a text input, 1-based.
struct TextLocation {
    std::size_t line = 0;
    std::size_t column = 0;
};

/// Every failure raised by the library carries a machine-checkable code.
/// Parsers additionally attach the offending line/column.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    Error(ErrorCode code, const std::string& message, TextLocation where);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::optional<TextLocation>& location() const noexcept { return where_; }

private:
    ErrorCode code_;
    std::optional<TextLocation> where_;
};

}  // namespace dtwin
