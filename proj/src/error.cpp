#include "dtwin/error.hpp"

namespace dtwin {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::TimeAxisGap: return "TimeAxisGap";
        case ErrorCode::EmptyModel: return "EmptyModel";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptySignal: return "EmptySignal";
        case ErrorCode::UnknownCompetency: return "UnknownCompetency";
        case ErrorCode::UnknownTaxonomyLevel: return "UnknownTaxonomyLevel";
        case ErrorCode::InvalidTaxonomy: return "InvalidTaxonomy";
        case ErrorCode::InvalidMask: return "InvalidMask";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::DegenerateWindow: return "DegenerateWindow";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::InvalidWindowSpec: return "InvalidWindowSpec";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::UnknownChannel: return "UnknownChannel";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::MalformedNumber: return "MalformedNumber";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
        case ErrorCode::MalformedDocument: return "MalformedDocument";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message) {
    std::string out{to_string(code)};
    out += ": ";
    out += message;
    return out;
}

std::string decorate(ErrorCode code, const std::string& message, TextLocation where) {
    return decorate(code, message) + " (line " + std::to_string(where.line) + ", column " +
           std::to_string(where.column) + ")";
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(decorate(code, message)), code_(code) {}

Error::Error(ErrorCode code, const std::string& message, TextLocation where)
    : std::runtime_error(decorate(code, message, where)), code_(code), where_(where) {}

}  // namespace dtwin
