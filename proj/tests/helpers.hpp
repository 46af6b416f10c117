#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dtwin/error.hpp"
#include "dtwin/model.hpp"
#include "oracle.hpp"

namespace testing {

inline dtwin::EventMatrix matrix_from_rows(const oracle::Rows& rows, const std::string& process = "general") {
    dtwin::RawEventGrid raw;
    for (std::size_t j = 0; j < rows.front().size(); ++j) raw.labels.push_back({"x" + std::to_string(j + 1), process});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        raw.time.push_back(static_cast<std::int64_t>(r) + 1);
        raw.values.insert(raw.values.end(), rows[r].begin(), rows[r].end());
    }
    return dtwin::validate_event_matrix(std::move(raw));
}

inline dtwin::CompetencySignal signal_from_rows(const oracle::Rows& rows) {
    return dtwin::signal_from_events(matrix_from_rows(rows));
}

inline oracle::Rows rows_of(const dtwin::CompetencySignal& s) {
    oracle::Rows rows(s.periods);
    for (std::size_t r = 0; r < s.periods; ++r) rows[r].assign(s.row(r).begin(), s.row(r).end());
    return rows;
}

/// Runs `fn` and returns the ErrorCode it throws; fails the caller's CHECK
/// when nothing is thrown.
template <typename Fn>
std::optional<dtwin::ErrorCode> error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const dtwin::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline double relative_gap(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace testing
