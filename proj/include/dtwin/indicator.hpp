#pragma once

// Sliding-window correlation matrices and the integral indicator built on
// them: V_i(t) = sum_j |r_ij(t)| and the grand total over all periods.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dtwin/model.hpp"

namespace dtwin {

/// `raw` is the plain lagged inner-product average (1/(k-1)) W^T W;
/// `standardized` z-scores each column within the window first (Pearson).
enum class CorrelationMode { raw, standardized };

/// `skip` evaluates only anchors with a full window of k lags;
/// `grow` also evaluates earlier anchors with 2 <= lags < k.
enum class Startup { skip, grow };

std::string_view to_string(CorrelationMode m) noexcept;
std::string_view to_string(Startup s) noexcept;
CorrelationMode parse_correlation_mode(std::string_view text);
Startup parse_startup(std::string_view text);

struct WindowSpec {
    std::size_t k = 12;
    CorrelationMode mode = CorrelationMode::standardized;
    Startup startup = Startup::skip;

    /// Throws InvalidWindowSpec when k < 2.
    void validate() const;

    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// Lagged rows ending just before the anchor: row r holds the signal at t - (r + 1).
struct WindowMatrix {
    std::int64_t anchor = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  ///< row-major rows x cols

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// p x p matrix of r_ij(t).
struct CorrelationMatrix {
    std::int64_t anchor = 0;
    CorrelationMode mode = CorrelationMode::standardized;
    std::size_t size = 0;
    std::vector<double> entries;  ///< row-major size x size

    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return entries[i * size + j]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {entries.data() + i * size, size}; }
};

/// Throws InsufficientHistory when the policy admits no window at t, and
/// IndexOutOfRange when t is outside the signal's time axis.
WindowMatrix window_slice(const CompetencySignal& signal, std::int64_t t, const WindowSpec& spec);

/// Direct evaluation over a window with at least two rows (DegenerateWindow otherwise).
/// Channels constant over the window get an all-zero row and column in
/// standardized mode.
CorrelationMatrix correlation_matrix(const WindowMatrix& window, CorrelationMode mode);

/// sum_j |r_ij|, diagonal included. Throws IndexOutOfRange.
double channel_indicator(const CorrelationMatrix& corr, std::size_t channel);

struct IndicatorPoint {
    std::int64_t t = 0;
    std::vector<double> channels;  ///< V_i(t)
    double sum = 0.0;              ///< sum_i V_i(t)

    friend bool operator==(const IndicatorPoint&, const IndicatorPoint&) = default;
};

struct IndicatorSeries {
    std::vector<std::string> channel_names;
    std::vector<IndicatorPoint> points;  ///< ascending t
    std::optional<WindowSpec> spec;
    double grand_total = 0.0;

    [[nodiscard]] bool empty() const noexcept { return points.empty(); }
    [[nodiscard]] std::int64_t first_t() const { return points.front().t; }
    [[nodiscard]] std::int64_t last_t() const { return points.back().t; }

    /// Appends a point, keeping `sum` and `grand_total` consistent.
    void append(std::int64_t t, std::vector<double> channel_values);
};

/// First anchor the startup policy evaluates (k + 1 for skip, 3 for grow).
std::int64_t first_admissible_anchor(const WindowSpec& spec) noexcept;

/// Evaluates every admissible anchor in ascending order through the
/// incremental window. Throws InsufficientHistory when no anchor is admissible.
IndicatorSeries indicator_series(const CompetencySignal& signal, const WindowSpec& spec);

/// Same series through window_slice + correlation_matrix at every anchor.
/// Anchors are independent; `threads` > 1 evaluates them concurrently.
IndicatorSeries indicator_series_direct(const CompetencySignal& signal, const WindowSpec& spec,
                                        unsigned threads = 1);

/// Double sum over periods and channels.
double total_indicator(const IndicatorSeries& series) noexcept;

/// Rolling co-moment state over the last k rows. Each advance costs O(p^2);
/// the accumulators are rebuilt from the ring buffer once every k advances
/// so rounding drift stays bounded.
class SlidingCorrelation {
public:
    SlidingCorrelation(std::size_t channels, std::size_t k, CorrelationMode mode);

    /// Pushes the row for the next period, evicting the oldest when full.
    /// Throws DimensionMismatch when the row width differs from p.
    void advance(std::span<const double> row);

    [[nodiscard]] std::size_t filled() const noexcept { return filled_; }
    [[nodiscard]] std::size_t channels() const noexcept { return p_; }
    [[nodiscard]] std::size_t capacity() const noexcept { return k_; }

    /// Matrix over the rows currently held; needs filled() >= 2.
    [[nodiscard]] CorrelationMatrix matrix(std::int64_t anchor) const;

private:
    void accumulate(std::span<const double> row, double sign);
    void rebuild();
    [[nodiscard]] std::span<const double> ring_row(std::size_t age) const;

    std::size_t p_;
    std::size_t k_;
    CorrelationMode mode_;

    std::vector<double> ring_;  ///< k x p, oldest row at head_
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
    std::size_t evicted_ = 0;
    std::size_t since_rebuild_ = 0;

    // Compensated sums of (x - shift) and of their pairwise products (upper
    // triangle). The shift stays 0 in raw mode.
    std::vector<double> shift_;
    std::vector<double> first_;
    std::vector<double> first_carry_;
    std::vector<double> second_;
    std::vector<double> second_carry_;

    std::vector<std::size_t> run_;  ///< trailing run of identical values per channel
    std::vector<double> last_;
};

}  // namespace dtwin
