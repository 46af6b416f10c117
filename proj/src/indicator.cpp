#include "dtwin/indicator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "dtwin/error.hpp"

namespace dtwin {

std::string_view to_string(CorrelationMode m) noexcept {
    return m == CorrelationMode::raw ? "raw" : "standardized";
}

std::string_view to_string(Startup s) noexcept { return s == Startup::skip ? "skip" : "grow"; }

CorrelationMode parse_correlation_mode(std::string_view text) {
    if (text == "raw") return CorrelationMode::raw;
    if (text == "standardized") return CorrelationMode::standardized;
    throw Error(ErrorCode::InvalidWindowSpec, "unknown correlation mode '" + std::string(text) + "'");
}

Startup parse_startup(std::string_view text) {
    if (text == "skip") return Startup::skip;
    if (text == "grow") return Startup::grow;
    throw Error(ErrorCode::InvalidWindowSpec, "unknown startup policy '" + std::string(text) + "'");
}

void WindowSpec::validate() const {
    if (k < 2) throw Error(ErrorCode::InvalidWindowSpec, "window length k must be at least 2, got " + std::to_string(k));
}

std::int64_t first_admissible_anchor(const WindowSpec& spec) noexcept {
    return spec.startup == Startup::skip ? static_cast<std::int64_t>(spec.k) + 1 : 3;
}

namespace {

/// Lags available at anchor t under the policy, or 0 when none is admissible.
std::size_t admissible_lags(std::int64_t t, const WindowSpec& spec) noexcept {
    const auto available = static_cast<std::size_t>(std::max<std::int64_t>(t - 1, 0));
    if (available >= spec.k) return spec.k;
    if (spec.startup == Startup::grow && available >= 2) return available;
    return 0;
}

}  // namespace

WindowMatrix window_slice(const CompetencySignal& signal, std::int64_t t, const WindowSpec& spec) {
    spec.validate();
    if (t < 1 || t > static_cast<std::int64_t>(signal.periods)) {
        throw Error(ErrorCode::IndexOutOfRange, "anchor t = " + std::to_string(t) + " outside 1.." +
                                                    std::to_string(signal.periods));
    }
    const std::size_t lags = admissible_lags(t, spec);
    if (lags == 0) {
        throw Error(ErrorCode::InsufficientHistory, "anchor t = " + std::to_string(t) + " has " +
                                                        std::to_string(t - 1) + " lags; " +
                                                        std::string(to_string(spec.startup)) + " policy with k = " +
                                                        std::to_string(spec.k) + " admits none");
    }
    WindowMatrix w;
    w.anchor = t;
    w.rows = lags;
    w.cols = signal.channels();
    w.values.reserve(lags * w.cols);
    for (std::size_t lag = 1; lag <= lags; ++lag) {
        const auto src = signal.row(static_cast<std::size_t>(t - 1) - lag);
        w.values.insert(w.values.end(), src.begin(), src.end());
    }
    return w;
}

CorrelationMatrix correlation_matrix(const WindowMatrix& window, CorrelationMode mode) {
    if (window.rows < 2) {
        throw Error(ErrorCode::DegenerateWindow, "correlation needs at least 2 rows, got " + std::to_string(window.rows));
    }
    const std::size_t k = window.rows;
    const std::size_t p = window.cols;
    const double scale = 1.0 / static_cast<double>(k - 1);

    CorrelationMatrix out;
    out.anchor = window.anchor;
    out.mode = mode;
    out.size = p;
    out.entries.assign(p * p, 0.0);

    std::vector<double> columns(k * p);  // column-major working copy
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < p; ++c) columns[c * k + r] = window.at(r, c);
    }
    std::vector<bool> live(p, true);

    if (mode == CorrelationMode::standardized) {
        for (std::size_t c = 0; c < p; ++c) {
            double* col = columns.data() + c * k;
            const auto [lo, hi] = std::minmax_element(col, col + k);
            if (*lo == *hi) {
                live[c] = false;
                continue;
            }
            double mean = 0.0;
            for (std::size_t r = 0; r < k; ++r) mean += col[r];
            mean /= static_cast<double>(k);
            double ss = 0.0;
            for (std::size_t r = 0; r < k; ++r) {
                col[r] -= mean;
                ss += col[r] * col[r];
            }
            const double sd = std::sqrt(ss * scale);
            for (std::size_t r = 0; r < k; ++r) col[r] /= sd;
        }
    }

    for (std::size_t i = 0; i < p; ++i) {
        if (!live[i]) continue;
        const double* a = columns.data() + i * k;
        for (std::size_t j = i; j < p; ++j) {
            if (!live[j]) continue;
            const double* b = columns.data() + j * k;
            double acc = 0.0;
            for (std::size_t r = 0; r < k; ++r) acc += a[r] * b[r];
            double value = acc * scale;
            // Standardized entries are correlations: the diagonal is 1 and the
            // rest lies in [-1, 1]; rounding is kept from straying past either.
            if (mode == CorrelationMode::standardized) value = i == j ? 1.0 : std::clamp(value, -1.0, 1.0);
            out.entries[i * p + j] = out.entries[j * p + i] = value;
        }
    }
    return out;
}

double channel_indicator(const CorrelationMatrix& corr, std::size_t channel) {
    if (channel >= corr.size) {
        throw Error(ErrorCode::IndexOutOfRange, "channel " + std::to_string(channel) + " of a " +
                                                    std::to_string(corr.size) + "-channel matrix");
    }
    double v = 0.0;
    for (const double r : corr.row(channel)) v += std::abs(r);
    return v;
}

void IndicatorSeries::append(std::int64_t t, std::vector<double> channel_values) {
    IndicatorPoint point;
    point.t = t;
    for (const double v : channel_values) point.sum += v;
    point.channels = std::move(channel_values);
    grand_total += point.sum;
    points.push_back(std::move(point));
}

namespace {

std::vector<double> row_indicators(const CorrelationMatrix& corr) {
    std::vector<double> v(corr.size);
    for (std::size_t i = 0; i < corr.size; ++i) v[i] = channel_indicator(corr, i);
    return v;
}

IndicatorSeries empty_series_for(const CompetencySignal& signal, const WindowSpec& spec) {
    spec.validate();
    if (signal.channels() == 0) throw Error(ErrorCode::EmptySignal, "signal has no channels");
    if (signal.values.size() != signal.periods * signal.channels()) {
        throw Error(ErrorCode::DimensionMismatch, "signal value grid does not match its shape");
    }
    const std::int64_t first = first_admissible_anchor(spec);
    if (static_cast<std::int64_t>(signal.periods) < first) {
        throw Error(ErrorCode::InsufficientHistory,
                    "series of " + std::to_string(signal.periods) + " periods is shorter than the first admissible anchor t = " +
                        std::to_string(first));
    }
    IndicatorSeries series;
    series.channel_names = signal.names;
    series.spec = spec;
    return series;
}

}  // namespace

IndicatorSeries indicator_series(const CompetencySignal& signal, const WindowSpec& spec) {
    IndicatorSeries series = empty_series_for(signal, spec);
    SlidingCorrelation window(signal.channels(), spec.k, spec.mode);
    for (std::size_t r = 0; r < signal.periods; ++r) {
        const std::int64_t t = signal.time_at(r);
        if (admissible_lags(t, spec) != 0) series.append(t, row_indicators(window.matrix(t)));
        window.advance(signal.row(r));
    }
    return series;
}

IndicatorSeries indicator_series_direct(const CompetencySignal& signal, const WindowSpec& spec, unsigned threads) {
    IndicatorSeries series = empty_series_for(signal, spec);
    const std::int64_t first = first_admissible_anchor(spec);
    const auto count = static_cast<std::size_t>(static_cast<std::int64_t>(signal.periods) - first + 1);

    std::vector<std::vector<double>> results(count);
    auto evaluate = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const auto t = first + static_cast<std::int64_t>(idx);
            results[idx] = row_indicators(correlation_matrix(window_slice(signal, t, spec), spec.mode));
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, count);
    if (workers == 1) {
        evaluate(0, count);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (count + workers - 1) / workers;
        for (std::size_t begin = 0; begin < count; begin += chunk) {
            pool.emplace_back(evaluate, begin, std::min(count, begin + chunk));
        }
    }
    for (std::size_t idx = 0; idx < count; ++idx) {
        series.append(first + static_cast<std::int64_t>(idx), std::move(results[idx]));
    }
    return series;
}

double total_indicator(const IndicatorSeries& series) noexcept {
    double total = 0.0;
    for (const auto& point : series.points) {
        double period = 0.0;
        for (const double v : point.channels) period += v;
        total += period;
    }
    return total;
}

// -- SlidingCorrelation -----------------------------------------------------

namespace {

// Neumaier-compensated add; `sum` and `carry` are stored side by side.
inline void compensated_add(double& sum, double& carry, double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
        carry += (sum - t) + x;
    } else {
        carry += (x - t) + sum;
    }
    sum = t;
}

}  // namespace

SlidingCorrelation::SlidingCorrelation(std::size_t channels, std::size_t k, CorrelationMode mode)
    : p_(channels), k_(k), mode_(mode), ring_(k * channels), shift_(channels, 0.0),
      first_(channels, 0.0), first_carry_(channels, 0.0), second_(channels * channels, 0.0),
      second_carry_(channels * channels, 0.0), run_(channels, 0), last_(channels, 0.0) {
    WindowSpec{k, mode, Startup::skip}.validate();
    if (channels == 0) throw Error(ErrorCode::EmptySignal, "sliding correlation over zero channels");
}

void SlidingCorrelation::accumulate(std::span<const double> row, double sign) {
    for (std::size_t i = 0; i < p_; ++i) {
        const double di = row[i] - shift_[i];
        compensated_add(first_[i], first_carry_[i], sign * di);
        for (std::size_t j = i; j < p_; ++j) {
            const double dj = row[j] - shift_[j];
            compensated_add(second_[i * p_ + j], second_carry_[i * p_ + j], sign * (di * dj));
        }
    }
}

std::span<const double> SlidingCorrelation::ring_row(std::size_t age) const {
    return {ring_.data() + ((head_ + age) % k_) * p_, p_};
}

void SlidingCorrelation::advance(std::span<const double> row) {
    if (row.size() != p_) {
        throw Error(ErrorCode::DimensionMismatch, "row has " + std::to_string(row.size()) + " entries, expected " +
                                                      std::to_string(p_));
    }
    for (std::size_t i = 0; i < p_; ++i) {
        run_[i] = (filled_ + evicted_ > 0 && row[i] == last_[i]) ? run_[i] + 1 : 1;
        last_[i] = row[i];
    }
    if (mode_ == CorrelationMode::standardized && filled_ + evicted_ == 0) {
        std::copy(row.begin(), row.end(), shift_.begin());
    }
    if (filled_ == k_) {
        accumulate(ring_row(0), -1.0);
        head_ = (head_ + 1) % k_;
        --filled_;
        ++evicted_;
    }
    const std::size_t slot = (head_ + filled_) % k_;
    std::copy(row.begin(), row.end(), ring_.begin() + static_cast<std::ptrdiff_t>(slot * p_));
    ++filled_;
    accumulate(row, 1.0);
    if (++since_rebuild_ >= k_) rebuild();
}

void SlidingCorrelation::rebuild() {
    since_rebuild_ = 0;
    std::fill(first_.begin(), first_.end(), 0.0);
    std::fill(first_carry_.begin(), first_carry_.end(), 0.0);
    std::fill(second_.begin(), second_.end(), 0.0);
    std::fill(second_carry_.begin(), second_carry_.end(), 0.0);
    if (mode_ == CorrelationMode::standardized && filled_ > 0) {
        // Re-centre on the current window mean so the shifted sums stay small.
        std::fill(shift_.begin(), shift_.end(), 0.0);
        for (std::size_t age = 0; age < filled_; ++age) {
            const auto r = ring_row(age);
            for (std::size_t i = 0; i < p_; ++i) shift_[i] += r[i];
        }
        for (auto& s : shift_) s /= static_cast<double>(filled_);
    }
    for (std::size_t age = 0; age < filled_; ++age) accumulate(ring_row(age), 1.0);
}

CorrelationMatrix SlidingCorrelation::matrix(std::int64_t anchor) const {
    if (filled_ < 2) {
        throw Error(ErrorCode::DegenerateWindow, "correlation needs at least 2 rows, got " + std::to_string(filled_));
    }
    CorrelationMatrix out;
    out.anchor = anchor;
    out.mode = mode_;
    out.size = p_;
    out.entries.assign(p_ * p_, 0.0);
    const double n = static_cast<double>(filled_);
    const double scale = 1.0 / (n - 1.0);

    auto second = [&](std::size_t i, std::size_t j) { return second_[i * p_ + j] + second_carry_[i * p_ + j]; };

    if (mode_ == CorrelationMode::raw) {
        for (std::size_t i = 0; i < p_; ++i) {
            for (std::size_t j = i; j < p_; ++j) out.entries[i * p_ + j] = out.entries[j * p_ + i] = second(i, j) * scale;
        }
        return out;
    }

    std::vector<double> sum(p_);
    for (std::size_t i = 0; i < p_; ++i) sum[i] = first_[i] + first_carry_[i];
    auto centred = [&](std::size_t i, std::size_t j) { return second(i, j) - sum[i] * sum[j] / n; };

    std::vector<double> norm(p_, 0.0);
    for (std::size_t i = 0; i < p_; ++i) {
        const double c = centred(i, i);
        if (run_[i] < filled_ && c > 0.0) norm[i] = std::sqrt(c);
    }
    for (std::size_t i = 0; i < p_; ++i) {
        if (norm[i] == 0.0) continue;
        out.entries[i * p_ + i] = 1.0;
        for (std::size_t j = i + 1; j < p_; ++j) {
            if (norm[j] == 0.0) continue;
            out.entries[i * p_ + j] = out.entries[j * p_ + i] =
                std::clamp(centred(i, j) / (norm[i] * norm[j]), -1.0, 1.0);
        }
    }
    return out;
}

}  // namespace dtwin
