#pragma once

// Enterprise event model, Bloom taxonomy and the competency binding that
// turns event channels into the signal fed to the indicator engine.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dtwin {

struct ChannelLabel {
    std::string name;
    std::string process;  ///< business-process tag

    friend bool operator==(const ChannelLabel&, const ChannelLabel&) = default;
};

/// Unvalidated event grid as read from disk or produced by a generator.
/// `values` is row-major, one row per entry of `time`.
struct RawEventGrid {
    std::vector<std::int64_t> time;
    std::vector<ChannelLabel> labels;
    std::vector<double> values;
};

/// x^j(t) for t = 1..T_max over n labelled channels, in thousand rubles per
/// period. Only obtainable through validate_event_matrix, so every instance
/// holds a gap-free time axis starting at 1 and finite values.
class EventMatrix {
public:
    [[nodiscard]] std::size_t periods() const noexcept { return periods_; }
    [[nodiscard]] std::size_t channels() const noexcept { return labels_.size(); }

    /// Time index of row r (0-based row, 1-based time).
    [[nodiscard]] std::int64_t time_at(std::size_t row) const noexcept {
        return static_cast<std::int64_t>(row) + 1;
    }
    [[nodiscard]] double at(std::size_t row, std::size_t channel) const {
        return values_[row * channels() + channel];
    }
    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * channels(), channels()};
    }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<ChannelLabel>& labels() const noexcept { return labels_; }

    /// Index of the channel with the given name, or channels() if absent.
    [[nodiscard]] std::size_t find_channel(std::string_view name) const noexcept;

    [[nodiscard]] RawEventGrid to_raw() const;

    friend bool operator==(const EventMatrix&, const EventMatrix&) = default;

private:
    friend EventMatrix validate_event_matrix(RawEventGrid raw);
    EventMatrix() = default;

    std::size_t periods_ = 0;
    std::vector<ChannelLabel> labels_;
    std::vector<double> values_;
};

/// Enforces the EventMatrix invariants. Throws Error with EmptyModel,
/// TimeAxisGap, NonFiniteValue (message names t and 1-based channel) or
/// DimensionMismatch.
EventMatrix validate_event_matrix(RawEventGrid raw);

// -- taxonomy ---------------------------------------------------------------

struct TaxonomyDomain {
    std::string name;
    std::vector<std::string> levels;  ///< ordered, lowest first

    friend bool operator==(const TaxonomyDomain&, const TaxonomyDomain&) = default;
};

struct TaxonomyCoordinate {
    std::string domain;
    std::string level;

    friend bool operator==(const TaxonomyCoordinate&, const TaxonomyCoordinate&) = default;
};

/// The three-domain goal system. Level names are data and may be edited;
/// the domain list is fixed to cognitive, affective, psychomotor.
class Taxonomy {
public:
    explicit Taxonomy(std::vector<TaxonomyDomain> domains);

    [[nodiscard]] const std::vector<TaxonomyDomain>& domains() const noexcept { return domains_; }
    [[nodiscard]] bool contains(std::string_view domain, std::string_view level) const noexcept;
    /// Position of a level inside its domain; throws UnknownTaxonomyLevel.
    [[nodiscard]] std::size_t level_rank(std::string_view domain, std::string_view level) const;

    friend bool operator==(const Taxonomy&, const Taxonomy&) = default;

private:
    std::vector<TaxonomyDomain> domains_;
};

inline constexpr std::string_view kCognitive = "cognitive";
inline constexpr std::string_view kAffective = "affective";
inline constexpr std::string_view kPsychomotor = "psychomotor";

/// Default level lists for the three domains.
const Taxonomy& bloom_taxonomy();

// -- competencies -----------------------------------------------------------

struct Competency {
    std::string id;
    std::string name;
    TaxonomyCoordinate coordinate;
    double activation_cost = 0.0;  ///< thousand rubles

    friend bool operator==(const Competency&, const Competency&) = default;
};

enum class Reduction { aggregate, masked };

std::string_view to_string(Reduction r) noexcept;
Reduction parse_reduction(std::string_view text);

/// m competencies against n event channels, v_i^j in {0, 1}.
class CompetencyMap {
public:
    /// Validates mask shape and binarity, cost sign and taxonomy coordinates.
    CompetencyMap(std::vector<Competency> competencies, std::vector<std::vector<std::uint8_t>> mask,
                  Reduction mode, const Taxonomy& taxonomy = bloom_taxonomy());

    [[nodiscard]] std::size_t rows() const noexcept { return competencies_.size(); }
    [[nodiscard]] std::size_t columns() const noexcept { return columns_; }
    [[nodiscard]] Reduction reduction() const noexcept { return mode_; }
    [[nodiscard]] const std::vector<Competency>& competencies() const noexcept { return competencies_; }
    [[nodiscard]] bool active(std::size_t competency, std::size_t channel) const {
        return mask_[competency * columns_ + channel] != 0;
    }
    [[nodiscard]] std::size_t active_cells() const noexcept;
    /// Whether row i has at least one active cell.
    [[nodiscard]] bool engaged(std::size_t competency) const;
    [[nodiscard]] std::vector<std::vector<std::uint8_t>> mask_rows() const;

    /// Same competencies and mask under another reduction.
    [[nodiscard]] CompetencyMap with_reduction(Reduction mode) const;

    friend bool operator==(const CompetencyMap&, const CompetencyMap&) = default;

private:
    std::vector<Competency> competencies_;
    std::vector<std::uint8_t> mask_;
    std::size_t columns_ = 0;
    Reduction mode_ = Reduction::aggregate;
};

/// Resolves a competency's taxonomy coordinate. Throws UnknownCompetency or
/// UnknownTaxonomyLevel.
TaxonomyCoordinate classify_competency(std::string_view id, const CompetencyMap& map,
                                       const Taxonomy& taxonomy);

// -- realized signal --------------------------------------------------------

struct MaskCell {
    std::size_t competency = 0;
    std::size_t channel = 0;

    friend bool operator==(const MaskCell&, const MaskCell&) = default;
};

/// p signal channels over the event time axis.
struct CompetencySignal {
    std::size_t periods = 0;
    std::vector<std::string> names;
    std::vector<std::vector<MaskCell>> provenance;  ///< cells feeding each channel
    std::vector<double> values;                     ///< row-major periods x p

    [[nodiscard]] std::size_t channels() const noexcept { return names.size(); }
    [[nodiscard]] std::int64_t time_at(std::size_t row) const noexcept {
        return static_cast<std::int64_t>(row) + 1;
    }
    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return {values.data() + r * channels(), channels()};
    }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * channels() + c]; }
};

/// Realizes v(t) from x(t). Aggregate: u^i(t) = sum_j v_i^j x^j(t).
/// Masked: one channel per active cell carrying x^j(t).
/// Throws DimensionMismatch or EmptySignal.
CompetencySignal bind_competencies(const EventMatrix& events, const CompetencyMap& map);

/// Treats the event channels themselves as the signal (identity binding).
CompetencySignal signal_from_events(const EventMatrix& events);

}  // namespace dtwin
