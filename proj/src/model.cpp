#include "dtwin/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "dtwin/error.hpp"

namespace dtwin {

std::size_t EventMatrix::find_channel(std::string_view name) const noexcept {
    const auto it = std::find_if(labels_.begin(), labels_.end(),
                                 [&](const ChannelLabel& l) { return l.name == name; });
    return static_cast<std::size_t>(it - labels_.begin());
}

RawEventGrid EventMatrix::to_raw() const {
    RawEventGrid raw;
    raw.time.reserve(periods_);
    for (std::size_t r = 0; r < periods_; ++r) raw.time.push_back(time_at(r));
    raw.labels = labels_;
    raw.values = values_;
    return raw;
}

EventMatrix validate_event_matrix(RawEventGrid raw) {
    const std::size_t n = raw.labels.size();
    const std::size_t periods = raw.time.size();
    if (n == 0 || periods == 0) {
        throw Error(ErrorCode::EmptyModel, "event model needs at least one period and one channel (got " +
                                               std::to_string(periods) + " x " + std::to_string(n) + ")");
    }
    if (raw.values.size() != n * periods) {
        throw Error(ErrorCode::DimensionMismatch, "value grid holds " + std::to_string(raw.values.size()) +
                                                      " cells, expected " + std::to_string(n * periods));
    }
    for (std::size_t r = 0; r < periods; ++r) {
        const auto expected = static_cast<std::int64_t>(r) + 1;
        if (raw.time[r] != expected) {
            throw Error(ErrorCode::TimeAxisGap, "row " + std::to_string(r + 1) + " has t = " +
                                                    std::to_string(raw.time[r]) + ", expected t = " +
                                                    std::to_string(expected));
        }
    }
    std::set<std::string_view> seen;
    for (const auto& label : raw.labels) {
        if (label.name.empty()) throw Error(ErrorCode::MalformedHeader, "empty channel name");
        if (label.process.empty()) {
            throw Error(ErrorCode::MalformedHeader, "channel '" + label.name + "' has no business-process tag");
        }
        if (!seen.insert(label.name).second) {
            throw Error(ErrorCode::MalformedHeader, "duplicate channel name '" + label.name + "'");
        }
    }
    for (std::size_t r = 0; r < periods; ++r) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(raw.values[r * n + j])) {
                throw Error(ErrorCode::NonFiniteValue,
                            "non-finite value at (t=" + std::to_string(r + 1) + ", j=" + std::to_string(j + 1) + ")");
            }
        }
    }
    EventMatrix m;
    m.periods_ = periods;
    m.labels_ = std::move(raw.labels);
    m.values_ = std::move(raw.values);
    return m;
}

// -- taxonomy ---------------------------------------------------------------

Taxonomy::Taxonomy(std::vector<TaxonomyDomain> domains) : domains_(std::move(domains)) {
    constexpr std::string_view expected[] = {kCognitive, kAffective, kPsychomotor};
    if (domains_.size() != 3) {
        throw Error(ErrorCode::InvalidTaxonomy,
                    "taxonomy needs exactly three domains, got " + std::to_string(domains_.size()));
    }
    for (std::size_t d = 0; d < 3; ++d) {
        if (domains_[d].name != expected[d]) {
            throw Error(ErrorCode::InvalidTaxonomy, "domain " + std::to_string(d + 1) + " must be '" +
                                                        std::string(expected[d]) + "', got '" +
                                                        domains_[d].name + "'");
        }
        if (domains_[d].levels.empty()) {
            throw Error(ErrorCode::InvalidTaxonomy, "domain '" + domains_[d].name + "' has no levels");
        }
        std::set<std::string_view> seen;
        for (const auto& level : domains_[d].levels) {
            if (level.empty() || !seen.insert(level).second) {
                throw Error(ErrorCode::InvalidTaxonomy,
                            "domain '" + domains_[d].name + "' has an empty or repeated level '" + level + "'");
            }
        }
    }
}

bool Taxonomy::contains(std::string_view domain, std::string_view level) const noexcept {
    for (const auto& d : domains_) {
        if (d.name == domain) return std::find(d.levels.begin(), d.levels.end(), level) != d.levels.end();
    }
    return false;
}

std::size_t Taxonomy::level_rank(std::string_view domain, std::string_view level) const {
    for (const auto& d : domains_) {
        if (d.name != domain) continue;
        const auto it = std::find(d.levels.begin(), d.levels.end(), level);
        if (it != d.levels.end()) return static_cast<std::size_t>(it - d.levels.begin());
        break;
    }
    throw Error(ErrorCode::UnknownTaxonomyLevel,
                "(" + std::string(domain) + ", " + std::string(level) + ") is not in the taxonomy");
}

const Taxonomy& bloom_taxonomy() {
    static const Taxonomy taxonomy{{
        {std::string(kCognitive), {"knowledge", "comprehension", "application", "analysis", "synthesis", "evaluation"}},
        {std::string(kAffective), {"perception", "reacting", "value-orientation", "organization", "characterization"}},
        {std::string(kPsychomotor), {"imitation", "control", "accuracy", "articulation", "naturalization"}},
    }};
    return taxonomy;
}

// -- competencies -----------------------------------------------------------

std::string_view to_string(Reduction r) noexcept {
    return r == Reduction::aggregate ? "aggregate" : "masked";
}

Reduction parse_reduction(std::string_view text) {
    if (text == "aggregate") return Reduction::aggregate;
    if (text == "masked") return Reduction::masked;
    throw Error(ErrorCode::InvalidConfig, "unknown reduction '" + std::string(text) + "'");
}

CompetencyMap::CompetencyMap(std::vector<Competency> competencies,
                             std::vector<std::vector<std::uint8_t>> mask, Reduction mode,
                             const Taxonomy& taxonomy)
    : competencies_(std::move(competencies)), mode_(mode) {
    if (competencies_.empty()) throw Error(ErrorCode::EmptyModel, "competency map needs at least one competency");
    if (mask.size() != competencies_.size()) {
        throw Error(ErrorCode::DimensionMismatch, "mask has " + std::to_string(mask.size()) + " rows for " +
                                                      std::to_string(competencies_.size()) + " competencies");
    }
    columns_ = mask.front().size();
    if (columns_ == 0) throw Error(ErrorCode::EmptyModel, "mask has no columns");

    std::set<std::string_view> ids;
    for (std::size_t i = 0; i < competencies_.size(); ++i) {
        const auto& c = competencies_[i];
        if (c.id.empty() || !ids.insert(c.id).second) {
            throw Error(ErrorCode::InvalidConfig, "competency id '" + c.id + "' is empty or repeated");
        }
        if (!std::isfinite(c.activation_cost) || c.activation_cost < 0.0) {
            throw Error(ErrorCode::InvalidConfig, "competency '" + c.id + "' has a negative or non-finite cost");
        }
        if (!taxonomy.contains(c.coordinate.domain, c.coordinate.level)) {
            throw Error(ErrorCode::UnknownTaxonomyLevel, "competency '" + c.id + "' is tagged (" +
                                                             c.coordinate.domain + ", " + c.coordinate.level +
                                                             "), which is not in the taxonomy");
        }
        if (mask[i].size() != columns_) {
            throw Error(ErrorCode::DimensionMismatch, "mask row " + std::to_string(i + 1) + " has " +
                                                          std::to_string(mask[i].size()) + " columns, expected " +
                                                          std::to_string(columns_));
        }
    }
    mask_.reserve(competencies_.size() * columns_);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        for (std::size_t j = 0; j < columns_; ++j) {
            if (mask[i][j] > 1) {
                throw Error(ErrorCode::InvalidMask, "mask cell (" + std::to_string(i + 1) + ", " +
                                                        std::to_string(j + 1) + ") is not 0 or 1");
            }
            mask_.push_back(mask[i][j]);
        }
    }
}

std::size_t CompetencyMap::active_cells() const noexcept {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

bool CompetencyMap::engaged(std::size_t competency) const {
    const auto first = mask_.begin() + static_cast<std::ptrdiff_t>(competency * columns_);
    return std::find(first, first + static_cast<std::ptrdiff_t>(columns_), std::uint8_t{1}) !=
           first + static_cast<std::ptrdiff_t>(columns_);
}

std::vector<std::vector<std::uint8_t>> CompetencyMap::mask_rows() const {
    std::vector<std::vector<std::uint8_t>> out(rows());
    for (std::size_t i = 0; i < rows(); ++i) {
        const auto first = mask_.begin() + static_cast<std::ptrdiff_t>(i * columns_);
        out[i].assign(first, first + static_cast<std::ptrdiff_t>(columns_));
    }
    return out;
}

CompetencyMap CompetencyMap::with_reduction(Reduction mode) const {
    CompetencyMap copy = *this;
    copy.mode_ = mode;
    return copy;
}

TaxonomyCoordinate classify_competency(std::string_view id, const CompetencyMap& map, const Taxonomy& taxonomy) {
    const auto& all = map.competencies();
    const auto it = std::find_if(all.begin(), all.end(), [&](const Competency& c) { return c.id == id; });
    if (it == all.end()) throw Error(ErrorCode::UnknownCompetency, "no competency '" + std::string(id) + "'");
    if (!taxonomy.contains(it->coordinate.domain, it->coordinate.level)) {
        throw Error(ErrorCode::UnknownTaxonomyLevel, "competency '" + it->id + "' is tagged (" +
                                                         it->coordinate.domain + ", " + it->coordinate.level +
                                                         "), which is not in the taxonomy");
    }
    return it->coordinate;
}

// -- binding ----------------------------------------------------------------

CompetencySignal bind_competencies(const EventMatrix& events, const CompetencyMap& map) {
    const std::size_t n = events.channels();
    if (map.columns() != n) {
        throw Error(ErrorCode::DimensionMismatch, "competency map has " + std::to_string(map.columns()) +
                                                      " columns but the event model has " + std::to_string(n) +
                                                      " channels");
    }
    CompetencySignal signal;
    signal.periods = events.periods();
    const auto& comps = map.competencies();

    if (map.reduction() == Reduction::aggregate) {
        const std::size_t m = map.rows();
        for (std::size_t i = 0; i < m; ++i) {
            signal.names.push_back(comps[i].id);
            auto& cells = signal.provenance.emplace_back();
            for (std::size_t j = 0; j < n; ++j) {
                if (map.active(i, j)) cells.push_back({i, j});
            }
        }
        signal.values.resize(events.periods() * m);
        for (std::size_t r = 0; r < events.periods(); ++r) {
            const auto x = events.row(r);
            for (std::size_t i = 0; i < m; ++i) {
                double u = 0.0;
                for (const auto& cell : signal.provenance[i]) u += x[cell.channel];
                signal.values[r * m + i] = u;
            }
        }
        return signal;
    }

    for (std::size_t i = 0; i < map.rows(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!map.active(i, j)) continue;
            signal.names.push_back(comps[i].id + "@" + events.labels()[j].name);
            signal.provenance.push_back({{i, j}});
        }
    }
    if (signal.names.empty()) throw Error(ErrorCode::EmptySignal, "masked reduction of an all-zero mask");
    const std::size_t p = signal.names.size();
    signal.values.resize(events.periods() * p);
    for (std::size_t r = 0; r < events.periods(); ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            signal.values[r * p + c] = events.at(r, signal.provenance[c].front().channel);
        }
    }
    return signal;
}

CompetencySignal signal_from_events(const EventMatrix& events) {
    CompetencySignal signal;
    signal.periods = events.periods();
    for (std::size_t j = 0; j < events.channels(); ++j) {
        signal.names.push_back(events.labels()[j].name);
        signal.provenance.push_back({{0, j}});
    }
    signal.values.assign(events.values().begin(), events.values().end());
    return signal;
}

}  // namespace dtwin
