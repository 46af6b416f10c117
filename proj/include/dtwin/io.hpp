#pragma once

// Exchange formats.
//
// CSV (UTF-8, LF, ',' separator, '.' decimal point, optional RFC 4180 quotes):
//   events     header "t,<process>/<channel>,...", one row per period
//   indicator  header "t,V[,<channel>...]", optional trailing "Total,<value>"
// JSON: taxonomies, competency maps, scenarios, generator configs, cost
// inputs and comparison reports.
//
// Values are written with the shortest representation that parses back to
// the same double, so parse(write(x)) == x.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtwin/indicator.hpp"
#include "dtwin/model.hpp"
#include "dtwin/regime.hpp"
#include "dtwin/synth.hpp"

namespace dtwin::io {

// -- numbers ------------------------------------------------------------------

/// Shortest round-trip text for a finite double.
std::string format_full(double value);

/// Fixed-point text rounded half away from zero at `decimals` places. The
/// rounding works on the shortest decimal form of the value, so 1.005 at two
/// places gives "1.01".
std::string format_fixed(double value, int decimals);

// -- events -------------------------------------------------------------------

/// Channels without a "<process>/" prefix are tagged with this process.
inline constexpr std::string_view kDefaultProcess = "general";

EventMatrix parse_event_csv(std::string_view text);
std::string write_event_csv(const EventMatrix& events);

// -- indicator series ---------------------------------------------------------

struct TableOneRow {
    std::int64_t t = 0;
    double value = 0.0;

    friend bool operator==(const TableOneRow&, const TableOneRow&) = default;
};

/// Flat (t, V) indicator table, optionally with per-channel columns and a
/// declared total.
struct TableOneSeries {
    std::vector<TableOneRow> rows;
    std::vector<std::string> channel_names;
    std::vector<std::vector<double>> channel_values;  ///< per row; empty without channel columns
    std::optional<double> declared_total;

    /// Sum of the V column; the declared total when there are no rows.
    [[nodiscard]] double resolved_total() const;
    /// Whether the declared total (if any) agrees with the row sum within `tolerance`.
    [[nodiscard]] bool declared_total_consistent(double tolerance) const;

    friend bool operator==(const TableOneSeries&, const TableOneSeries&) = default;
};

/// Throws MalformedHeader, MalformedNumber, MalformedRow or NonMonotonicTime.
TableOneSeries parse_indicator_csv(std::string_view text);

/// Writes t, V and every channel at full precision plus a Total row.
std::string write_indicator_csv(const IndicatorSeries& series);
std::string write_indicator_csv(const TableOneSeries& series);

/// Rebuilds an IndicatorSeries: with channel columns they become the V_i(t),
/// otherwise the V column is a single channel named "V".
IndicatorSeries to_indicator_series(const TableOneSeries& table);
TableOneSeries to_table(const IndicatorSeries& series);

/// Plot-ready CSV "t,V[,channels]" with values rounded to `precision` places.
std::string emit_plot_data(const IndicatorSeries& series, int precision);
std::string emit_plot_data(const TableOneSeries& series, int precision);

// -- JSON documents -----------------------------------------------------------

Taxonomy parse_taxonomy_json(std::string_view text);
std::string write_taxonomy_json(const Taxonomy& taxonomy);

/// A map file may embed its own taxonomy; otherwise the Bloom default applies.
struct CompetencyMapDocument {
    Taxonomy taxonomy;
    CompetencyMap map;
};

CompetencyMapDocument parse_competency_map_json(std::string_view text);
std::string write_competency_map_json(const CompetencyMap& map, const Taxonomy* embed_taxonomy = nullptr);

Scenario parse_scenario_json(std::string_view text);
std::string write_scenario_json(const Scenario& scenario);

/// Missing keys keep their defaults; unknown keys are rejected.
GeneratorConfig parse_generator_config_json(std::string_view text);
std::string write_generator_config_json(const GeneratorConfig& config);

/// Cost inputs for one regime. `map` is a path to a competency map whose
/// engaged competencies add their activation costs.
struct CostInput {
    double base_cost = 0.0;
    double install_cost = 0.0;
    double competency_cost = 0.0;
    std::optional<std::string> map;
    std::optional<double> budget;

    friend bool operator==(const CostInput&, const CostInput&) = default;
};

CostInput parse_cost_input_json(std::string_view text);

// -- reports ------------------------------------------------------------------

std::string write_report(const Comparison& comparison);
std::string write_report_json(const Comparison& comparison);
Comparison parse_report_json(std::string_view text);

// -- files --------------------------------------------------------------------

/// Throws Io when the file cannot be read or written.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace dtwin::io
