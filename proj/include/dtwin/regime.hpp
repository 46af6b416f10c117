#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dtwin/model.hpp"

namespace dtwin {

/// Additive per-period amount applied to named event channels over
/// periods start .. start + duration - 1.
struct Intervention {
    std::string name;
    std::int64_t start = 1;
    std::int64_t duration = 1;
    std::vector<std::string> channels;
    double delta_per_period = 0.0;  ///< thousand rubles, may be negative

    friend bool operator==(const Intervention&, const Intervention&) = default;
};

using Scenario = std::vector<Intervention>;

/// Returns a copy of `events` with every intervention overlaid. Untouched
/// cells are copied bit for bit. Throws OutOfRange or UnknownChannel.
EventMatrix apply_scenario(const EventMatrix& events, const Scenario& scenario);

/// A named operating mode with its own events, map, scenario and one-time
/// installation cost. The constructor checks that the map binds to the
/// events and that every intervention fits.
class Regime {
public:
    Regime(std::string name, EventMatrix events, CompetencyMap map, Scenario scenario = {},
           double install_cost = 0.0);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const EventMatrix& events() const noexcept { return events_; }
    [[nodiscard]] const CompetencyMap& map() const noexcept { return map_; }
    [[nodiscard]] const Scenario& scenario() const noexcept { return scenario_; }
    [[nodiscard]] double install_cost() const noexcept { return install_cost_; }

    /// Events with the scenario applied.
    [[nodiscard]] EventMatrix effective_events() const;

private:
    std::string name_;
    EventMatrix events_;
    CompetencyMap map_;
    Scenario scenario_;
    double install_cost_;
};

struct CostReport {
    double base_cost = 0.0;
    double install_cost = 0.0;
    double competency_cost = 0.0;  ///< activation costs of engaged competencies
    double total_cost = 0.0;
    double budget = 0.0;
    bool within_budget = true;

    friend bool operator==(const CostReport&, const CostReport&) = default;
};

/// Sum of activation costs over competencies with at least one active cell,
/// each counted once.
double engaged_competency_cost(const CompetencyMap& map);

/// total = base + install + competency costs; verdict is total <= budget.
CostReport audit_costs(double base_cost, double install_cost, double competency_cost, double budget);

CostReport audit_budget(const Regime& regime, double base_cost, double budget);

struct Comparison {
    std::string name_a;
    std::string name_b;
    double total_a = 0.0;
    double total_b = 0.0;
    double delta = 0.0;  ///< total_a - total_b
    std::optional<CostReport> cost_a;
    std::optional<CostReport> cost_b;

    friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// Throws NonFiniteInput when either total is not finite.
Comparison compare_regimes(std::string name_a, double total_a, std::string name_b, double total_b,
                           std::optional<CostReport> cost_a = std::nullopt,
                           std::optional<CostReport> cost_b = std::nullopt);

}  // namespace dtwin
