#include "dtwin/regime.hpp"

#include <cmath>
#include <utility>

#include "dtwin/error.hpp"

namespace dtwin {

namespace {

struct ResolvedIntervention {
    std::size_t first_row;
    std::size_t last_row;  // inclusive
    std::vector<std::size_t> channels;
    double delta;
};

ResolvedIntervention resolve(const EventMatrix& events, const Intervention& iv) {
    const auto periods = static_cast<std::int64_t>(events.periods());
    if (iv.start < 1 || iv.duration < 1 || iv.start + iv.duration - 1 > periods) {
        throw Error(ErrorCode::OutOfRange, "intervention '" + iv.name + "' covers t = " + std::to_string(iv.start) +
                                               ".." + std::to_string(iv.start + iv.duration - 1) +
                                               " outside 1.." + std::to_string(periods));
    }
    if (!std::isfinite(iv.delta_per_period)) {
        throw Error(ErrorCode::NonFiniteInput, "intervention '" + iv.name + "' has a non-finite delta");
    }
    if (iv.channels.empty()) {
        throw Error(ErrorCode::UnknownChannel, "intervention '" + iv.name + "' targets no channels");
    }
    ResolvedIntervention out{static_cast<std::size_t>(iv.start - 1),
                             static_cast<std::size_t>(iv.start + iv.duration - 2), {}, iv.delta_per_period};
    for (const auto& name : iv.channels) {
        const std::size_t j = events.find_channel(name);
        if (j == events.channels()) {
            throw Error(ErrorCode::UnknownChannel, "intervention '" + iv.name + "' targets unknown channel '" + name + "'");
        }
        out.channels.push_back(j);
    }
    return out;
}

}  // namespace

EventMatrix apply_scenario(const EventMatrix& events, const Scenario& scenario) {
    std::vector<ResolvedIntervention> resolved;
    resolved.reserve(scenario.size());
    for (const auto& iv : scenario) resolved.push_back(resolve(events, iv));

    const std::size_t n = events.channels();
    RawEventGrid raw = events.to_raw();
    for (const auto& iv : resolved) {
        if (iv.delta == 0.0) continue;  // keeps -0.0 cells and zero overlays bit-identical
        for (std::size_t r = iv.first_row; r <= iv.last_row; ++r) {
            for (const std::size_t j : iv.channels) raw.values[r * n + j] += iv.delta;
        }
    }
    return validate_event_matrix(std::move(raw));
}

Regime::Regime(std::string name, EventMatrix events, CompetencyMap map, Scenario scenario, double install_cost)
    : name_(std::move(name)), events_(std::move(events)), map_(std::move(map)), scenario_(std::move(scenario)),
      install_cost_(install_cost) {
    if (map_.columns() != events_.channels()) {
        throw Error(ErrorCode::DimensionMismatch, "regime '" + name_ + "': map has " + std::to_string(map_.columns()) +
                                                      " columns, events have " + std::to_string(events_.channels()) +
                                                      " channels");
    }
    if (!std::isfinite(install_cost_) || install_cost_ < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "regime '" + name_ + "': install cost must be finite and >= 0");
    }
    for (const auto& iv : scenario_) resolve(events_, iv);
}

EventMatrix Regime::effective_events() const { return apply_scenario(events_, scenario_); }

double engaged_competency_cost(const CompetencyMap& map) {
    double cost = 0.0;
    for (std::size_t i = 0; i < map.rows(); ++i) {
        if (map.engaged(i)) cost += map.competencies()[i].activation_cost;
    }
    return cost;
}

CostReport audit_costs(double base_cost, double install_cost, double competency_cost, double budget) {
    for (const double v : {base_cost, install_cost, competency_cost, budget}) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error(ErrorCode::NonFiniteInput, "costs and budget must be finite and non-negative");
        }
    }
    CostReport report;
    report.base_cost = base_cost;
    report.install_cost = install_cost;
    report.competency_cost = competency_cost;
    report.total_cost = base_cost + install_cost + competency_cost;
    report.budget = budget;
    report.within_budget = report.total_cost <= budget;
    return report;
}

CostReport audit_budget(const Regime& regime, double base_cost, double budget) {
    return audit_costs(base_cost, regime.install_cost(), engaged_competency_cost(regime.map()), budget);
}

Comparison compare_regimes(std::string name_a, double total_a, std::string name_b, double total_b,
                           std::optional<CostReport> cost_a, std::optional<CostReport> cost_b) {
    if (!std::isfinite(total_a) || !std::isfinite(total_b)) {
        throw Error(ErrorCode::NonFiniteInput, "regime totals must be finite");
    }
    Comparison c;
    c.name_a = std::move(name_a);
    c.name_b = std::move(name_b);
    c.total_a = total_a;
    c.total_b = total_b;
    c.delta = total_a - total_b;
    c.cost_a = std::move(cost_a);
    c.cost_b = std::move(cost_b);
    return c;
}

}  // namespace dtwin
