#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtwin/error.hpp"
#include "dtwin/indicator.hpp"
#include "dtwin/io.hpp"
#include "dtwin/model.hpp"
#include "dtwin/regime.hpp"
#include "dtwin/synth.hpp"

namespace dtwin::cli {

namespace {

namespace fs = std::filesystem;

/// Reads option defaults from JSON: top-level objects named after a
/// subcommand hold that subcommand's options, e.g.
///   {"indicate": {"k": 12, "mode": "raw"}}
/// Values given on the command line win.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(input);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConfigError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!doc.is_object()) throw CLI::ConfigError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(doc, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto nested = parents;
                nested.push_back(key);
                collect(value, nested, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

struct SimulateArgs {
    std::string config;
    std::string out;
    std::string map_out;
    std::string reduction = "aggregate";
};

struct IndicateArgs {
    std::string events;
    std::string map;
    std::size_t k = 12;
    std::string mode = "standardized";
    std::string startup = "skip";
    std::string reduction;
    std::string out;
};

struct TotalArgs {
    std::string series;
    double tolerance = 0.5;
};

struct CompareArgs {
    std::string series_a;
    std::string series_b;
    std::string name_a;
    std::string name_b;
    std::string cost_a;
    std::string cost_b;
    std::optional<double> budget;
    double tolerance = 0.5;
    bool json = false;
};

struct ScenarioArgs {
    std::string events;
    std::string scenario;
    std::string out;
};

struct PlotArgs {
    std::string series;
    int precision = 2;
    std::string out;
};

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void warn_on_declared_total(const io::TableOneSeries& series, double tolerance, const std::string& source,
                            std::ostream& err) {
    if (series.declared_total_consistent(tolerance)) return;
    err << "warning: " << source << ": rows sum to " << io::format_full(series.resolved_total())
        << " but the declared total is " << io::format_full(*series.declared_total) << " (tolerance "
        << io::format_full(tolerance) << ")\n";
}

int do_simulate(const SimulateArgs& a, std::ostream& out) {
    const GeneratorConfig config =
        a.config.empty() ? default_generator_config() : io::parse_generator_config_json(io::read_file(a.config));
    const EventMatrix events = generate_enterprise(config);
    io::write_file(a.out, io::write_event_csv(events));
    out << "wrote " << events.periods() << " periods x " << events.channels() << " channels to " << a.out << "\n";
    if (!a.map_out.empty()) {
        const CompetencyMap map = generate_competency_map(config, events.channels(), parse_reduction(a.reduction));
        io::write_file(a.map_out, io::write_competency_map_json(map));
        out << "wrote " << map.rows() << " competencies (" << map.active_cells() << " active cells) to " << a.map_out
            << "\n";
    }
    return kExitOk;
}

int do_indicate(const IndicateArgs& a, std::ostream& out) {
    const EventMatrix events = io::parse_event_csv(io::read_file(a.events));
    auto doc = io::parse_competency_map_json(io::read_file(a.map));
    const CompetencyMap map = a.reduction.empty() ? doc.map : doc.map.with_reduction(parse_reduction(a.reduction));

    WindowSpec spec;
    spec.k = a.k;
    spec.mode = parse_correlation_mode(a.mode);
    spec.startup = parse_startup(a.startup);

    const IndicatorSeries series = indicator_series(bind_competencies(events, map), spec);
    io::write_file(a.out, io::write_indicator_csv(series));
    out << "evaluated t = " << series.first_t() << ".." << series.last_t() << " (" << series.points.size()
        << " periods, " << series.channel_names.size() << " channels)\n";
    out << "total V = " << io::format_fixed(series.grand_total, 2) << " [" << io::format_full(series.grand_total)
        << "]\n";
    return kExitOk;
}

int do_total(const TotalArgs& a, std::ostream& out, std::ostream& err) {
    const io::TableOneSeries series = io::parse_indicator_csv(io::read_file(a.series));
    warn_on_declared_total(series, a.tolerance, a.series, err);
    const double total = series.resolved_total();
    out << "total V = " << io::format_fixed(total, 2) << " [" << io::format_full(total) << "]\n";
    if (series.declared_total && !series.rows.empty()) {
        out << "declared total = " << io::format_fixed(*series.declared_total, 2) << " ("
            << (series.declared_total_consistent(a.tolerance) ? "consistent" : "MISMATCH") << ")\n";
    }
    return kExitOk;
}

std::optional<CostReport> audit_from_file(const std::string& path, const std::optional<double>& budget_flag) {
    if (path.empty()) return std::nullopt;
    const io::CostInput in = io::parse_cost_input_json(io::read_file(path));
    const auto budget = budget_flag ? budget_flag : in.budget;
    if (!budget) throw UsageError("no budget for '" + path + "': pass --budget or set \"budget\" in the cost file");
    double competency_cost = in.competency_cost;
    if (in.map) {
        fs::path map_path = *in.map;
        if (map_path.is_relative()) map_path = fs::path(path).parent_path() / map_path;
        competency_cost += engaged_competency_cost(io::parse_competency_map_json(io::read_file(map_path)).map);
    }
    return audit_costs(in.base_cost, in.install_cost, competency_cost, *budget);
}

int do_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
    const auto series_a = io::parse_indicator_csv(io::read_file(a.series_a));
    const auto series_b = io::parse_indicator_csv(io::read_file(a.series_b));
    warn_on_declared_total(series_a, a.tolerance, a.series_a, err);
    warn_on_declared_total(series_b, a.tolerance, a.series_b, err);

    const std::string name_a = a.name_a.empty() ? fs::path(a.series_a).stem().string() : a.name_a;
    const std::string name_b = a.name_b.empty() ? fs::path(a.series_b).stem().string() : a.name_b;
    const Comparison c = compare_regimes(name_a, series_a.resolved_total(), name_b, series_b.resolved_total(),
                                         audit_from_file(a.cost_a, a.budget), audit_from_file(a.cost_b, a.budget));
    out << (a.json ? io::write_report_json(c) : io::write_report(c));
    return kExitOk;
}

int do_scenario(const ScenarioArgs& a, std::ostream& out) {
    const EventMatrix events = io::parse_event_csv(io::read_file(a.events));
    const Scenario scenario = io::parse_scenario_json(io::read_file(a.scenario));
    io::write_file(a.out, io::write_event_csv(apply_scenario(events, scenario)));
    out << "applied " << scenario.size() << " intervention(s); wrote " << a.out << "\n";
    return kExitOk;
}

int do_plot(const PlotArgs& a, std::ostream& out) {
    if (a.precision < 0 || a.precision > 17) throw UsageError("--precision must lie in 0..17");
    const auto series = io::parse_indicator_csv(io::read_file(a.series));
    const std::string text = io::emit_plot_data(series, a.precision);
    if (a.out.empty() || a.out == "-") {
        out << text;
    } else {
        io::write_file(a.out, text);
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Enterprise digital-twin indicator engine", "dtwin"};
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config-file", "", "JSON file with option defaults, keyed by subcommand");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a seeded synthetic enterprise");
    simulate->add_option("--config", sim.config, "Generator config (JSON); built-in defaults when omitted");
    simulate->add_option("--out", sim.out, "Event matrix output (CSV)")->required();
    simulate->add_option("--map-out", sim.map_out, "Also write a random competency map (JSON)");
    simulate->add_option("--reduction", sim.reduction, "Reduction stored in the generated map")
        ->check(CLI::IsMember({"aggregate", "masked"}));

    IndicateArgs ind;
    auto* indicate = app.add_subcommand("indicate", "Compute the integral indicator series");
    indicate->add_option("--events", ind.events, "Event matrix (CSV)")->required();
    indicate->add_option("--map", ind.map, "Competency map (JSON)")->required();
    indicate->add_option("--k", ind.k, "Window length in periods")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    indicate->add_option("--mode", ind.mode, "Correlation mode")->check(CLI::IsMember({"raw", "standardized"}));
    indicate->add_option("--startup", ind.startup, "Startup policy")->check(CLI::IsMember({"skip", "grow"}));
    indicate->add_option("--reduction", ind.reduction, "Override the map's reduction")
        ->check(CLI::IsMember({"aggregate", "masked"}));
    indicate->add_option("--out", ind.out, "Indicator series output (CSV)")->required();

    TotalArgs tot;
    auto* total = app.add_subcommand("total", "Print the grand total of an indicator series");
    total->add_option("--series", tot.series, "Indicator series (CSV)")->required();
    total->add_option("--tolerance", tot.tolerance, "Allowed gap between row sum and declared total");

    CompareArgs cmp;
    auto* compare = app.add_subcommand("compare", "Compare two regimes by total indicator and cost");
    compare->add_option("--series-a", cmp.series_a, "Indicator series of regime a")->required();
    compare->add_option("--series-b", cmp.series_b, "Indicator series of regime b")->required();
    compare->add_option("--name-a", cmp.name_a, "Display name of regime a");
    compare->add_option("--name-b", cmp.name_b, "Display name of regime b");
    compare->add_option("--cost-a", cmp.cost_a, "Cost input of regime a (JSON)");
    compare->add_option("--cost-b", cmp.cost_b, "Cost input of regime b (JSON)");
    compare->add_option("--budget", cmp.budget, "Resource budget C (thousand rubles)");
    compare->add_option("--tolerance", cmp.tolerance, "Allowed gap between row sum and declared total");
    compare->add_flag("--json", cmp.json, "Machine-readable output");

    ScenarioArgs scn;
    auto* scenario = app.add_subcommand("scenario", "Overlay timed interventions on an event matrix");
    scenario->add_option("--events", scn.events, "Event matrix (CSV)")->required();
    scenario->add_option("--scenario", scn.scenario, "Scenario (JSON)")->required();
    scenario->add_option("--out", scn.out, "Event matrix output (CSV)")->required();

    PlotArgs plt;
    auto* plot = app.add_subcommand("plot-data", "Emit rounded t,V data for external plotting");
    plot->add_option("--series", plt.series, "Indicator series (CSV)")->required();
    plot->add_option("--precision", plt.precision, "Decimal places");
    plot->add_option("--out", plt.out, "Output CSV ('-' or omitted for stdout)");

    std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(reversed.begin(), reversed.end());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return do_simulate(sim, out);
        if (indicate->parsed()) return do_indicate(ind, out);
        if (total->parsed()) return do_total(tot, out, err);
        if (compare->parsed()) return do_compare(cmp, out, err);
        if (scenario->parsed()) return do_scenario(scn, out);
        if (plot->parsed()) return do_plot(plt, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitUsage;
}

}  // namespace dtwin::cli
