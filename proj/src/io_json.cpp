#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "dtwin/error.hpp"
#include "dtwin/io.hpp"

namespace dtwin::io {

using nlohmann::json;

namespace {

TextLocation locate(std::string_view text, std::size_t byte) {
    TextLocation where{1, 1};
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++where.line;
            where.column = 1;
        } else {
            ++where.column;
        }
    }
    return where;
}

/// Source position of every value in a parsed document, keyed by node address.
/// The text is rescanned after a successful parse, so it is known to be valid.
class NodeIndex {
public:
    NodeIndex(std::string_view text, const json& root) : text_(text) {
        if (text_.substr(0, 3) == "\xEF\xBB\xBF") advance(3);
        visit(root);
    }

    [[nodiscard]] std::optional<TextLocation> find(const json& node) const {
        const auto it = where_.find(&node);
        if (it == where_.end()) return std::nullopt;
        return it->second;
    }

private:
    void advance(std::size_t n) {
        for (; n > 0 && pos_ < text_.size(); --n, ++pos_) {
            if (text_[pos_] == '\n') {
                ++here_.line;
                here_.column = 1;
            } else {
                ++here_.column;
            }
        }
    }

    void skip_space() {
        while (pos_ < text_.size() && std::strchr(" \t\r\n", text_[pos_]) != nullptr && text_[pos_] != '\0') advance(1);
    }

    std::string_view scan_string() {
        const std::size_t start = pos_;
        advance(1);
        while (pos_ < text_.size() && text_[pos_] != '"') advance(text_[pos_] == '\\' ? 2 : 1);
        advance(1);
        return text_.substr(start, pos_ - start);
    }

    void visit(const json& node) {
        skip_space();
        where_[&node] = here_;
        if (pos_ >= text_.size()) return;
        const char c = text_[pos_];
        if (c == '{') {
            advance(1);
            skip_space();
            while (pos_ < text_.size() && text_[pos_] != '}') {
                const std::string key = json::parse(scan_string()).get<std::string>();
                skip_space();
                advance(1);  // ':'
                visit(node.at(key));
                skip_space();
                if (pos_ < text_.size() && text_[pos_] == ',') advance(1);
                skip_space();
            }
            advance(1);
        } else if (c == '[') {
            advance(1);
            skip_space();
            for (std::size_t i = 0; pos_ < text_.size() && text_[pos_] != ']'; ++i) {
                visit(node.at(i));
                skip_space();
                if (pos_ < text_.size() && text_[pos_] == ',') advance(1);
                skip_space();
            }
            advance(1);
        } else if (c == '"') {
            scan_string();
        } else {
            while (pos_ < text_.size() && std::strchr(",]} \t\r\n", text_[pos_]) == nullptr) advance(1);
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    TextLocation here_{1, 1};
    std::unordered_map<const json*, TextLocation> where_;
};

/// Parsed document plus the source position of each of its values. Schema
/// errors raised while a Document is alive point at the offending value.
class Document {
public:
    explicit Document(std::string_view text) : root_(parse(text)), index_(text, root_), previous_(active_) {
        active_ = &index_;
    }
    ~Document() { active_ = previous_; }
    Document(const Document&) = delete;
    Document& operator=(const Document&) = delete;

    [[nodiscard]] const json& root() const noexcept { return root_; }

    static std::optional<TextLocation> locate_node(const json& node) {
        return active_ ? active_->find(node) : std::nullopt;
    }

    /// Runs `fn`, attaching the position of `node` to any unlocated failure.
    template <typename Fn>
    static auto at(const json& node, Fn&& fn) -> decltype(fn()) {
        try {
            return fn();
        } catch (const Error& e) {
            const auto where = locate_node(node);
            if (e.location() || !where) throw;
            throw Error(e.code(), e.what(), *where);
        }
    }

private:
    static json parse(std::string_view text) {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::MalformedDocument, e.what(), locate(text, e.byte == 0 ? 0 : e.byte - 1));
        }
    }

    json root_;
    NodeIndex index_;
    const NodeIndex* previous_;
    static thread_local const NodeIndex* active_;
};

thread_local const NodeIndex* Document::active_ = nullptr;

[[noreturn]] void bad(const json& at, const std::string& what) {
    if (const auto where = Document::locate_node(at)) throw Error(ErrorCode::MalformedDocument, what, *where);
    throw Error(ErrorCode::MalformedDocument, what);
}

const json& member(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) bad(obj, where + " must be an object");
    const auto it = obj.find(key);
    if (it == obj.end()) bad(obj, where + " lacks '" + key + "'");
    return *it;
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) bad(v, where + " must be a string");
    return v.get<std::string>();
}

double as_real(const json& v, const std::string& where) {
    if (!v.is_number()) bad(v, where + " must be a number");
    return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) bad(v, where + " must be an integer");
    return v.get<std::int64_t>();
}

std::size_t as_count(const json& v, const std::string& where) {
    if (!v.is_number_unsigned()) bad(v, where + " must be a non-negative integer");
    return v.get<std::size_t>();
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) bad(obj, where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            bad(value, where + " has unknown key '" + key + "'");
        }
    }
}

Taxonomy taxonomy_from(const json& doc) {
    const auto& domains = member(doc, "domains", "taxonomy");
    if (!domains.is_array()) bad(domains, "taxonomy.domains must be an array");
    std::vector<TaxonomyDomain> out;
    for (std::size_t d = 0; d < domains.size(); ++d) {
        const std::string where = "taxonomy.domains[" + std::to_string(d) + "]";
        TaxonomyDomain domain;
        domain.name = as_string(member(domains[d], "name", where), where + ".name");
        const auto& levels = member(domains[d], "levels", where);
        if (!levels.is_array()) bad(levels, where + ".levels must be an array");
        for (const auto& level : levels) domain.levels.push_back(as_string(level, where + ".levels[]"));
        out.push_back(std::move(domain));
    }
    return Document::at(domains, [&] { return Taxonomy(std::move(out)); });
}

json taxonomy_to(const Taxonomy& taxonomy) {
    json domains = json::array();
    for (const auto& d : taxonomy.domains()) domains.push_back({{"name", d.name}, {"levels", d.levels}});
    return {{"domains", domains}};
}

json cost_to(const std::optional<CostReport>& report) {
    if (!report) return nullptr;
    return {{"base_cost", report->base_cost},         {"install_cost", report->install_cost},
            {"competency_cost", report->competency_cost}, {"total_cost", report->total_cost},
            {"budget", report->budget},               {"within_budget", report->within_budget}};
}

std::optional<CostReport> cost_from(const json& v, const std::string& where) {
    if (v.is_null()) return std::nullopt;
    CostReport r;
    r.base_cost = as_real(member(v, "base_cost", where), where + ".base_cost");
    r.install_cost = as_real(member(v, "install_cost", where), where + ".install_cost");
    r.competency_cost = as_real(member(v, "competency_cost", where), where + ".competency_cost");
    r.total_cost = as_real(member(v, "total_cost", where), where + ".total_cost");
    r.budget = as_real(member(v, "budget", where), where + ".budget");
    const auto& verdict = member(v, "within_budget", where);
    if (!verdict.is_boolean()) bad(verdict, where + ".within_budget must be a boolean");
    r.within_budget = verdict.get<bool>();
    return r;
}

}  // namespace

// -- taxonomy -------------------------------------------------------------------

Taxonomy parse_taxonomy_json(std::string_view text) {
    const Document document(text);
    return taxonomy_from(document.root());
}

std::string write_taxonomy_json(const Taxonomy& taxonomy) { return taxonomy_to(taxonomy).dump(2) + "\n"; }

// -- competency map -------------------------------------------------------------

CompetencyMapDocument parse_competency_map_json(std::string_view text) {
    const Document document(text);
    const json& doc = document.root();
    if (!doc.is_object()) bad(doc, "competency map must be an object");
    reject_unknown(doc, {"reduction", "competencies", "mask", "taxonomy"}, "competency map");

    Taxonomy taxonomy = doc.contains("taxonomy") ? taxonomy_from(doc["taxonomy"]) : bloom_taxonomy();
    const Reduction mode =
        doc.contains("reduction")
            ? Document::at(doc["reduction"], [&] { return parse_reduction(as_string(doc["reduction"], "reduction")); })
            : Reduction::aggregate;

    const auto& comps = member(doc, "competencies", "competency map");
    if (!comps.is_array()) bad(comps, "competencies must be an array");
    std::vector<Competency> competencies;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string where = "competencies[" + std::to_string(i) + "]";
        reject_unknown(comps[i], {"id", "name", "domain", "level", "cost"}, where);
        Competency c;
        c.id = as_string(member(comps[i], "id", where), where + ".id");
        c.name = comps[i].contains("name") ? as_string(comps[i]["name"], where + ".name") : c.id;
        c.coordinate.domain = as_string(member(comps[i], "domain", where), where + ".domain");
        c.coordinate.level = as_string(member(comps[i], "level", where), where + ".level");
        c.activation_cost = comps[i].contains("cost") ? as_real(comps[i]["cost"], where + ".cost") : 0.0;
        competencies.push_back(std::move(c));
    }

    const auto& mask_doc = member(doc, "mask", "competency map");
    if (!mask_doc.is_array()) bad(mask_doc, "mask must be an array of rows");
    std::vector<std::vector<std::uint8_t>> mask;
    for (std::size_t i = 0; i < mask_doc.size(); ++i) {
        if (!mask_doc[i].is_array()) bad(mask_doc[i], "mask row " + std::to_string(i) + " must be an array");
        auto& row = mask.emplace_back();
        for (std::size_t j = 0; j < mask_doc[i].size(); ++j) {
            const auto& cell = mask_doc[i][j];
            if (!cell.is_number_integer() || (cell.get<std::int64_t>() != 0 && cell.get<std::int64_t>() != 1)) {
                Document::at(cell, [&] {
                    throw Error(ErrorCode::InvalidMask, "mask cell (" + std::to_string(i + 1) + ", " +
                                                            std::to_string(j + 1) + ") must be the integer 0 or 1");
                });
            }
            row.push_back(static_cast<std::uint8_t>(cell.get<std::int64_t>()));
        }
    }
    for (std::size_t i = 0; i < competencies.size(); ++i) {
        if (!taxonomy.contains(competencies[i].coordinate.domain, competencies[i].coordinate.level)) {
            Document::at(comps[i], [&] {
                throw Error(ErrorCode::UnknownTaxonomyLevel, "competency '" + competencies[i].id + "' is tagged (" +
                                                                 competencies[i].coordinate.domain + ", " +
                                                                 competencies[i].coordinate.level +
                                                                 "), which the taxonomy does not define");
            });
        }
    }
    CompetencyMap map = Document::at(doc, [&] { return CompetencyMap(std::move(competencies), std::move(mask), mode, taxonomy); });
    return {std::move(taxonomy), std::move(map)};
}

std::string write_competency_map_json(const CompetencyMap& map, const Taxonomy* embed_taxonomy) {
    json doc;
    doc["reduction"] = std::string(to_string(map.reduction()));
    json comps = json::array();
    for (const auto& c : map.competencies()) {
        comps.push_back({{"id", c.id},
                         {"name", c.name},
                         {"domain", c.coordinate.domain},
                         {"level", c.coordinate.level},
                         {"cost", c.activation_cost}});
    }
    doc["competencies"] = comps;
    doc["mask"] = map.mask_rows();
    if (embed_taxonomy) doc["taxonomy"] = taxonomy_to(*embed_taxonomy);
    return doc.dump(2) + "\n";
}

// -- scenario -------------------------------------------------------------------

Scenario parse_scenario_json(std::string_view text) {
    const Document document(text);
    const json& doc = document.root();
    reject_unknown(doc, {"interventions"}, "scenario");
    const auto& list = member(doc, "interventions", "scenario");
    if (!list.is_array()) bad(list, "interventions must be an array");
    Scenario scenario;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "interventions[" + std::to_string(i) + "]";
        reject_unknown(list[i], {"name", "start", "duration", "channels", "delta_per_period"}, where);
        Intervention iv;
        iv.name = list[i].contains("name") ? as_string(list[i]["name"], where + ".name") : where;
        iv.start = as_integer(member(list[i], "start", where), where + ".start");
        iv.duration = as_integer(member(list[i], "duration", where), where + ".duration");
        const auto& channels = member(list[i], "channels", where);
        if (!channels.is_array()) bad(channels, where + ".channels must be an array");
        for (const auto& ch : channels) iv.channels.push_back(as_string(ch, where + ".channels[]"));
        iv.delta_per_period = as_real(member(list[i], "delta_per_period", where), where + ".delta_per_period");
        scenario.push_back(std::move(iv));
    }
    return scenario;
}

std::string write_scenario_json(const Scenario& scenario) {
    json list = json::array();
    for (const auto& iv : scenario) {
        list.push_back({{"name", iv.name},
                        {"start", iv.start},
                        {"duration", iv.duration},
                        {"channels", iv.channels},
                        {"delta_per_period", iv.delta_per_period}});
    }
    return json{{"interventions", list}}.dump(2) + "\n";
}

// -- generator config -------------------------------------------------------------

GeneratorConfig parse_generator_config_json(std::string_view text) {
    const Document document(text);
    const json& doc = document.root();
    if (!doc.is_object()) bad(doc, "generator config must be an object");
    reject_unknown(doc, {"seed", "periods", "processes", "map_density", "competency_count", "activation_cost"},
                   "generator config");
    GeneratorConfig config = default_generator_config();
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) bad(doc["seed"], "seed must be a non-negative integer");
        config.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("periods")) config.periods = as_count(doc["periods"], "periods");
    if (doc.contains("map_density")) config.map_density = as_real(doc["map_density"], "map_density");
    if (doc.contains("competency_count")) config.competency_count = as_count(doc["competency_count"], "competency_count");
    if (doc.contains("activation_cost")) config.activation_cost = as_real(doc["activation_cost"], "activation_cost");
    if (doc.contains("processes")) {
        const auto& list = doc["processes"];
        if (!list.is_array()) bad(list, "processes must be an array");
        config.processes.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = "processes[" + std::to_string(i) + "]";
            reject_unknown(list[i], {"name", "channel_count", "base_level", "seasonal_amplitude", "noise_level"}, where);
            ProcessSpec p;
            p.name = as_string(member(list[i], "name", where), where + ".name");
            p.channel_count = as_count(member(list[i], "channel_count", where), where + ".channel_count");
            p.base_level = as_real(member(list[i], "base_level", where), where + ".base_level");
            if (list[i].contains("seasonal_amplitude")) {
                p.seasonal_amplitude = as_real(list[i]["seasonal_amplitude"], where + ".seasonal_amplitude");
            }
            if (list[i].contains("noise_level")) p.noise_level = as_real(list[i]["noise_level"], where + ".noise_level");
            config.processes.push_back(std::move(p));
        }
    }
    Document::at(doc, [&] { config.validate(); });
    return config;
}

std::string write_generator_config_json(const GeneratorConfig& config) {
    json processes = json::array();
    for (const auto& p : config.processes) {
        processes.push_back({{"name", p.name},
                             {"channel_count", p.channel_count},
                             {"base_level", p.base_level},
                             {"seasonal_amplitude", p.seasonal_amplitude},
                             {"noise_level", p.noise_level}});
    }
    json doc{{"seed", config.seed},
             {"periods", config.periods},
             {"processes", processes},
             {"map_density", config.map_density},
             {"competency_count", config.competency_count},
             {"activation_cost", config.activation_cost}};
    return doc.dump(2) + "\n";
}

// -- cost input -----------------------------------------------------------------

CostInput parse_cost_input_json(std::string_view text) {
    const Document document(text);
    const json& doc = document.root();
    if (!doc.is_object()) bad(doc, "cost input must be an object");
    reject_unknown(doc, {"base_cost", "install_cost", "competency_cost", "map", "budget"}, "cost input");
    CostInput in;
    in.base_cost = as_real(member(doc, "base_cost", "cost input"), "base_cost");
    if (doc.contains("install_cost")) in.install_cost = as_real(doc["install_cost"], "install_cost");
    if (doc.contains("competency_cost")) in.competency_cost = as_real(doc["competency_cost"], "competency_cost");
    if (doc.contains("map")) in.map = as_string(doc["map"], "map");
    if (doc.contains("budget")) in.budget = as_real(doc["budget"], "budget");
    return in;
}

// -- reports --------------------------------------------------------------------

namespace {

std::string cost_line(const std::string& name, const CostReport& c) {
    return "  " + name + ": base " + format_fixed(c.base_cost, 2) + " + install " + format_fixed(c.install_cost, 2) +
           " + competencies " + format_fixed(c.competency_cost, 2) + " = " + format_fixed(c.total_cost, 2) +
           " (budget " + format_fixed(c.budget, 2) + ", " + (c.within_budget ? "within budget" : "OVER BUDGET") +
           ")\n";
}

}  // namespace

std::string write_report(const Comparison& c) {
    std::ostringstream out;
    out << "Regime comparison\n";
    out << "  V(" << c.name_a << ") = " << format_fixed(c.total_a, 2) << "  [" << format_full(c.total_a) << "]\n";
    out << "  V(" << c.name_b << ") = " << format_fixed(c.total_b, 2) << "  [" << format_full(c.total_b) << "]\n";
    out << "  delta V = V(" << c.name_a << ") - V(" << c.name_b << ") = " << format_fixed(c.delta, 2) << "  ["
        << format_full(c.delta) << "]\n";
    if (c.cost_a || c.cost_b) {
        out << "Costs (thousand rubles)\n";
        if (c.cost_a) out << cost_line(c.name_a, *c.cost_a);
        if (c.cost_b) out << cost_line(c.name_b, *c.cost_b);
    }
    return out.str();
}

std::string write_report_json(const Comparison& c) {
    json doc{{"name_a", c.name_a},
             {"name_b", c.name_b},
             {"total_a", c.total_a},
             {"total_b", c.total_b},
             {"delta", c.delta},
             {"cost_a", cost_to(c.cost_a)},
             {"cost_b", cost_to(c.cost_b)},
             {"display",
              {{"total_a", format_fixed(c.total_a, 2)},
               {"total_b", format_fixed(c.total_b, 2)},
               {"delta", format_fixed(c.delta, 2)}}}};
    return doc.dump(2) + "\n";
}

Comparison parse_report_json(std::string_view text) {
    const Document document(text);
    const json& doc = document.root();
    Comparison c;
    c.name_a = as_string(member(doc, "name_a", "report"), "name_a");
    c.name_b = as_string(member(doc, "name_b", "report"), "name_b");
    c.total_a = as_real(member(doc, "total_a", "report"), "total_a");
    c.total_b = as_real(member(doc, "total_b", "report"), "total_b");
    c.delta = as_real(member(doc, "delta", "report"), "delta");
    c.cost_a = doc.contains("cost_a") ? cost_from(doc["cost_a"], "cost_a") : std::nullopt;
    c.cost_b = doc.contains("cost_b") ? cost_from(doc["cost_b"], "cost_b") : std::nullopt;
    return c;
}

// -- files ----------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to '" + path.string() + "'");
}

}  // namespace dtwin::io
