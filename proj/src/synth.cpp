#include "dtwin/synth.hpp"

#include <cmath>
#include <set>

#include "dtwin/error.hpp"

namespace dtwin {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<ProcessSpec> default_processes() {
    return {
        {"logging", 4, 8000.0, 0.35, 400.0},
        {"river-delivery", 3, 6000.0, 0.8, 300.0},
        {"round-wood-production", 5, 10000.0, 0.15, 500.0},
    };
}

GeneratorConfig default_generator_config() {
    GeneratorConfig config;
    config.processes = default_processes();
    return config;
}

void GeneratorConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (periods < 1) fail("periods must be at least 1");
    if (processes.empty()) fail("at least one process is required");
    if (!(map_density >= 0.0 && map_density <= 1.0)) fail("map_density must lie in [0, 1]");
    if (competency_count < 1) fail("competency_count must be at least 1");
    if (!std::isfinite(activation_cost) || activation_cost < 0.0) fail("activation_cost must be finite and >= 0");
    std::set<std::string_view> names;
    for (const auto& p : processes) {
        if (p.name.empty() || !names.insert(p.name).second) fail("process name '" + p.name + "' is empty or repeated");
        if (p.channel_count < 1) fail("process '" + p.name + "' needs at least one channel");
        if (!std::isfinite(p.base_level)) fail("process '" + p.name + "' has a non-finite base_level");
        if (!std::isfinite(p.seasonal_amplitude) || p.seasonal_amplitude < 0.0) {
            fail("process '" + p.name + "' needs a finite seasonal_amplitude >= 0");
        }
        if (!std::isfinite(p.noise_level) || p.noise_level < 0.0) {
            fail("process '" + p.name + "' needs a finite noise_level >= 0");
        }
    }
}

EventMatrix generate_enterprise(const GeneratorConfig& config) {
    config.validate();
    RawEventGrid raw;
    for (const auto& p : config.processes) {
        for (std::size_t c = 0; c < p.channel_count; ++c) {
            raw.labels.push_back({p.name + "-" + std::to_string(c + 1), p.name});
        }
    }
    const std::size_t n = raw.labels.size();
    raw.values.reserve(config.periods * n);

    SeededStream stream(config.seed);
    for (std::size_t r = 0; r < config.periods; ++r) {
        const auto t = static_cast<std::int64_t>(r) + 1;
        raw.time.push_back(t);
        const double s = seasonal_shape(t);
        for (const auto& p : config.processes) {
            const double level = p.base_level * (1.0 + p.seasonal_amplitude * s);
            for (std::size_t c = 0; c < p.channel_count; ++c) {
                // Draw even for noiseless processes so adding noise elsewhere
                // does not reshuffle the stream.
                const double z = stream.normal();
                raw.values.push_back(p.noise_level == 0.0 ? level : level + p.noise_level * z);
            }
        }
    }
    return validate_event_matrix(std::move(raw));
}

CompetencyMap generate_competency_map(const GeneratorConfig& config, std::size_t channels, Reduction mode,
                                      const Taxonomy& taxonomy) {
    config.validate();
    if (channels < 1) throw Error(ErrorCode::InvalidConfig, "competency map needs at least one channel");

    const auto& domains = taxonomy.domains();
    std::vector<Competency> competencies;
    competencies.reserve(config.competency_count);
    for (std::size_t i = 0; i < config.competency_count; ++i) {
        const auto& domain = domains[i % domains.size()];
        const auto& level = domain.levels[(i / domains.size()) % domain.levels.size()];
        Competency c;
        c.id = "c" + std::to_string(i + 1) + "-" + level;
        c.name = domain.name + " / " + level;
        c.coordinate = {domain.name, level};
        c.activation_cost = config.activation_cost;
        competencies.push_back(std::move(c));
    }

    SeededStream stream(splitmix64(config.seed));
    std::vector<std::vector<std::uint8_t>> mask(config.competency_count, std::vector<std::uint8_t>(channels, 0));
    for (auto& row : mask) {
        for (auto& cell : row) cell = stream.bernoulli(config.map_density) ? 1 : 0;
    }
    return CompetencyMap(std::move(competencies), std::move(mask), mode, taxonomy);
}

}  // namespace dtwin
