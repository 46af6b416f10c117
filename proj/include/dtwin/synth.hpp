#pragma once

// Seeded synthetic enterprise: three business processes of a timber plant
// with a 12-period seasonal swing, plus random competency maps.
//
// Random streams use std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Uniform and normal variates are derived from raw 64-bit draws
// with integer arithmetic and additions only, so results are bit-identical on
// every conforming platform:
//   uniform(): (draw >> 11) * 2^-53, in [0, 1)
//   normal():  sum of 12 uniforms minus 6 (mean 0, variance 1)
// The event stream is seeded with `seed`; the mask stream with
// splitmix64(seed).

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dtwin/model.hpp"

namespace dtwin {

struct ProcessSpec {
    std::string name;
    std::size_t channel_count = 1;
    double base_level = 0.0;  ///< thousand rubles per period
    double seasonal_amplitude = 0.0;
    double noise_level = 0.0;  ///< standard deviation of the additive noise

    friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;
};

struct GeneratorConfig {
    std::uint64_t seed = 20211;
    std::size_t periods = 57;
    std::vector<ProcessSpec> processes;
    double map_density = 0.3;
    std::size_t competency_count = 12;
    double activation_cost = 0.0;  ///< per generated competency

    /// Throws InvalidConfig on any violated bound.
    void validate() const;

    friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

/// Logging, river delivery and round-wood production.
std::vector<ProcessSpec> default_processes();
GeneratorConfig default_generator_config();

/// Monthly multiplier offsets, peaking in the river navigation season.
inline constexpr std::array<double, 12> kSeasonalShape = {-0.6, -0.6, -0.5, -0.2, 0.3, 0.8,
                                                          1.0,  1.0,  0.7,  0.3,  -0.3, -0.5};

/// s(t) for 1-based t.
constexpr double seasonal_shape(std::int64_t t) noexcept {
    return kSeasonalShape[static_cast<std::size_t>((t - 1) % 12)];
}

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Portable variates over a standard engine.
class SeededStream {
public:
    explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double normal() noexcept {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += uniform();
        return s - 6.0;
    }
    bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

/// x^j(t) = base * (1 + amplitude * s(t)) + noise * normal(). Channels are
/// named "<process>-<index>" and tagged with their process.
EventMatrix generate_enterprise(const GeneratorConfig& config);

/// m x n mask with independent Bernoulli(map_density) cells drawn row-major;
/// competencies cycle through the three domains and, within a domain,
/// through its levels.
CompetencyMap generate_competency_map(const GeneratorConfig& config, std::size_t channels,
                                      Reduction mode = Reduction::aggregate,
                                      const Taxonomy& taxonomy = bloom_taxonomy());

}  // namespace dtwin
