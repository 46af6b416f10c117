#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "dtwin/error.hpp"
#include "dtwin/io.hpp"
#include "dtwin/synth.hpp"
#include "helpers.hpp"

using namespace dtwin;
using testing::error_code_of;

TEST_SUITE("generator streams") {
    TEST_CASE("engine is the standard 64-bit Mersenne Twister") {
        // The standard fixes the 10000th output of a default-seeded mt19937_64.
        std::mt19937_64 reference;
        reference.discard(9999);
        CHECK(reference() == 9981545732273789042ULL);
    }

    TEST_CASE("uniform and normal variates stay in range") {
        SeededStream s(1);
        double sum = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double u = s.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            sum += s.normal();
        }
        CHECK(std::abs(sum / 20000.0) < 0.05);
    }

    TEST_CASE("splitmix64 reference value") {
        // First output of the published splitmix64 generator seeded with 0.
        CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    }
}

TEST_SUITE("generate_enterprise") {
    TEST_CASE("same config twice is bit-identical") {
        const GeneratorConfig config = default_generator_config();
        CHECK(io::write_event_csv(generate_enterprise(config)) == io::write_event_csv(generate_enterprise(config)));
        GeneratorConfig other = config;
        other.seed += 1;
        CHECK_FALSE(generate_enterprise(other) == generate_enterprise(config));
    }

    TEST_CASE("channel counting and tags") {
        GeneratorConfig config = default_generator_config();
        for (auto& p : config.processes) p.channel_count = 4;
        const EventMatrix m = generate_enterprise(config);
        CHECK(m.channels() == 12);
        std::map<std::string, std::size_t> per_tag;
        for (std::size_t j = 0; j < m.channels(); ++j) {
            per_tag[m.labels()[j].process]++;
            CHECK(m.labels()[j].process == config.processes[j / 4].name);
        }
        for (const auto& p : config.processes) CHECK(per_tag[p.name] == 4);
        CHECK(m.labels()[0].name == "logging-1");
    }

    TEST_CASE("defaults mirror the three timber processes") {
        const auto processes = default_processes();
        REQUIRE(processes.size() == 3);
        CHECK(processes[0].name == "logging");
        CHECK(processes[1].name == "river-delivery");
        CHECK(processes[2].name == "round-wood-production");
    }

    TEST_CASE("no noise and no season gives constant channels") {
        GeneratorConfig config = default_generator_config();
        for (auto& p : config.processes) {
            p.noise_level = 0.0;
            p.seasonal_amplitude = 0.0;
        }
        const EventMatrix m = generate_enterprise(config);
        for (std::size_t r = 0; r < m.periods(); ++r) {
            std::size_t j = 0;
            for (const auto& p : config.processes) {
                for (std::size_t c = 0; c < p.channel_count; ++c, ++j) CHECK(m.at(r, j) == p.base_level);
            }
        }
    }

    TEST_CASE("seasonal shape repeats every 12 periods") {
        GeneratorConfig config = default_generator_config();
        for (auto& p : config.processes) p.noise_level = 0.0;
        const EventMatrix m = generate_enterprise(config);
        for (std::size_t r = 12; r < m.periods(); ++r) {
            for (std::size_t j = 0; j < m.channels(); ++j) CHECK(m.at(r, j) == m.at(r - 12, j));
        }
        CHECK(seasonal_shape(7) == 1.0);
        CHECK(seasonal_shape(19) == 1.0);
    }

    TEST_CASE("invalid configs") {
        auto with = [](auto mutate) {
            GeneratorConfig c = default_generator_config();
            mutate(c);
            return error_code_of([&] { generate_enterprise(c); });
        };
        CHECK(with([](GeneratorConfig& c) { c.periods = 0; }) == ErrorCode::InvalidConfig);
        CHECK(with([](GeneratorConfig& c) { c.processes.clear(); }) == ErrorCode::InvalidConfig);
        CHECK(with([](GeneratorConfig& c) { c.processes[0].channel_count = 0; }) == ErrorCode::InvalidConfig);
        CHECK(with([](GeneratorConfig& c) { c.processes[1].noise_level = -1.0; }) == ErrorCode::InvalidConfig);
        CHECK(with([](GeneratorConfig& c) { c.processes[2].seasonal_amplitude = -0.1; }) == ErrorCode::InvalidConfig);
        CHECK(with([](GeneratorConfig& c) { c.processes[2].name = "logging"; }) == ErrorCode::InvalidConfig);
        CHECK(with([](GeneratorConfig& c) { c.map_density = 1.5; }) == ErrorCode::InvalidConfig);
        CHECK(with([](GeneratorConfig& c) { c.map_density = std::nan(""); }) == ErrorCode::InvalidConfig);
        CHECK(with([](GeneratorConfig& c) { c.competency_count = 0; }) == ErrorCode::InvalidConfig);
    }
}

TEST_SUITE("generate_competency_map") {
    TEST_CASE("degenerate densities") {
        GeneratorConfig config = default_generator_config();
        config.map_density = 0.0;
        CHECK(generate_competency_map(config, 10).active_cells() == 0);
        config.map_density = 1.0;
        CHECK(generate_competency_map(config, 10).active_cells() == config.competency_count * 10);
    }

    TEST_CASE("same seed, same mask") {
        const GeneratorConfig config = default_generator_config();
        CHECK(generate_competency_map(config, 12) == generate_competency_map(config, 12));
        GeneratorConfig other = config;
        other.seed = 1;
        CHECK_FALSE(generate_competency_map(other, 12) == generate_competency_map(config, 12));
    }

    TEST_CASE("domains assigned round-robin") {
        GeneratorConfig config = default_generator_config();
        config.competency_count = 9;
        const CompetencyMap map = generate_competency_map(config, 3);
        const char* order[] = {"cognitive", "affective", "psychomotor"};
        for (std::size_t i = 0; i < 9; ++i) {
            CHECK(map.competencies()[i].coordinate.domain == order[i % 3]);
            CHECK(classify_competency(map.competencies()[i].id, map, bloom_taxonomy()) ==
                  map.competencies()[i].coordinate);
        }
        CHECK(map.competencies()[3].coordinate.level == "comprehension");
    }

    TEST_CASE("empirical density converges") {
        GeneratorConfig config = default_generator_config();
        config.competency_count = 100;
        for (const double density : {0.05, 0.3, 0.5, 0.9}) {
            config.map_density = density;
            const CompetencyMap map = generate_competency_map(config, 100);
            const double empirical = static_cast<double>(map.active_cells()) / 10000.0;
            CHECK(std::abs(empirical - density) <= 0.02);
        }
    }

    TEST_CASE("zero channels") {
        CHECK(error_code_of([] { generate_competency_map(default_generator_config(), 0); }) == ErrorCode::InvalidConfig);
    }
}
