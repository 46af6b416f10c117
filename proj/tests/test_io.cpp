#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "dtwin/error.hpp"
#include "dtwin/io.hpp"
#include "helpers.hpp"
#include "reference_values.hpp"

using namespace dtwin;
using testing::error_code_of;

namespace {

std::string reference_fixture() { return io::read_file(std::filesystem::path(DTWIN_DATA_DIR) / "reference_taxonomy.csv"); }

struct Failure {
    ErrorCode code;
    std::optional<TextLocation> where;
};

template <typename Fn>
std::optional<Failure> failure_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return Failure{e.code(), e.location()};
    }
    return std::nullopt;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

double wild_double(std::mt19937_64& rng) {
    for (;;) {
        const std::uint64_t bits = rng();
        double d;
        std::memcpy(&d, &bits, sizeof d);
        if (std::isfinite(d)) return d;
    }
}

}  // namespace

TEST_SUITE("numbers") {
    TEST_CASE("format_fixed rounds half away from zero") {
        CHECK(io::format_fixed(1.005, 2) == "1.01");
        CHECK(io::format_fixed(-1.005, 2) == "-1.01");
        CHECK(io::format_fixed(2.675, 2) == "2.68");
        CHECK(io::format_fixed(0.125, 2) == "0.13");
        CHECK(io::format_fixed(0.0, 2) == "0.00");
        CHECK(io::format_fixed(-0.001, 2) == "0.00");
        CHECK(io::format_fixed(9.995, 2) == "10.00");
        CHECK(io::format_fixed(132.2, 2) == "132.20");
        CHECK(io::format_fixed(421.25, 0) == "421");
        CHECK(io::format_fixed(0.5, 0) == "1");
        CHECK(io::format_fixed(1e21, 2) == "1000000000000000000000.00");
        CHECK(io::format_fixed(1.5e-7, 7) == "0.0000002");
        CHECK(io::format_fixed(5491.180000000001, 2) == "5491.18");
    }

    TEST_CASE("format_full round-trips arbitrary doubles") {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 20000; ++i) {
            const double d = wild_double(rng);
            const std::string text = "t,a\n1," + io::format_full(d) + "\n";
            CHECK(same_bits(io::parse_event_csv(text).at(0, 0), d));
        }
        CHECK(io::format_full(0.1) == "0.1");
        CHECK(io::format_full(5674251.0) == "5674251");
    }
}

TEST_SUITE("event csv") {
    TEST_CASE("hand-readable matrix") {
        const EventMatrix m = io::parse_event_csv("t,a,b\n1,10,20\n2,11,21\n");
        CHECK(m.periods() == 2);
        CHECK(m.channels() == 2);
        CHECK(m.at(1, 0) == 11.0);
        CHECK(m.labels()[1].name == "b");
        CHECK(m.labels()[1].process == io::kDefaultProcess);
    }

    TEST_CASE("process prefix and quoted fields") {
        const EventMatrix m = io::parse_event_csv("t,\"logging/saw, north\",river/boat\n1,1.5,\"2\"\n");
        CHECK(m.labels()[0] == ChannelLabel{"saw, north", "logging"});
        CHECK(m.labels()[1] == ChannelLabel{"boat", "river"});
        CHECK(m.at(0, 1) == 2.0);
        CHECK(io::parse_event_csv(io::write_event_csv(m)) == m);
    }

    TEST_CASE("header must start with t") {
        const auto f = failure_of([] { io::parse_event_csv("time,a\n1,2\n"); });
        REQUIRE(f);
        CHECK(f->code == ErrorCode::MalformedHeader);
        REQUIRE(f->where);
        CHECK(f->where->line == 1);
    }

    TEST_CASE("comma decimal separator") {
        const auto f = failure_of([] { io::parse_event_csv("t,a\n1,\"1,5\"\n"); });
        REQUIRE(f);
        CHECK(f->code == ErrorCode::MalformedNumber);
        REQUIRE(f->where);
        CHECK(f->where->line == 2);
        CHECK(f->where->column == 3);
        // Unquoted, the comma splits the row into too many fields.
        CHECK(error_code_of([] { io::parse_event_csv("t,a\n1,1,5\n"); }) == ErrorCode::MalformedRow);
    }

    TEST_CASE("other defects") {
        CHECK(error_code_of([] { io::parse_event_csv("t,a\n1,2\n3,4\n"); }) == ErrorCode::TimeAxisGap);
        CHECK(error_code_of([] { io::parse_event_csv("t,a\n1,nan\n"); }) == ErrorCode::MalformedNumber);
        CHECK(error_code_of([] { io::parse_event_csv("t,a\n1,1e999\n"); }) == ErrorCode::MalformedNumber);
        CHECK(error_code_of([] { io::parse_event_csv("t,a\n1, 2\n"); }) == ErrorCode::MalformedNumber);
        CHECK(error_code_of([] { io::parse_event_csv("t,a\r\n1,2\r\n"); }) == ErrorCode::MalformedRow);
        CHECK(error_code_of([] { io::parse_event_csv("t,a\n1,2\n\n2,3\n"); }) == ErrorCode::MalformedRow);
        CHECK(error_code_of([] { io::parse_event_csv("t,a,a\n1,2,3\n"); }) == ErrorCode::MalformedHeader);
        CHECK(error_code_of([] { io::parse_event_csv("t\n1\n"); }) == ErrorCode::MalformedHeader);
        CHECK(error_code_of([] { io::parse_event_csv(""); }) == ErrorCode::MalformedHeader);
        CHECK(error_code_of([] { io::parse_event_csv("t,a\n"); }) == ErrorCode::EmptyModel);
        CHECK(error_code_of([] { io::parse_event_csv("t,\"a\n1,2\n"); }) == ErrorCode::MalformedRow);
    }

    TEST_CASE("round trip of random matrices is bit-exact") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 200; ++trial) {
            RawEventGrid raw;
            const std::size_t n = 1 + rng() % 6, periods = 1 + rng() % 20;
                        for (std::size_t j = 0; j < n; ++j) raw.labels.push_back({"c" + std::to_string(j), "p" + std::to_string(j % 2)});
            for (std::size_t r = 0; r < periods; ++r) {
                raw.time.push_back(static_cast<std::int64_t>(r) + 1);
                for (std::size_t j = 0; j < n; ++j) raw.values.push_back(wild_double(rng));
            }
            const EventMatrix m = validate_event_matrix(raw);
            const EventMatrix back = io::parse_event_csv(io::write_event_csv(m));
            CHECK(back.labels() == m.labels());
            CHECK(std::memcmp(back.values().data(), m.values().data(), m.values().size() * sizeof(double)) == 0);
        }
    }
}

TEST_SUITE("indicator csv") {
    TEST_CASE("reference taxonomy series") {
        const io::TableOneSeries table = io::parse_indicator_csv(reference_fixture());
        REQUIRE(table.rows.size() == 57);
        REQUIRE(table.declared_total);
        CHECK(*table.declared_total == 5491.18);
        CHECK(table.rows.front() == io::TableOneRow{1, 110.67});
        CHECK(table.rows.back() == io::TableOneRow{57, 167.90});
        CHECK(std::abs(table.resolved_total() - 5491.18) <= 0.5);
        CHECK(table.declared_total_consistent(0.5));
    }

    TEST_CASE("single row without total") {
        const io::TableOneSeries table = io::parse_indicator_csv("t,V\n1,110.67\n");
        CHECK(table.rows.size() == 1);
        CHECK_FALSE(table.declared_total);
        CHECK(table.resolved_total() == 110.67);
    }

    TEST_CASE("summary-only table") {
        const io::TableOneSeries table = io::parse_indicator_csv("t,V\nTotal,5069.93\n");
        CHECK(table.rows.empty());
        CHECK(table.resolved_total() == 5069.93);
    }

    TEST_CASE("defects") {
        const auto order = failure_of([] { io::parse_indicator_csv("t,V\n1,1\n3,1\n2,1\n"); });
        REQUIRE(order);
        CHECK(order->code == ErrorCode::NonMonotonicTime);
        REQUIRE(order->where);
        CHECK(order->where->line == 4);
        CHECK(error_code_of([] { io::parse_indicator_csv("t,W\n1,1\n"); }) == ErrorCode::MalformedHeader);
        CHECK(error_code_of([] { io::parse_indicator_csv("t,V\n1,-1\n"); }) == ErrorCode::MalformedNumber);
        CHECK(error_code_of([] { io::parse_indicator_csv("t,V\n1,x\n"); }) == ErrorCode::MalformedNumber);
        CHECK(error_code_of([] { io::parse_indicator_csv("t,V\nTotal,1\n1,1\n"); }) == ErrorCode::MalformedRow);
        CHECK(error_code_of([] { io::parse_indicator_csv("t,V\n1,1,2\n"); }) == ErrorCode::MalformedRow);
    }

    TEST_CASE("mismatched declared total is reported, not rejected") {
        const io::TableOneSeries table = io::parse_indicator_csv("t,V\n1,1\n2,2\nTotal,10\n");
        CHECK_FALSE(table.declared_total_consistent(0.5));
        CHECK(table.resolved_total() == 3.0);
    }

    TEST_CASE("engine series round-trips through csv") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 30; ++trial) {
            const auto rows = oracle::random_rows(rng, 20 + rng() % 30, 1 + rng() % 5, 1000.0);
            const IndicatorSeries series =
                indicator_series(testing::signal_from_rows(rows), WindowSpec{2 + rng() % 8, CorrelationMode::standardized,
                                                                             trial % 2 ? Startup::grow : Startup::skip});
            const IndicatorSeries back = io::to_indicator_series(io::parse_indicator_csv(io::write_indicator_csv(series)));
            CHECK(back.channel_names == series.channel_names);
            CHECK(back.points == series.points);
            CHECK(same_bits(back.grand_total, series.grand_total));
        }
    }

    TEST_CASE("table round-trips through csv") {
        const io::TableOneSeries table = io::parse_indicator_csv(reference_fixture());
        CHECK(io::parse_indicator_csv(io::write_indicator_csv(table)).rows == table.rows);
    }
}

TEST_SUITE("plot data") {
    TEST_CASE("reference strings reproduced at precision 2") {
        const io::TableOneSeries table = io::parse_indicator_csv(reference_fixture());
        std::string expected = "t,V\n";
        for (int t = 1; t <= 57; ++t) expected += std::to_string(t) + "," + testing::kReferenceValues[t - 1] + "\n";
        CHECK(io::emit_plot_data(table, 2) == expected);
        CHECK(io::emit_plot_data(io::to_indicator_series(table), 2) == expected);
    }

    TEST_CASE("empty series gives the header only") {
        CHECK(io::emit_plot_data(io::TableOneSeries{}, 2) == "t,V\n");
        IndicatorSeries empty;
        empty.channel_names = {"a", "b"};
        CHECK(io::emit_plot_data(empty, 2) == "t,V,a,b\n");
    }

    TEST_CASE("per-channel columns") {
        IndicatorSeries s;
        s.channel_names = {"a", "b"};
        s.append(13, {1.005, 2.0});
        CHECK(io::emit_plot_data(s, 2) == "t,V,a,b\n13,3.01,1.01,2.00\n");
        CHECK(io::emit_plot_data(s, 0) == "t,V,a,b\n13,3,1,2\n");
    }
}

TEST_SUITE("json documents") {
    TEST_CASE("taxonomy round trip and fixture") {
        const Taxonomy fixture = io::parse_taxonomy_json(io::read_file(std::filesystem::path(DTWIN_DATA_DIR) / "bloom_taxonomy.json"));
        CHECK(fixture == bloom_taxonomy());
        CHECK(io::parse_taxonomy_json(io::write_taxonomy_json(bloom_taxonomy())) == bloom_taxonomy());
    }

    TEST_CASE("competency map round trip") {
        std::mt19937_64 rng(4);
        for (int trial = 0; trial < 50; ++trial) {
            GeneratorConfig config = default_generator_config();
            config.seed = rng();
            config.competency_count = 1 + rng() % 20;
            config.map_density = static_cast<double>(rng() % 101) / 100.0;
            config.activation_cost = static_cast<double>(rng() % 1000) / 7.0;
            const CompetencyMap map = generate_competency_map(config, 1 + rng() % 15,
                                                              trial % 2 ? Reduction::masked : Reduction::aggregate);
            CHECK(io::parse_competency_map_json(io::write_competency_map_json(map)).map == map);
            const Taxonomy tax = bloom_taxonomy();
            const auto doc = io::parse_competency_map_json(io::write_competency_map_json(map, &tax));
            CHECK(doc.taxonomy == tax);
            CHECK(doc.map == map);
        }
    }

    TEST_CASE("scenario round trip and fixture") {
        const Scenario hr = io::parse_scenario_json(io::read_file(std::filesystem::path(DTWIN_DATA_DIR) / "hr_managers_scenario.json"));
        REQUIRE(hr.size() == 1);
        CHECK(hr[0].start == 7);
        CHECK(hr[0].duration == 6);
        CHECK(io::parse_scenario_json(io::write_scenario_json(hr)) == hr);
        std::mt19937_64 rng(6);
        for (int trial = 0; trial < 50; ++trial) {
            Scenario s;
            for (std::size_t i = 0; i < rng() % 4; ++i) {
                s.push_back({"iv" + std::to_string(i), static_cast<std::int64_t>(rng() % 50), static_cast<std::int64_t>(1 + rng() % 9),
                             {"a", "b/c"}, wild_double(rng)});
            }
            const Scenario back = io::parse_scenario_json(io::write_scenario_json(s));
            REQUIRE(back.size() == s.size());
            for (std::size_t i = 0; i < s.size(); ++i) CHECK(same_bits(back[i].delta_per_period, s[i].delta_per_period));
            CHECK(back == s);
        }
    }

    TEST_CASE("generator config round trip and defaults") {
        CHECK(io::parse_generator_config_json("{}") == default_generator_config());
        CHECK(io::parse_generator_config_json(io::read_file(std::filesystem::path(DTWIN_DATA_DIR) / "generator.json")) ==
              default_generator_config());
        GeneratorConfig c = default_generator_config();
        c.seed = 0xffffffffffffffffULL;
        c.map_density = 0.1;
        c.processes[1].noise_level = 0.0;
        CHECK(io::parse_generator_config_json(io::write_generator_config_json(c)) == c);
        CHECK(io::parse_generator_config_json("{\"seed\": 7}").seed == 7);
        CHECK(error_code_of([] { io::parse_generator_config_json("{\"sead\": 7}"); }) == ErrorCode::MalformedDocument);
        CHECK(error_code_of([] { io::parse_generator_config_json("{\"periods\": 0}"); }) == ErrorCode::InvalidConfig);
    }

    TEST_CASE("cost inputs") {
        const io::CostInput in = io::parse_cost_input_json(io::read_file(std::filesystem::path(DTWIN_DATA_DIR) / "cost_taxonomy.json"));
        CHECK(in.base_cost == 5641442.0);
        CHECK(in.install_cost == 32809.0);
        CHECK(in.budget == 5700000.0);
        CHECK(audit_costs(in.base_cost, in.install_cost, in.competency_cost, *in.budget).total_cost == 5674251.0);
        CHECK(error_code_of([] { io::parse_cost_input_json("{\"base_cost\": \"x\"}"); }) == ErrorCode::MalformedDocument);
    }

    TEST_CASE("syntax errors carry a location") {
        const auto f = failure_of([] { io::parse_scenario_json("{\n  \"interventions\": [\n    {,}\n"); });
        REQUIRE(f);
        CHECK(f->code == ErrorCode::MalformedDocument);
        REQUIRE(f->where);
        CHECK(f->where->line == 3);
    }

    TEST_CASE("schema errors") {
        CHECK(error_code_of([] { io::parse_competency_map_json("{\"reduction\":\"both\",\"competencies\":[],\"mask\":[]}"); }) ==
              ErrorCode::InvalidConfig);
        CHECK(error_code_of([] {
                  io::parse_competency_map_json(
                      "{\"reduction\":\"aggregate\",\"competencies\":[{\"id\":\"a\",\"name\":\"a\",\"domain\":\"cognitive\","
                      "\"level\":\"dancing\",\"cost\":0}],\"mask\":[[1]]}");
              }) == ErrorCode::UnknownTaxonomyLevel);
        CHECK(error_code_of([] { io::parse_taxonomy_json("{\"domains\": 3}"); }) == ErrorCode::MalformedDocument);
    }
}

TEST_SUITE("reports") {
    TEST_CASE("reference regime delta") {
        const std::string text = io::write_report(compare_regimes("taxonomy", 5491.18, "basic_mode", 5069.93));
        CHECK(text.find("421.25") != std::string::npos);
        CHECK(text.find("5491.18") != std::string::npos);
        CHECK(text.find("5069.93") != std::string::npos);
    }

    TEST_CASE("identical regimes show a zero delta") {
        CHECK(io::write_report(compare_regimes("a", 7.0, "b", 7.0)).find("0.00") != std::string::npos);
    }

    TEST_CASE("costs and verdicts appear") {
        const Comparison c = compare_regimes("taxonomy", 1.0, "basic", 2.0, audit_costs(5641442.0, 32809.0, 0.0, 5700000.0),
                                             audit_costs(100.0, 0.0, 0.0, 99.0));
        const std::string text = io::write_report(c);
        CHECK(text.find("5674251") != std::string::npos);
        CHECK(text.find("within budget") != std::string::npos);
        CHECK(text.find("OVER BUDGET") != std::string::npos);
    }

    TEST_CASE("json variant round-trips") {
        std::mt19937_64 rng(12);
        for (int trial = 0; trial < 100; ++trial) {
            const double a = std::abs(wild_double(rng)), b = std::abs(wild_double(rng));
            if (!std::isfinite(a - b)) continue;
            Comparison c = compare_regimes("a", a, "b", b);
            if (trial % 2) c = compare_regimes("a", a, "b", b, audit_costs(1.5, 2.0, 0.25, 3.0), audit_costs(0, 0, 0, 0));
            CHECK(io::parse_report_json(io::write_report_json(c)) == c);
        }
    }
}

TEST_SUITE("parser totality") {
    TEST_CASE("mutated inputs fail with a located diagnostic or parse cleanly") {
        const std::string events = "t,logging/a,b\n1,10,20.5\n2,11,-3e2\n3,\"12\",4\n";
        const std::string table = reference_fixture();
        const std::string json = io::write_scenario_json({{"hr", 2, 3, {"a"}, 1.5}});
        const std::string map_json = io::write_competency_map_json(
            CompetencyMap({{"a", "a", {"cognitive", "analysis"}, 2.0}, {"b", "b", {"affective", "reacting"}, 0.0}},
                          {{1, 0}, {1, 1}}, Reduction::masked));
        const std::string config_json = io::write_generator_config_json(default_generator_config());
        const std::string alphabet = "t,V\n\r\"0123456789.-+eE{}[]:xTotal ";
        std::mt19937_64 rng(21);
        std::size_t located = 0, failures = 0;
        for (int trial = 0; trial < 5000; ++trial) {
            const std::string* sources[] = {&events, &table, &json, &map_json, &config_json};
            const std::string& base = *sources[trial % 5];
            std::string text = base;
            for (std::size_t edits = 1 + rng() % 3; edits > 0; --edits) {
                const std::size_t pos = rng() % (text.size() + 1);
                switch (rng() % 3) {
                    case 0: text.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
                    case 1: if (pos < text.size()) text.erase(pos, 1); break;
                    default: if (pos < text.size()) text[pos] = alphabet[rng() % alphabet.size()]; break;
                }
            }
            try {
                switch (trial % 5) {
                    case 0: io::parse_event_csv(text); break;
                    case 1: io::parse_indicator_csv(text); break;
                    case 2: io::parse_scenario_json(text); break;
                    case 3: io::parse_competency_map_json(text); break;
                    default: io::parse_generator_config_json(text); break;
                }
            } catch (const Error& e) {
                ++failures;
                if (e.location()) ++located;
                else {
                    const std::string message = std::string("unlocated diagnostic: ") + e.what();
                    FAIL_CHECK(message);
                }
            }
        }
        CHECK(failures > 0);
        CHECK(located == failures);
    }
}
