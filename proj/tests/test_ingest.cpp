#include "heatkey/ingest.hpp"
#include "support/oracles.hpp"

#include <numeric>
#include <doctest.h>

using namespace heatkey;
using heatkey::testing::Rng;

namespace {

constexpr auto On = EventKind::ScreenOn;
constexpr auto Off = EventKind::ScreenOff;
constexpr auto CallStart = EventKind::CallStart;
constexpr auto CallEnd = EventKind::CallEnd;

std::int64_t total(const std::vector<ActiveInterval>& ivs)
{
    return std::accumulate(ivs.begin(), ivs.end(), std::int64_t{0},
                           [](std::int64_t acc, const ActiveInterval& iv) { return acc + iv.duration_ms(); });
}

bool sorted_disjoint(const std::vector<ActiveInterval>& ivs)
{
    for (std::size_t i = 0; i < ivs.size(); ++i) {
        if (ivs[i].start_ms >= ivs[i].end_ms) return false;
        if (i > 0 && ivs[i - 1].end_ms >= ivs[i].start_ms) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("parse_event_log")
{
    const auto log = parse_event_log(
        "# a comment\n"
        "{\"t\":0,\"kind\":\"screen_on\"}\n"
        "\n"
        "{\"t\":5000,\"kind\":\"call_start\"}\r\n"
        "{\"kind\":\"call_end\",\"t\":6000}\n"
        "{\"t\":9000,\"kind\":\"screen_off\"}");
    CHECK(log.events == std::vector<RawEvent>{{0, On}, {5000, CallStart}, {6000, CallEnd}, {9000, Off}});
    CHECK_FALSE(log.origin_ms);
    CHECK_FALSE(log.horizon_ms);
}

TEST_CASE("parse_event_log directives")
{
    const auto log = parse_event_log("# origin_ms: 1800000\n# horizon_ms: 7200000\n# other: note\n");
    CHECK(log.events.empty());
    CHECK(log.origin_ms == 1'800'000);
    CHECK(log.horizon_ms == 7'200'000);
    CHECK_THROWS_AS(parse_event_log("# horizon_ms: soon\n"), ParseError);
}

TEST_CASE("parse_event_log errors name the line")
{
    const auto line_of = [](std::string_view text) -> std::size_t {
        try {
            parse_event_log(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("{\"t\":-1,\"kind\":\"screen_on\"}") == 1);
    CHECK(line_of("# c\n{\"t\":1,\"kind\":\"screen_on\"}\n{\"t\":2,\"kind\":\"unlock\"}") == 3);
    CHECK(line_of("{\"t\":1.5,\"kind\":\"screen_on\"}") == 1);
    CHECK(line_of("{\"t\":\"1\",\"kind\":\"screen_on\"}") == 1);
    CHECK(line_of("{\"kind\":\"screen_on\"}") == 1);
    CHECK(line_of("{\"t\":1}") == 1);
    CHECK(line_of("\n\nnot json") == 3);
    CHECK(line_of("[1,2]") == 1);
    CHECK(line_of("{\"t\":18446744073709551615,\"kind\":\"screen_on\"}") == 1);
}

TEST_CASE("format_event_json is parseable")
{
    const RawEvent e{123456, CallEnd};
    CHECK(parse_event_json(format_event_json(e)) == e);
}

TEST_CASE("normalize_events")
{
    CHECK(normalize_events(std::vector<RawEvent>{{0, On}, {10, On}, {20, Off}}) ==
          std::vector<RawEvent>{{0, On}, {20, Off}});
    CHECK(normalize_events(std::vector<RawEvent>{{5, Off}}).empty());
    CHECK(normalize_events(std::vector<RawEvent>{{20, Off}, {0, On}}) ==
          std::vector<RawEvent>{{0, On}, {20, Off}});
    CHECK(normalize_events(std::vector<RawEvent>{{0, CallEnd}, {1, CallStart}, {2, CallStart}, {3, CallEnd}}) ==
          std::vector<RawEvent>{{1, CallStart}, {3, CallEnd}});
}

TEST_CASE("property: normalize_events is idempotent")
{
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const auto raw = heatkey::testing::random_whole_second_log(rng, 30, 3'600'000, 600'000);
        const auto once = normalize_events(raw);
        CHECK(normalize_events(once) == once);
    }
}

TEST_CASE("screen_intervals")
{
    CHECK(screen_intervals(std::vector<RawEvent>{{0, On}, {10000, Off}}, 10000) ==
          std::vector<ActiveInterval>{{0, 10000}});
    CHECK(screen_intervals(std::vector<RawEvent>{{0, On}, {10, Off}, {20, On}, {30, Off}}, 30) ==
          std::vector<ActiveInterval>{{0, 10}, {20, 30}});
    CHECK(screen_intervals(std::vector<RawEvent>{{50, On}}, 100) == std::vector<ActiveInterval>{{50, 100}});
    // Touching sessions are one maximal interval; zero-length ones vanish.
    CHECK(screen_intervals(std::vector<RawEvent>{{0, On}, {10, Off}, {10, On}, {20, Off}}, 20) ==
          std::vector<ActiveInterval>{{0, 20}});
    CHECK(screen_intervals(std::vector<RawEvent>{{5, On}, {5, Off}}, 20).empty());
}

TEST_CASE("subtract_calls")
{
    const std::vector<ActiveInterval> screen{{0, 100}};
    CHECK(subtract_calls(screen, std::vector<ActiveInterval>{{40, 60}}) ==
          std::vector<ActiveInterval>{{0, 40}, {60, 100}});
    CHECK(subtract_calls(screen, std::vector<ActiveInterval>{{0, 100}}).empty());
    CHECK(subtract_calls(std::vector<ActiveInterval>{{0, 50}}, std::vector<ActiveInterval>{{200, 300}}) ==
          std::vector<ActiveInterval>{{0, 50}});
    CHECK(subtract_calls(std::vector<ActiveInterval>{{0, 10}, {20, 30}, {40, 50}},
                         std::vector<ActiveInterval>{{5, 25}, {45, 60}}) ==
          std::vector<ActiveInterval>{{0, 5}, {25, 30}, {40, 45}});
}

TEST_CASE("property: subtract_calls matches a millisecond mask")
{
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const auto random_set = [&rng] {
            std::vector<ActiveInterval> ivs;
            for (int k = rng.integer(0, 6); k > 0; --k) {
                const auto a = rng.integer(0, 199);
                ivs.push_back({a, a + rng.integer(1, 40)});
            }
            return merge_intervals(ivs);
        };
        const auto screen = random_set();
        const auto calls = random_set();
        const auto out = subtract_calls(screen, calls);
        REQUIRE(sorted_disjoint(out));
        CHECK(total(out) <= total(screen));

        std::vector<int> mask(260, 0);
        for (const auto& s : screen) for (auto t = s.start_ms; t < s.end_ms; ++t) mask[t] = 1;
        for (const auto& c : calls) for (auto t = c.start_ms; t < c.end_ms; ++t) mask[t] = 0;
        std::vector<ActiveInterval> expected;
        for (std::int64_t t = 0; t < 260; ++t) {
            if (!mask[t]) continue;
            if (!expected.empty() && expected.back().end_ms == t) {
                ++expected.back().end_ms;
            } else {
                expected.push_back({t, t + 1});
            }
        }
        CHECK(out == expected);
    }
}

TEST_CASE("assign_to_periods examples")
{
    const EngineParams p;
    const PeriodGrid grid{0, 1'800'000};

    SUBCASE("a ten second glance is corrected")
    {
        const std::vector<ActiveInterval> active{{100'000, 110'000}};
        const auto u = assign_to_periods(active, grid, p, 2);
        REQUIRE(u.size() == 3);
        CHECK(u[0].usage_factor == 300.0 / 1800.0);
        CHECK(u[1].usage_factor == 0.0);
        CHECK(u[2].usage_factor == 0.0);
        const RawEvent ev[] = {{100'000, EventKind::ScreenOn}, {110'000, EventKind::ScreenOff}};
        const auto oracle = heatkey::testing::per_second_usage(ev, 0, 3 * 1'800'000, 3, p);
        CHECK(oracle == std::vector<double>{u[0].usage_factor, 0.0, 0.0});
    }
    SUBCASE("a long interval is split at the boundary")
    {
        const std::vector<ActiveInterval> active{{1'700'000, 2'000'000}};
        const auto u = assign_to_periods(active, grid, p, 1);
        CHECK(u[0].usage_factor == 100.0 / 1800.0);
        CHECK(u[1].usage_factor == 200.0 / 1800.0);
        const RawEvent ev[] = {{1'700'000, EventKind::ScreenOn}, {2'000'000, EventKind::ScreenOff}};
        const auto oracle = heatkey::testing::per_second_usage(ev, 0, 2 * 1'800'000, 2, p);
        CHECK(oracle == std::vector<double>{u[0].usage_factor, u[1].usage_factor});
    }
    SUBCASE("empty log still yields every period")
    {
        const auto u = assign_to_periods({}, grid, p, 2);
        CHECK(u == std::vector<PeriodSample>{{0, 0.0}, {1, 0.0}, {2, 0.0}});
    }
    SUBCASE("a glance straddling a boundary credits its start period")
    {
        const std::vector<ActiveInterval> active{{1'795'000, 1'805'000}};
        const auto u = assign_to_periods(active, grid, p, 1);
        CHECK(u[0].usage_factor == 300.0 / 1800.0);
        CHECK(u[1].usage_factor == 0.0);
    }
    SUBCASE("range errors")
    {
        const std::vector<ActiveInterval> late{{3'600'000, 3'600'010}};
        CHECK_THROWS_AS(assign_to_periods(late, grid, p, 1), std::out_of_range);
        const std::vector<ActiveInterval> early{{-5, 10}};
        CHECK_THROWS_AS(assign_to_periods(early, grid, p, 1), std::out_of_range);
        CHECK_THROWS_AS(assign_to_periods({}, PeriodGrid{0, 60'000}, p, 1), std::invalid_argument);
    }
}

TEST_CASE("property: conservation without corrections")
{
    Rng rng(5);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        EngineParams p;
        p.sampling_period = Millis{600'000};
        p.notification_threshold = Millis{0};
        const auto periods = static_cast<std::uint64_t>(rng.integer(2, 6));
        const std::int64_t horizon = static_cast<std::int64_t>(periods) * 600'000;
        const auto raw = heatkey::testing::random_whole_second_log(rng, 20, horizon, 600'000);
        const auto active = active_intervals(raw, horizon);
        const auto samples = assign_to_periods(active, PeriodGrid{0, 600'000}, p, periods - 1);
        REQUIRE(samples.size() == periods);
        double credited = 0.0;
        bool clamped = false;
        for (const auto& s : samples) {
            credited += s.usage_factor * 600'000.0;
            clamped = clamped || s.usage_factor == 1.0;
        }
        if (!clamped) {
            CHECK(credited == doctest::Approx(static_cast<double>(total(active))).epsilon(1e-12));
            ++checked;
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("property: usage factor is non-decreasing in each duration")
{
    Rng rng(17);
    const EngineParams p;
    for (int i = 0; i < 1000; ++i) {
        std::vector<Millis> d;
        for (int k = rng.integer(1, 6); k > 0; --k) d.push_back(Millis{rng.integer(0, 900'000)});
        const double before = period_usage_factor(d, p);
        const auto which = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(d.size()) - 1));
        d[which] += Millis{rng.integer(0, 600'000)};
        CHECK(period_usage_factor(d, p) >= before);
        const Millis t{rng.integer(0, 3'600'000)};
        CHECK(correct_duration(t, p) >= t);
    }
}

TEST_CASE("property: assign_to_periods agrees with the per-second oracle")
{
    Rng rng(31337);
    for (int i = 0; i < 300; ++i) {
        const auto p = heatkey::testing::random_params(rng);
        const auto period_ms = p.sampling_period.count();
        const auto periods = static_cast<std::uint64_t>(rng.integer(2, 6));
        const std::int64_t horizon = static_cast<std::int64_t>(periods) * period_ms;
        const auto raw = heatkey::testing::random_whole_second_log(rng, 20, horizon, period_ms);
        const auto samples =
            assign_to_periods(active_intervals(raw, horizon), PeriodGrid{0, period_ms}, p, periods - 1);
        const auto oracle = heatkey::testing::per_second_usage(raw, 0, horizon, periods, p);
        REQUIRE(samples.size() == oracle.size());
        for (std::size_t n = 0; n < oracle.size(); ++n) {
            CHECK(samples[n].usage_factor == oracle[n]);
        }
    }
}

TEST_CASE("aligned_origin")
{
    CHECK(aligned_origin(0, 1'800'000) == 0);
    CHECK(aligned_origin(1'799'999, 1'800'000) == 0);
    CHECK(aligned_origin(1'800'000, 1'800'000) == 1'800'000);
    CHECK(aligned_origin(1'700'000'123'456, 1'800'000) == 1'700'000'123'456 - 1'700'000'123'456 % 1'800'000);
}
