#include "heatkey/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace heatkey {

namespace {

std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

class ScenarioRng {
public:
    explicit ScenarioRng(std::uint64_t seed) : engine_(seed) {}

    // Hand-rolled draws: std distributions are not reproducible across
    // standard library implementations.
    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double exponential(double mean) { return -mean * std::log1p(-unit()); }

private:
    std::mt19937_64 engine_;
};

struct ScenarioBuilder {
    std::vector<RawEvent> events;

    void session(std::int64_t start, std::int64_t end)
    {
        events.push_back({start, EventKind::ScreenOn});
        events.push_back({end, EventKind::ScreenOff});
    }
    void call(std::int64_t start, std::int64_t end)
    {
        events.push_back({start, EventKind::CallStart});
        events.push_back({end, EventKind::CallEnd});
    }
};

// Glances arrive as a Poisson process; each ends at least a second before the next.
void scatter_glances(ScenarioBuilder& out, ScenarioRng& rng, std::int64_t from,
                     std::int64_t to, double mean_gap_ms)
{
    std::int64_t t = from;
    for (;;) {
        t += 1'000 + static_cast<std::int64_t>(rng.exponential(mean_gap_ms));
        const auto len = rng.between(scenario::kGlanceMinMs, scenario::kGlanceMaxMs);
        if (t + len > to) {
            return;
        }
        out.session(t, t + len);
        t += len;
    }
}

void typical_day(ScenarioBuilder& out, ScenarioRng& rng, std::int64_t origin,
                 std::int64_t horizon, std::int64_t period_ms)
{
    const auto length = horizon - origin;
    const auto midday = origin + static_cast<std::int64_t>(length * scenario::kMorningFraction);
    const auto evening =
        horizon - static_cast<std::int64_t>(length * scenario::kEveningFraction);

    std::int64_t t = midday;
    for (;;) {
        const auto gap = rng.between(scenario::kBurstGapMinMs, scenario::kBurstGapMaxMs);
        scatter_glances(out, rng, t, t + gap, static_cast<double>(gap) / 2.0);
        t += gap;
        if (t >= evening) {
            break;
        }
        const auto end = std::min(evening, t + rng.between(scenario::kBurstMinMs,
                                                           scenario::kBurstMaxMs));
        out.session(t, end);
        if (rng.unit() < scenario::kCallChance && end - t > 2'000) {
            const auto call_start = rng.between(t + 1'000, end - 1'000);
            const auto call_end =
                std::min(end, call_start + rng.between(30'000, scenario::kCallMaxMs));
            out.call(call_start, call_end);
        }
        t = end;
    }
    // Evening: the phone is mostly put aside, an occasional check.
    scatter_glances(out, rng, std::max(t, evening), horizon, 2.0 * static_cast<double>(period_ms));
}

}  // namespace

PeriodGrid grid_for(const EventLog& log, const EngineParams& params,
                    std::optional<std::int64_t> origin_override)
{
    PeriodGrid grid{0, params.sampling_period.count()};
    if (origin_override) {
        grid.origin_ms = *origin_override;
    } else if (log.origin_ms) {
        grid.origin_ms = *log.origin_ms;
    } else if (!log.events.empty()) {
        const auto first = std::min_element(
            log.events.begin(), log.events.end(),
            [](const RawEvent& a, const RawEvent& b) { return a.timestamp_ms < b.timestamp_ms; });
        grid.origin_ms = aligned_origin(first->timestamp_ms, grid.period_ms);
    }
    return grid;
}

std::optional<std::int64_t> log_horizon(const EventLog& log)
{
    std::optional<std::int64_t> horizon = log.horizon_ms;
    for (const auto& e : log.events) {
        horizon = std::max(horizon.value_or(e.timestamp_ms), e.timestamp_ms);
    }
    return horizon;
}

std::uint64_t period_count(const PeriodGrid& grid, std::int64_t horizon_ms)
{
    if (horizon_ms <= grid.origin_ms) {
        return 0;
    }
    return static_cast<std::uint64_t>((horizon_ms - grid.origin_ms + grid.period_ms - 1) /
                                      grid.period_ms);
}

std::vector<TimelineRecord> run_replay(const EventLog& log,
                                       const EngineParams& params,
                                       const PeriodGrid& grid)
{
    return run_replay(log, UsageEngine(params), grid);
}

std::vector<TimelineRecord> run_replay(const EventLog& log,
                                       UsageEngine engine,
                                       const PeriodGrid& grid)
{
    const auto horizon = log_horizon(log);
    if (!horizon) {
        return {};
    }
    auto periods = period_count(grid, *horizon);
    if (periods == 0 && !log.events.empty()) {
        periods = 1;
    }
    if (periods == 0) {
        return {};
    }

    const auto active = active_intervals(log.events, *horizon);
    const auto samples = assign_to_periods(active, grid, engine.params(), periods - 1);

    std::vector<TimelineRecord> records;
    records.reserve(samples.size());
    for (const auto& sample : samples) {
        auto msg = engine.advance(sample.usage_factor);
        records.push_back({msg.period_index, grid.period_start(sample.period_index),
                           sample.usage_factor, engine.state().overall_usage, msg.level,
                           msg.color, std::move(msg.phrase)});
    }
    return records;
}

std::string format_record(const TimelineRecord& r, OutputFormat format)
{
    if (format == OutputFormat::Csv) {
        return std::to_string(r.period_index) + ',' + std::to_string(r.period_start_ms) + ',' +
               format_real(r.usage_factor) + ',' + format_real(r.overall_usage) + ',' +
               std::to_string(r.level) + ',' + to_hex(r.color) + ',' + r.phrase;
    }
    return R"({"period":)" + std::to_string(r.period_index) +
           R"(,"start_ms":)" + std::to_string(r.period_start_ms) +
           R"(,"u":)" + format_real(r.usage_factor) +
           R"(,"y":)" + format_real(r.overall_usage) +
           R"(,"level":)" + std::to_string(r.level) +
           R"(,"color_hex":")" + to_hex(r.color) +
           R"(","phrase":)" + nlohmann::json(r.phrase).dump() + '}';
}

std::string format_timeline(const std::vector<TimelineRecord>& records, OutputFormat format)
{
    std::string out;
    if (format == OutputFormat::Csv) {
        out.append(kCsvHeader).push_back('\n');
    }
    for (const auto& r : records) {
        out.append(format_record(r, format)).push_back('\n');
    }
    return out;
}

const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names{"typical-day", "uninterrupted", "idle",
                                                "notification-storm"};
    return names;
}

std::string gen_scenario(std::string_view name,
                         std::uint64_t seed,
                         std::uint64_t horizon_periods,
                         std::int64_t period_ms,
                         std::int64_t origin_ms)
{
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw std::invalid_argument("unknown scenario \"" + std::string(name) + "\"");
    }
    const std::int64_t horizon = origin_ms + static_cast<std::int64_t>(horizon_periods) * period_ms;

    ScenarioBuilder builder;
    ScenarioRng rng(seed);
    if (name == "uninterrupted" && horizon > origin_ms) {
        builder.session(origin_ms, horizon);
    } else if (name == "notification-storm") {
        scatter_glances(builder, rng, origin_ms, horizon,
                        static_cast<double>(period_ms) / scenario::kStormGlancesPerPeriod);
    } else if (name == "typical-day") {
        typical_day(builder, rng, origin_ms, horizon, period_ms);
    }
    std::stable_sort(builder.events.begin(), builder.events.end(),
                     [](const RawEvent& a, const RawEvent& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                     });

    std::ostringstream out;
    out << "# scenario: " << name << " seed: " << seed << " periods: " << horizon_periods << '\n'
        << "# origin_ms: " << origin_ms << '\n'
        << "# horizon_ms: " << horizon << '\n';
    for (const auto& e : builder.events) {
        out << format_event_json(e) << '\n';
    }
    return out.str();
}

}  // namespace heatkey
