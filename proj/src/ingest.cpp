#include "heatkey/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include <json.hpp>

namespace heatkey {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<std::int64_t> parse_directive(std::string_view body, std::string_view key)
{
    if (body.substr(0, key.size()) != key) {
        return std::nullopt;
    }
    body = trim(body.substr(key.size()));
    if (body.empty() || body.front() != ':') {
        return std::nullopt;
    }
    body = trim(body.substr(1));
    std::int64_t value = 0;
    const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    if (ec != std::errc{} || end != body.data() + body.size() || value < 0) {
        throw std::invalid_argument("malformed " + std::string(key) + " directive");
    }
    return value;
}

// Shared state machine for one open/close stream. Returns maximal intervals.
std::vector<ActiveInterval> pair_up(std::span<const RawEvent> normalized,
                                    EventKind open,
                                    EventKind close,
                                    std::int64_t horizon_ms)
{
    std::vector<ActiveInterval> out;
    bool opened = false;
    std::int64_t opened_at = 0;
    const auto emit = [&out](std::int64_t start, std::int64_t end) {
        if (start >= end) {
            return;
        }
        if (!out.empty() && out.back().end_ms >= start) {
            out.back().end_ms = std::max(out.back().end_ms, end);
        } else {
            out.push_back({start, end});
        }
    };
    for (const auto& e : normalized) {
        if (e.kind == open && !opened) {
            opened = true;
            opened_at = e.timestamp_ms;
        } else if (e.kind == close && opened) {
            emit(opened_at, e.timestamp_ms);
            opened = false;
        }
    }
    if (opened) {
        emit(opened_at, horizon_ms);
    }
    return out;
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept
{
    switch (kind) {
    case EventKind::ScreenOn: return "screen_on";
    case EventKind::ScreenOff: return "screen_off";
    case EventKind::CallStart: return "call_start";
    case EventKind::CallEnd: return "call_end";
    }
    return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept
{
    for (auto kind : {EventKind::ScreenOn, EventKind::ScreenOff, EventKind::CallStart,
                      EventKind::CallEnd}) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    return std::nullopt;
}

std::int64_t aligned_origin(std::int64_t first_timestamp_ms, std::int64_t period_ms) noexcept
{
    return first_timestamp_ms - first_timestamp_ms % period_ms;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
{
}

RawEvent parse_event_json(std::string_view text)
{
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::invalid_argument("not a JSON object");
    }
    const auto t = j.find("t");
    if (t == j.end() || !t->is_number_integer()) {
        throw std::invalid_argument("missing or non-integer \"t\"");
    }
    if (t->is_number_unsigned()) {
        if (t->get<std::uint64_t>() >
            static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
            throw std::invalid_argument("timestamp out of range");
        }
    } else if (t->get<std::int64_t>() < 0) {
        throw std::invalid_argument("negative timestamp");
    }
    const auto kind = j.find("kind");
    if (kind == j.end() || !kind->is_string()) {
        throw std::invalid_argument("missing or non-string \"kind\"");
    }
    const auto parsed = parse_event_kind(kind->get_ref<const std::string&>());
    if (!parsed) {
        throw std::invalid_argument("unknown event kind \"" + kind->get<std::string>() + "\"");
    }
    return {t->get<std::int64_t>(), *parsed};
}

EventLog parse_event_log(std::string_view text)
{
    EventLog log;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        const std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (line.empty()) {
            continue;
        }
        try {
            if (line.front() == '#') {
                const auto body = trim(line.substr(1));
                if (auto v = parse_directive(body, "origin_ms")) {
                    log.origin_ms = v;
                } else if (auto h = parse_directive(body, "horizon_ms")) {
                    log.horizon_ms = h;
                }
                continue;
            }
            log.events.push_back(parse_event_json(line));
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return log;
}

std::string format_event_json(const RawEvent& event)
{
    return R"({"t":)" + std::to_string(event.timestamp_ms) + R"(,"kind":")" +
           std::string(to_string(event.kind)) + "\"}";
}

std::vector<RawEvent> normalize_events(std::span<const RawEvent> events)
{
    std::vector<RawEvent> sorted(events.begin(), events.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const RawEvent& a, const RawEvent& b) {
        return a.timestamp_ms < b.timestamp_ms;
    });

    std::vector<RawEvent> out;
    out.reserve(sorted.size());
    bool screen_on = false;
    bool in_call = false;
    for (const auto& e : sorted) {
        bool keep = false;
        switch (e.kind) {
        case EventKind::ScreenOn: keep = !screen_on; screen_on = true; break;
        case EventKind::ScreenOff: keep = screen_on; screen_on = false; break;
        case EventKind::CallStart: keep = !in_call; in_call = true; break;
        case EventKind::CallEnd: keep = in_call; in_call = false; break;
        }
        if (keep) {
            out.push_back(e);
        }
    }
    return out;
}

std::vector<ActiveInterval> screen_intervals(std::span<const RawEvent> normalized,
                                             std::int64_t horizon_ms)
{
    return pair_up(normalized, EventKind::ScreenOn, EventKind::ScreenOff, horizon_ms);
}

std::vector<ActiveInterval> call_intervals(std::span<const RawEvent> normalized,
                                           std::int64_t horizon_ms)
{
    return pair_up(normalized, EventKind::CallStart, EventKind::CallEnd, horizon_ms);
}

std::vector<ActiveInterval> merge_intervals(std::vector<ActiveInterval> intervals)
{
    std::sort(intervals.begin(), intervals.end(),
              [](const ActiveInterval& a, const ActiveInterval& b) {
                  return a.start_ms < b.start_ms;
              });
    std::vector<ActiveInterval> out;
    for (const auto& iv : intervals) {
        if (iv.start_ms >= iv.end_ms) {
            continue;
        }
        if (!out.empty() && out.back().end_ms >= iv.start_ms) {
            out.back().end_ms = std::max(out.back().end_ms, iv.end_ms);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

std::vector<ActiveInterval> subtract_calls(std::span<const ActiveInterval> screen,
                                           std::span<const ActiveInterval> calls)
{
    std::vector<ActiveInterval> out;
    auto call = calls.begin();
    for (const auto& s : screen) {
        std::int64_t cursor = s.start_ms;
        while (call != calls.end() && call->end_ms <= cursor) {
            ++call;
        }
        for (auto c = call; c != calls.end() && c->start_ms < s.end_ms; ++c) {
            if (c->start_ms > cursor) {
                out.push_back({cursor, c->start_ms});
            }
            cursor = std::max(cursor, c->end_ms);
        }
        if (cursor < s.end_ms) {
            out.push_back({cursor, s.end_ms});
        }
    }
    return merge_intervals(std::move(out));
}

std::vector<PeriodSample> assign_to_periods(std::span<const ActiveInterval> active,
                                            const PeriodGrid& grid,
                                            const EngineParams& params,
                                            std::uint64_t last_period)
{
    if (grid.period_ms != params.sampling_period.count()) {
        throw std::invalid_argument("grid period differs from the sampling period");
    }
    const std::int64_t grid_end = grid.period_start(last_period + 1);

    std::vector<Millis> credit(last_period + 1, Millis::zero());
    for (const auto& iv : active) {
        if (iv.start_ms >= iv.end_ms) {
            throw std::invalid_argument("empty or reversed active interval");
        }
        if (iv.start_ms < grid.origin_ms || iv.end_ms > grid_end) {
            throw std::out_of_range("active interval [" + std::to_string(iv.start_ms) + ", " +
                                    std::to_string(iv.end_ms) + ") outside the period grid");
        }
        const Millis total{iv.duration_ms()};
        if (total < params.notification_threshold) {
            credit[grid.period_of(iv.start_ms)] += correct_duration(total, params);
            continue;
        }
        for (auto n = grid.period_of(iv.start_ms); n <= last_period; ++n) {
            const auto lo = std::max(iv.start_ms, grid.period_start(n));
            const auto hi = std::min(iv.end_ms, grid.period_start(n + 1));
            if (lo >= hi) {
                break;
            }
            credit[n] += Millis{hi - lo};
        }
    }

    std::vector<PeriodSample> out;
    out.reserve(credit.size());
    for (std::uint64_t n = 0; n <= last_period; ++n) {
        const Millis one[] = {credit[n]};
        out.push_back({n, period_usage_factor(one, params)});
    }
    return out;
}

std::vector<ActiveInterval> active_intervals(std::span<const RawEvent> events,
                                             std::int64_t horizon_ms)
{
    const auto normalized = normalize_events(events);
    const auto screen = screen_intervals(normalized, horizon_ms);
    const auto calls = call_intervals(normalized, horizon_ms);
    return subtract_calls(screen, calls);
}

}  // namespace heatkey
