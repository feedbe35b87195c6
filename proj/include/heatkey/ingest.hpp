#pragma once

#include "heatkey/engine.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace heatkey {

enum class EventKind : std::uint8_t { ScreenOn, ScreenOff, CallStart, CallEnd };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

struct RawEvent {
    std::int64_t timestamp_ms = 0;
    EventKind kind = EventKind::ScreenOn;

    bool operator==(const RawEvent&) const = default;
};

/// Half-open span [start_ms, end_ms) with start_ms < end_ms.
struct ActiveInterval {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;

    std::int64_t duration_ms() const noexcept { return end_ms - start_ms; }
    bool operator==(const ActiveInterval&) const = default;
};

/// Period n covers [origin_ms + n*period_ms, origin_ms + (n+1)*period_ms).
struct PeriodGrid {
    std::int64_t origin_ms = 0;
    std::int64_t period_ms = 1'800'000;

    std::int64_t period_start(std::uint64_t n) const noexcept
    {
        return origin_ms + static_cast<std::int64_t>(n) * period_ms;
    }
    /// Index of the period containing t; t must not precede the origin.
    std::uint64_t period_of(std::int64_t t) const noexcept
    {
        return static_cast<std::uint64_t>((t - origin_ms) / period_ms);
    }
};

/// Origin aligned down to a whole multiple of the period since the epoch.
std::int64_t aligned_origin(std::int64_t first_timestamp_ms, std::int64_t period_ms) noexcept;

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A parsed event log plus the optional `# origin_ms:` / `# horizon_ms:`
/// comment directives.
struct EventLog {
    std::vector<RawEvent> events;
    std::optional<std::int64_t> origin_ms;
    std::optional<std::int64_t> horizon_ms;
};

/// Parses one `{"t": <int>, "kind": "..."}` object. Throws std::invalid_argument.
RawEvent parse_event_json(std::string_view text);

/// Newline-delimited JSON, `#` comments and blank lines skipped.
/// Throws ParseError carrying the 1-based line number.
EventLog parse_event_log(std::string_view text);

std::string format_event_json(const RawEvent& event);

/// Stable chronological sort, then drops repeated opens and unmatched closes
/// (screen and call streams independently).
std::vector<RawEvent> normalize_events(std::span<const RawEvent> events);

/// On/Off pairs of a normalized stream as maximal intervals; a trailing open
/// interval is closed at horizon_ms.
std::vector<ActiveInterval> screen_intervals(std::span<const RawEvent> normalized,
                                             std::int64_t horizon_ms);
std::vector<ActiveInterval> call_intervals(std::span<const RawEvent> normalized,
                                           std::int64_t horizon_ms);

/// Union of arbitrary intervals as sorted, disjoint, non-touching spans.
std::vector<ActiveInterval> merge_intervals(std::vector<ActiveInterval> intervals);

/// screen minus the union of calls. Both inputs sorted and disjoint.
std::vector<ActiveInterval> subtract_calls(std::span<const ActiveInterval> screen,
                                           std::span<const ActiveInterval> calls);

/// One sample for every period 0..last_period. Short intervals (total below the
/// notification threshold) credit their corrected duration to the period of
/// their start; longer ones are split at period boundaries.
/// Throws std::out_of_range for intervals outside the grid.
std::vector<PeriodSample> assign_to_periods(std::span<const ActiveInterval> active,
                                            const PeriodGrid& grid,
                                            const EngineParams& params,
                                            std::uint64_t last_period);

/// Normalization, interval construction and call exclusion in one pass.
std::vector<ActiveInterval> active_intervals(std::span<const RawEvent> events,
                                             std::int64_t horizon_ms);

}  // namespace heatkey
