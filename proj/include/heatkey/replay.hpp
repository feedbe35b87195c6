#pragma once

#include "heatkey/engine.hpp"
#include "heatkey/ingest.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heatkey {

struct TimelineRecord {
    std::uint64_t period_index = 0;
    std::int64_t period_start_ms = 0;
    double usage_factor = 0.0;
    double overall_usage = 0.0;
    int level = 0;
    Rgb color;
    std::string phrase;

    bool operator==(const TimelineRecord&) const = default;
};

enum class OutputFormat { Csv, Jsonl };

/// Grid for a log: explicit origin if given, else the log's directive, else
/// the first event aligned down to a period multiple, else 0.
PeriodGrid grid_for(const EventLog& log, const EngineParams& params,
                    std::optional<std::int64_t> origin_override = std::nullopt);

/// End of observation: the larger of the horizon directive and the last timestamp.
std::optional<std::int64_t> log_horizon(const EventLog& log);

/// Number of periods from the grid origin through the last period the horizon touches.
std::uint64_t period_count(const PeriodGrid& grid, std::int64_t horizon_ms);

/// Ingests the whole log and runs a cold-start engine over every period.
std::vector<TimelineRecord> run_replay(const EventLog& log,
                                       const EngineParams& params,
                                       const PeriodGrid& grid);
std::vector<TimelineRecord> run_replay(const EventLog& log,
                                       UsageEngine engine,
                                       const PeriodGrid& grid);

/// Column header for CSV output.
inline constexpr std::string_view kCsvHeader = "period,start_ms,u,y,level,color_hex,phrase";

std::string format_record(const TimelineRecord& record, OutputFormat format);
std::string format_timeline(const std::vector<TimelineRecord>& records, OutputFormat format);

/// Fixed knobs of the synthetic scenarios. Illustrative values only.
namespace scenario {
inline constexpr std::int64_t kGlanceMinMs = 3'000;
inline constexpr std::int64_t kGlanceMaxMs = 15'000;
inline constexpr double kStormGlancesPerPeriod = 6.0;
inline constexpr std::int64_t kBurstMinMs = 5 * 60'000;
inline constexpr std::int64_t kBurstMaxMs = 25 * 60'000;
inline constexpr std::int64_t kBurstGapMinMs = 10 * 60'000;
inline constexpr std::int64_t kBurstGapMaxMs = 40 * 60'000;
inline constexpr double kCallChance = 0.25;
inline constexpr std::int64_t kCallMaxMs = 8 * 60'000;
/// typical-day: quiet for the first quarter, bursty middle, cooling last quarter.
inline constexpr double kMorningFraction = 0.25;
inline constexpr double kEveningFraction = 0.25;
}  // namespace scenario

/// Names accepted by gen_scenario.
const std::vector<std::string>& scenario_names();

/// Deterministic synthetic log for (name, seed). Throws std::invalid_argument
/// for an unknown name.
std::string gen_scenario(std::string_view name,
                         std::uint64_t seed,
                         std::uint64_t horizon_periods,
                         std::int64_t period_ms = 1'800'000,
                         std::int64_t origin_ms = 0);

}  // namespace heatkey
