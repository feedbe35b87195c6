#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace heatkey {

using Millis = std::chrono::milliseconds;

/// Largest alphabet the keyboard can display.
inline constexpr int kMaxLevels = 8;

/**
 * Tunable parameters of the usage estimator.
 *
 * Durations are integer milliseconds; alpha and strictness are plain reals.
 * Defaults reproduce the half-hour sampling, five-minute notification credit,
 * neutral quantizer and five temperature levels.
 */
struct EngineParams {
    Millis sampling_period{1'800'000};
    Millis notification_correction{300'000};
    /// Active intervals strictly shorter than this are treated as notification glances.
    Millis notification_threshold{30'000};
    double alpha = 0.2;
    double strictness = 1.0;
    int level_count = 5;

    bool operator==(const EngineParams&) const = default;
};

/// Throws std::invalid_argument when a parameter is out of range. Returns
/// human-readable warnings for legal but useless combinations.
std::vector<std::string> validate(const EngineParams& params);

struct PeriodSample {
    std::uint64_t period_index = 0;
    double usage_factor = 0.0;

    bool operator==(const PeriodSample&) const = default;
};

struct EngineState {
    double overall_usage = 0.0;
    std::uint64_t next_period_index = 0;

    bool operator==(const EngineState&) const = default;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

/// "#rrggbb", lowercase.
std::string to_hex(Rgb color);

struct TemperatureMessage {
    std::uint64_t period_index = 0;
    int level = 0;
    Rgb color;
    std::string phrase;

    bool operator==(const TemperatureMessage&) const = default;
};

/// Partition of [0,1] into `level_count()` quantization intervals
/// [e_k, e_{k+1}), the last one closed at 1.
class Quantizer {
public:
    /// Throws std::invalid_argument unless endpoints run strictly from 0 to 1
    /// and describe between 2 and 8 levels.
    explicit Quantizer(std::vector<double> endpoints);

    const std::vector<double>& endpoints() const noexcept { return endpoints_; }
    int level_count() const noexcept { return static_cast<int>(endpoints_.size()) - 1; }

    bool operator==(const Quantizer&) const = default;

private:
    std::vector<double> endpoints_;
};

class Palette {
public:
    /// Throws std::invalid_argument on duplicate colors or a size outside [2, 8].
    explicit Palette(std::vector<Rgb> colors);

    const std::vector<Rgb>& colors() const noexcept { return colors_; }
    Rgb operator[](int level) const { return colors_.at(static_cast<std::size_t>(level)); }
    int size() const noexcept { return static_cast<int>(colors_.size()); }

private:
    std::vector<Rgb> colors_;
};

/// Neutral gray shown at level 0.
inline constexpr Rgb kNeutralGray{158, 158, 158};

/// Gray followed by increasingly saturated reds. For five levels these are
/// exactly the canonical colors; other sizes interpolate along the same ramp.
Palette default_palette(int level_count);

/// Short glances are credited at least the notification correction time.
Millis correct_duration(Millis actual, const EngineParams& params);

/// Sum of corrected durations over the sampling period, clamped to 1.
double period_usage_factor(std::span<const Millis> corrected, const EngineParams& params);

/// One step of the auto-regressive forgetting filter.
constexpr double forgetting_step(double y_prev, double u, double alpha) noexcept
{
    return (1.0 - alpha) * y_prev + alpha * u;
}

/// Weight of the input k periods back: (1-alpha)^k * alpha.
double impulse_weight(double alpha, std::uint64_t k);

/// Endpoints e_k = (k/L)^s. Throws std::invalid_argument for L outside [2, 8]
/// or a non-positive (or numerically degenerate) strictness.
Quantizer make_quantizer(int level_count, double strictness);

/// Five intervals, each twice as long as the previous one.
Quantizer doubling_quantizer();

/// Level k such that e_k <= y < e_{k+1}; y == 1 maps to the top level.
/// Throws std::domain_error when y is outside [0,1] or NaN.
int quantize(const Quantizer& q, double y);

std::string level_phrase(int level, int level_count);

/// Consumes one period's usage factor and returns the new state together with
/// the message to display during the following period.
std::pair<EngineState, TemperatureMessage> advance_period(const EngineState& state,
                                                          double u,
                                                          const EngineParams& params,
                                                          const Quantizer& q,
                                                          const Palette& palette);

/// Convenience owner of params, quantizer, palette and state.
class UsageEngine {
public:
    explicit UsageEngine(EngineParams params);
    UsageEngine(EngineParams params, Quantizer quantizer, Palette palette);

    TemperatureMessage advance(double u);

    /// Back to cold start; the period cursor keeps counting.
    void reset() noexcept { state_.overall_usage = 0.0; }

    const EngineParams& params() const noexcept { return params_; }
    const Quantizer& quantizer() const noexcept { return quantizer_; }
    const Palette& palette() const noexcept { return palette_; }
    const EngineState& state() const noexcept { return state_; }

private:
    EngineParams params_;
    Quantizer quantizer_;
    Palette palette_;
    EngineState state_;
};

}  // namespace heatkey
