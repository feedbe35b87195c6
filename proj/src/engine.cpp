#include "heatkey/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace heatkey {

namespace {

constexpr std::array<Rgb, 4> kRedRamp{{
    {255, 205, 210},
    {229, 115, 115},
    {229, 57, 53},
    {183, 28, 28},
}};

std::uint8_t lerp_channel(std::uint8_t a, std::uint8_t b, double t)
{
    return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
}

Rgb sample_ramp(double position)
{
    const double scaled = position * static_cast<double>(kRedRamp.size() - 1);
    const auto lo = std::min(static_cast<std::size_t>(scaled), kRedRamp.size() - 2);
    const double t = scaled - static_cast<double>(lo);
    const Rgb a = kRedRamp[lo];
    const Rgb b = kRedRamp[lo + 1];
    return {lerp_channel(a.r, b.r, t), lerp_channel(a.g, b.g, t), lerp_channel(a.b, b.b, t)};
}

void check_level_count(int level_count)
{
    if (level_count < 2 || level_count > kMaxLevels) {
        throw std::invalid_argument("level count must be in [2, 8], got " +
                                    std::to_string(level_count));
    }
}

}  // namespace

std::vector<std::string> validate(const EngineParams& params)
{
    if (params.sampling_period <= Millis::zero()) {
        throw std::invalid_argument("sampling period must be positive");
    }
    if (params.notification_correction < Millis::zero()) {
        throw std::invalid_argument("notification correction must be non-negative");
    }
    if (params.notification_threshold < Millis::zero()) {
        throw std::invalid_argument("notification threshold must be non-negative");
    }
    if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie strictly between 0 and 1");
    }
    if (!(params.strictness > 0.0) || !std::isfinite(params.strictness)) {
        throw std::invalid_argument("strictness must be positive and finite");
    }
    check_level_count(params.level_count);

    std::vector<std::string> warnings;
    if (params.notification_correction < params.notification_threshold) {
        warnings.emplace_back(
            "notification correction is shorter than the threshold; "
            "short intervals will never be corrected");
    }
    return warnings;
}

std::string to_hex(Rgb color)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", color.r, color.g, color.b);
    return buf;
}

Quantizer::Quantizer(std::vector<double> endpoints) : endpoints_(std::move(endpoints))
{
    check_level_count(static_cast<int>(endpoints_.size()) - 1);
    if (endpoints_.front() != 0.0 || endpoints_.back() != 1.0) {
        throw std::invalid_argument("quantizer endpoints must start at 0 and end at 1");
    }
    if (std::adjacent_find(endpoints_.begin(), endpoints_.end(),
                           [](double a, double b) { return !(a < b); }) != endpoints_.end()) {
        throw std::invalid_argument("quantizer endpoints must be strictly increasing");
    }
}

Palette::Palette(std::vector<Rgb> colors) : colors_(std::move(colors))
{
    check_level_count(static_cast<int>(colors_.size()));
    for (std::size_t i = 0; i < colors_.size(); ++i) {
        for (std::size_t j = i + 1; j < colors_.size(); ++j) {
            if (colors_[i] == colors_[j]) {
                throw std::invalid_argument("palette colors must be pairwise distinct");
            }
        }
    }
}

Palette default_palette(int level_count)
{
    check_level_count(level_count);
    std::vector<Rgb> colors{kNeutralGray};
    const int reds = level_count - 1;
    if (reds == 1) {
        colors.push_back(kRedRamp.back());
    } else {
        for (int i = 0; i < reds; ++i) {
            colors.push_back(sample_ramp(static_cast<double>(i) / (reds - 1)));
        }
    }
    return Palette(std::move(colors));
}

Millis correct_duration(Millis actual, const EngineParams& params)
{
    if (actual < params.notification_threshold) {
        return std::max(actual, params.notification_correction);
    }
    return actual;
}

double period_usage_factor(std::span<const Millis> corrected, const EngineParams& params)
{
    const Millis total = std::accumulate(corrected.begin(), corrected.end(), Millis::zero());
    const double ratio = static_cast<double>(total.count()) /
                         static_cast<double>(params.sampling_period.count());
    return std::min(ratio, 1.0);
}

double impulse_weight(double alpha, std::uint64_t k)
{
    return std::pow(1.0 - alpha, static_cast<double>(k)) * alpha;
}

Quantizer make_quantizer(int level_count, double strictness)
{
    check_level_count(level_count);
    if (!(strictness > 0.0) || !std::isfinite(strictness)) {
        throw std::invalid_argument("strictness must be positive and finite");
    }
    // k^s / L^s rather than (k/L)^s: integer bases keep e.g. 4/25 exact.
    const double denom = std::pow(static_cast<double>(level_count), strictness);
    std::vector<double> endpoints(static_cast<std::size_t>(level_count) + 1);
    endpoints.front() = 0.0;
    endpoints.back() = 1.0;
    for (int k = 1; k < level_count; ++k) {
        endpoints[static_cast<std::size_t>(k)] =
            std::pow(static_cast<double>(k), strictness) / denom;
    }
    return Quantizer(std::move(endpoints));
}

Quantizer doubling_quantizer()
{
    return Quantizer({0.0, 1.0 / 31.0, 3.0 / 31.0, 7.0 / 31.0, 15.0 / 31.0, 1.0});
}

int quantize(const Quantizer& q, double y)
{
    if (!(y >= 0.0 && y <= 1.0)) {
        throw std::domain_error("usage factor outside [0,1]");
    }
    if (y == 1.0) {
        return q.level_count() - 1;
    }
    const auto& e = q.endpoints();
    const auto above = std::upper_bound(e.begin(), e.end(), y);
    return static_cast<int>(above - e.begin()) - 1;
}

std::string level_phrase(int level, int level_count)
{
    static constexpr std::array<const char*, 5> kFivePhrases{
        "very little", "little", "medium amount", "a lot", "a great deal"};
    if (level_count == 5 && level >= 0 && level < 5) {
        return kFivePhrases[static_cast<std::size_t>(level)];
    }
    return "level " + std::to_string(level) + " of " + std::to_string(level_count);
}

std::pair<EngineState, TemperatureMessage> advance_period(const EngineState& state,
                                                          double u,
                                                          const EngineParams& params,
                                                          const Quantizer& q,
                                                          const Palette& palette)
{
    if (!(u >= 0.0 && u <= 1.0)) {
        throw std::domain_error("period usage factor outside [0,1]");
    }
    if (q.level_count() != params.level_count || palette.size() != params.level_count) {
        throw std::invalid_argument("quantizer, palette and params disagree on level count");
    }

    EngineState next{forgetting_step(state.overall_usage, u, params.alpha),
                     state.next_period_index + 1};
    const int level = quantize(q, next.overall_usage);
    TemperatureMessage msg{state.next_period_index, level, palette[level],
                           level_phrase(level, params.level_count)};
    return {next, std::move(msg)};
}

UsageEngine::UsageEngine(EngineParams params)
    : UsageEngine(params, make_quantizer(params.level_count, params.strictness),
                  default_palette(params.level_count))
{
}

UsageEngine::UsageEngine(EngineParams params, Quantizer quantizer, Palette palette)
    : params_(params), quantizer_(std::move(quantizer)), palette_(std::move(palette))
{
    validate(params_);
    if (quantizer_.level_count() != params_.level_count ||
        palette_.size() != params_.level_count) {
        throw std::invalid_argument("quantizer, palette and params disagree on level count");
    }
}

TemperatureMessage UsageEngine::advance(double u)
{
    auto [next, msg] = advance_period(state_, u, params_, quantizer_, palette_);
    state_ = next;
    return msg;
}

}  // namespace heatkey
