#include "heatkey/codec.hpp"

#include <numeric>

namespace heatkey::codec {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Length: return "wrong payload length";
    case ErrorKind::Magic: return "bad magic";
    case ErrorKind::Version: return "unsupported version";
    case ErrorKind::Checksum: return "bad checksum";
    case ErrorKind::Level: return "level out of range";
    case ErrorKind::PeriodOverflow: return "period index does not fit in 32 bits";
    }
    return "unknown codec error";
}

CodecError::CodecError(ErrorKind kind) : std::runtime_error(std::string(to_string(kind))), kind_(kind)
{
}

std::uint8_t checksum(std::span<const std::uint8_t> bytes) noexcept
{
    return std::accumulate(bytes.begin(), bytes.end(), std::uint8_t{0},
                           [](std::uint8_t acc, std::uint8_t b) {
                               return static_cast<std::uint8_t>(acc ^ b);
                           });
}

Payload encode(const TemperatureMessage& msg)
{
    if (msg.level < 0 || msg.level >= kMaxLevels) {
        throw CodecError(ErrorKind::Level);
    }
    if (msg.period_index > 0xFFFF'FFFFull) {
        throw CodecError(ErrorKind::PeriodOverflow);
    }
    const auto period = static_cast<std::uint32_t>(msg.period_index);
    Payload p{
        kMagic0,
        kMagic1,
        kVersion,
        static_cast<std::uint8_t>(msg.level),
        static_cast<std::uint8_t>(period >> 24),
        static_cast<std::uint8_t>(period >> 16),
        static_cast<std::uint8_t>(period >> 8),
        static_cast<std::uint8_t>(period),
        msg.color.r,
        msg.color.g,
        msg.color.b,
        0,
    };
    p[11] = checksum(std::span(p).first(11));
    return p;
}

TemperatureMessage decode(std::span<const std::uint8_t> bytes, int level_count)
{
    if (bytes.size() != kPayloadSize) {
        throw CodecError(ErrorKind::Length);
    }
    if (bytes[0] != kMagic0 || bytes[1] != kMagic1) {
        throw CodecError(ErrorKind::Magic);
    }
    if (bytes[2] != kVersion) {
        throw CodecError(ErrorKind::Version);
    }
    if (checksum(bytes.first(11)) != bytes[11]) {
        throw CodecError(ErrorKind::Checksum);
    }
    const int level = bytes[3];
    if (level >= kMaxLevels || level >= level_count) {
        throw CodecError(ErrorKind::Level);
    }
    const std::uint32_t period = (std::uint32_t{bytes[4]} << 24) | (std::uint32_t{bytes[5]} << 16) |
                                 (std::uint32_t{bytes[6]} << 8) | std::uint32_t{bytes[7]};
    return {period, level, Rgb{bytes[8], bytes[9], bytes[10]}, level_phrase(level, level_count)};
}

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 3);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (i != 0) {
            out.push_back(' ');
        }
        out.push_back(kDigits[bytes[i] >> 4]);
        out.push_back(kDigits[bytes[i] & 0x0F]);
    }
    return out;
}

}  // namespace heatkey::codec
