#pragma once

#include "heatkey/engine.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace heatkey::codec {

/*
 * Wire layout, 12 bytes, big-endian:
 *
 *   0-1   magic "HK" (0x48 0x4B)
 *   2     version (0x01)
 *   3     level (0..7)
 *   4-7   period index, uint32
 *   8-10  R, G, B
 *   11    XOR of bytes 0-10
 */
inline constexpr std::size_t kPayloadSize = 12;
inline constexpr std::uint8_t kMagic0 = 0x48;
inline constexpr std::uint8_t kMagic1 = 0x4B;
inline constexpr std::uint8_t kVersion = 0x01;

using Payload = std::array<std::uint8_t, kPayloadSize>;

enum class ErrorKind { Length, Magic, Version, Checksum, Level, PeriodOverflow };

std::string_view to_string(ErrorKind kind) noexcept;

class CodecError : public std::runtime_error {
public:
    explicit CodecError(ErrorKind kind);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

std::uint8_t checksum(std::span<const std::uint8_t> bytes) noexcept;

/// Throws CodecError{Level} for level outside [0, 8) and
/// CodecError{PeriodOverflow} when the period index needs more than 32 bits.
Payload encode(const TemperatureMessage& msg);

/// Total over arbitrary input: returns a message or throws CodecError.
/// The phrase is rebuilt for an alphabet of `level_count` levels; levels at or
/// above it are rejected.
TemperatureMessage decode(std::span<const std::uint8_t> bytes, int level_count = 5);

/// Lowercase, space-separated, e.g. "48 4b 01 ...".
std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace heatkey::codec
