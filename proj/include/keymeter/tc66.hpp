#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "keymeter/result.hpp"

namespace keymeter::tc66 {

/// Poll reply: three 64-byte blocks tagged pac1/pac2/pac3, AES-256-ECB
/// encrypted as one unit.
inline constexpr std::size_t kBlockBytes = 64;
inline constexpr std::size_t kFrameBytes = 3 * kBlockBytes;

/// Static vendor key shipped with the device firmware; every TC66 responds
/// under this key.
extern const std::array<std::uint8_t, 32> kAesKey;

/// ASCII verb that requests one measurement frame.
std::string poll_command();

/// Decrypted frame contents in raw device counts. Keeping counts (not SI
/// values) makes the encoder/decoder pair exactly invertible; scaling happens
/// at the edge (see reading fields on the serial backend).
///
/// Count units: voltage 1e-4 V, current 1e-5 A, power 1e-4 W, d+/d- 1e-2 V,
/// group energy in mAh/mWh, temperature in whole degC with a separate sign
/// word (1 = negative).
struct FrameFields {
    std::array<char, 4> product{{'T', 'C', '6', '6'}};
    std::array<char, 4> version{{'1', '.', '1', '4'}};
    std::uint32_t serial = 0;
    std::uint32_t runs = 0;
    std::uint32_t voltage_raw = 0;
    std::uint32_t current_raw = 0;
    std::uint32_t power_raw = 0;
    std::uint32_t resistance_raw = 0; // 1e-1 ohm
    std::uint32_t group0_mah = 0;
    std::uint32_t group0_mwh = 0;
    std::uint32_t group1_mah = 0;
    std::uint32_t group1_mwh = 0;
    std::uint32_t temp_sign = 0;
    std::uint32_t temp_c = 0;
    std::uint32_t dplus_raw = 0;
    std::uint32_t dminus_raw = 0;

    double voltage() const { return voltage_raw * 1e-4; }
    double current() const { return current_raw * 1e-5; }
    double power() const { return power_raw * 1e-4; }
    double temperature() const
    {
        return temp_sign ? -static_cast<double>(temp_c)
                         : static_cast<double>(temp_c);
    }

    bool operator==(const FrameFields&) const = default;
};

enum class FrameErrorKind {
    Length,    // raw is not exactly 192 bytes
    Tag,       // a decrypted block is missing its pac1/pac2/pac3 tag
    Integrity, // a block checksum does not match
};

struct FrameError {
    FrameErrorKind kind = FrameErrorKind::Length;
    std::string message;
};

/// Decrypt and validate one raw frame.
Result<FrameFields, FrameError>
decode_frame(std::span<const std::uint8_t> raw,
             std::span<const std::uint8_t, 32> key = kAesKey);

/// Build an encrypted frame in the device layout. The simulator uses this to
/// answer poll requests, which also makes it the decoder's round-trip oracle.
std::vector<std::uint8_t>
encode_frame(const FrameFields& fields,
             std::span<const std::uint8_t, 32> key = kAesKey);

/// Checksum guarding each 64-byte block: CRC-16 (reflected 0xA001, init
/// 0xFFFF) over the first 60 bytes, stored little-endian in the last 4.
std::uint16_t block_checksum(std::span<const std::uint8_t> data);

} // namespace keymeter::tc66
