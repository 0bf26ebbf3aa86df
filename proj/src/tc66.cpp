#include "keymeter/tc66.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

namespace keymeter::tc66 {

const std::array<std::uint8_t, 32> kAesKey = {
    0x58, 0x21, 0xfa, 0x56, 0x01, 0xb2, 0xf0, 0x26, //
    0x87, 0xff, 0x12, 0x04, 0x62, 0x2a, 0x4f, 0xb0, //
    0x86, 0xf4, 0x02, 0x60, 0x81, 0x6f, 0x9a, 0x0b, //
    0xa7, 0xf1, 0x06, 0x8f, 0xf6, 0x9c, 0x5f, 0xa9, //
};

std::string poll_command()
{
    return "getva";
}

namespace {

// Single source of truth for where each measurement word lives in the
// decrypted frame; encode and decode both walk this table.
struct WordSlot {
    const char* name;
    std::size_t offset;
    std::uint32_t FrameFields::* member;
};

constexpr std::size_t kPac2 = kBlockBytes;

constexpr WordSlot kWordLayout[] = {
    {"serial", 12, &FrameFields::serial},
    {"runs", 44, &FrameFields::runs},
    {"voltage", 48, &FrameFields::voltage_raw},
    {"current", 52, &FrameFields::current_raw},
    {"power", 56, &FrameFields::power_raw},
    {"resistance", kPac2 + 4, &FrameFields::resistance_raw},
    {"group0_mah", kPac2 + 8, &FrameFields::group0_mah},
    {"group0_mwh", kPac2 + 12, &FrameFields::group0_mwh},
    {"group1_mah", kPac2 + 16, &FrameFields::group1_mah},
    {"group1_mwh", kPac2 + 20, &FrameFields::group1_mwh},
    {"temp_sign", kPac2 + 24, &FrameFields::temp_sign},
    {"temp_c", kPac2 + 28, &FrameFields::temp_c},
    {"dplus", kPac2 + 32, &FrameFields::dplus_raw},
    {"dminus", kPac2 + 36, &FrameFields::dminus_raw},
};

constexpr const char* kBlockTags[3] = {"pac1", "pac2", "pac3"};
constexpr std::size_t kChecksumOffset = kBlockBytes - 4;

std::uint32_t read_u32le(const std::uint8_t* p)
{
    return static_cast<std::uint32_t>(p[0]) |
           static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 |
           static_cast<std::uint32_t>(p[3]) << 24;
}

void write_u32le(std::uint8_t* p, std::uint32_t v)
{
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
}

void aes256_ecb(std::span<const std::uint8_t> in, std::span<std::uint8_t> out,
                std::span<const std::uint8_t, 32> key, bool encrypt)
{
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx)
        throw std::runtime_error("tc66: EVP context allocation failed");

    int n = 0, tail = 0;
    const bool ok =
        EVP_CipherInit_ex(ctx, EVP_aes_256_ecb(), nullptr, key.data(), nullptr,
                          encrypt ? 1 : 0) == 1 &&
        EVP_CIPHER_CTX_set_padding(ctx, 0) == 1 &&
        EVP_CipherUpdate(ctx, out.data(), &n, in.data(),
                         static_cast<int>(in.size())) == 1 &&
        EVP_CipherFinal_ex(ctx, out.data() + n, &tail) == 1;
    EVP_CIPHER_CTX_free(ctx);
    if (!ok || static_cast<std::size_t>(n + tail) != in.size())
        throw std::runtime_error("tc66: AES-256-ECB transform failed");
}

} // namespace

std::uint16_t block_checksum(std::span<const std::uint8_t> data)
{
    std::uint16_t crc = 0xffff;
    for (std::uint8_t byte : data) {
        crc ^= byte;
        for (int i = 0; i < 8; ++i) {
            if (crc & 1)
                crc = static_cast<std::uint16_t>((crc >> 1) ^ 0xa001);
            else
                crc >>= 1;
        }
    }
    return crc;
}

Result<FrameFields, FrameError>
decode_frame(std::span<const std::uint8_t> raw,
             std::span<const std::uint8_t, 32> key)
{
    using R = Result<FrameFields, FrameError>;

    if (raw.size() != kFrameBytes)
        return R::failure({FrameErrorKind::Length,
                           "expected " + std::to_string(kFrameBytes) +
                               " bytes, got " + std::to_string(raw.size())});

    std::array<std::uint8_t, kFrameBytes> plain{};
    aes256_ecb(raw, plain, key, /*encrypt=*/false);

    for (int b = 0; b < 3; ++b) {
        const std::uint8_t* block = plain.data() + b * kBlockBytes;
        if (std::memcmp(block, kBlockTags[b], 4) != 0)
            return R::failure({FrameErrorKind::Tag,
                               std::string("block ") + std::to_string(b + 1) +
                                   " missing tag '" + kBlockTags[b] + "'"});
        const std::uint16_t computed =
            block_checksum({block, kChecksumOffset});
        const std::uint32_t stored = read_u32le(block + kChecksumOffset);
        if (stored != computed)
            return R::failure({FrameErrorKind::Integrity,
                               std::string("block ") + std::to_string(b + 1) +
                                   " checksum mismatch"});
    }

    FrameFields f;
    std::memcpy(f.product.data(), plain.data() + 4, 4);
    std::memcpy(f.version.data(), plain.data() + 8, 4);
    for (const WordSlot& slot : kWordLayout)
        f.*slot.member = read_u32le(plain.data() + slot.offset);
    return f;
}

std::vector<std::uint8_t> encode_frame(const FrameFields& fields,
                                       std::span<const std::uint8_t, 32> key)
{
    std::array<std::uint8_t, kFrameBytes> plain{};

    for (int b = 0; b < 3; ++b)
        std::memcpy(plain.data() + b * kBlockBytes, kBlockTags[b], 4);
    std::memcpy(plain.data() + 4, fields.product.data(), 4);
    std::memcpy(plain.data() + 8, fields.version.data(), 4);
    for (const WordSlot& slot : kWordLayout)
        write_u32le(plain.data() + slot.offset, fields.*slot.member);

    for (int b = 0; b < 3; ++b) {
        std::uint8_t* block = plain.data() + b * kBlockBytes;
        write_u32le(block + kChecksumOffset,
                    block_checksum({block, kChecksumOffset}));
    }

    std::vector<std::uint8_t> out(kFrameBytes);
    aes256_ecb(plain, out, key, /*encrypt=*/true);
    return out;
}

} // namespace keymeter::tc66
