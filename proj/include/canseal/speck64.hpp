#pragma once

#include <array>
#include <bit>
#include <cstdint>

// Speck64/128: 64-bit block, 128-bit key, 27 rounds, rotations (8, 3).
// One CAN data field is exactly one block, so a frame is encrypted as a
// single independent block with no chaining.
//
// Payload byte mapping (fixed contract, little-endian per half):
//   bytes 0..3 -> y, bytes 4..7 -> x

namespace canseal::speck {

inline constexpr int kRounds = 27;

// Key words ordered (l2, l1, l0, k0), the cipher designers' convention.
struct Key128 {
    std::array<std::uint32_t, 4> words{};

    friend bool operator==(const Key128&, const Key128&) = default;
};

struct Block64 {
    std::uint32_t x = 0; // high half
    std::uint32_t y = 0; // low half

    friend bool operator==(const Block64&, const Block64&) = default;
};

struct KeySchedule {
    std::array<std::uint32_t, kRounds> round_keys{};

    friend bool operator==(const KeySchedule&, const KeySchedule&) = default;
};

inline KeySchedule expand_key(const Key128& key) {
    const std::uint32_t l2 = key.words[0];
    const std::uint32_t l1 = key.words[1];
    const std::uint32_t l0 = key.words[2];
    const std::uint32_t k0 = key.words[3];

    KeySchedule ks;
    ks.round_keys[0] = k0;

    // Three-word pipeline: l[i+3] = (k[i] + ROTR(l[i],8)) ^ i,
    //                      k[i+1] = ROTL(k[i],3) ^ l[i+3]
    std::array<std::uint32_t, 3> l{l0, l1, l2};
    for (std::uint32_t i = 0; i + 1 < kRounds; ++i) {
        const std::uint32_t li = l[i % 3];
        const std::uint32_t next_l = (ks.round_keys[i] + std::rotr(li, 8)) ^ i;
        ks.round_keys[i + 1] = std::rotl(ks.round_keys[i], 3) ^ next_l;
        l[i % 3] = next_l;
    }
    return ks;
}

inline Block64 encrypt_block(Block64 b, const KeySchedule& ks) {
    for (std::uint32_t k : ks.round_keys) {
        b.x = (std::rotr(b.x, 8) + b.y) ^ k;
        b.y = std::rotl(b.y, 3) ^ b.x;
    }
    return b;
}

inline Block64 decrypt_block(Block64 b, const KeySchedule& ks) {
    for (int i = kRounds - 1; i >= 0; --i) {
        b.y = std::rotr(b.y ^ b.x, 3);
        b.x = std::rotl((b.x ^ ks.round_keys[i]) - b.y, 8);
    }
    return b;
}

// Round-count override used by the known-answer negative control.
inline Block64 encrypt_block_rounds(Block64 b, const KeySchedule& ks, int rounds) {
    for (int i = 0; i < rounds; ++i) {
        b.x = (std::rotr(b.x, 8) + b.y) ^ ks.round_keys[static_cast<std::size_t>(i)];
        b.y = std::rotl(b.y, 3) ^ b.x;
    }
    return b;
}

inline Block64 block_from_bytes(const std::array<std::uint8_t, 8>& p) {
    auto word = [&](int base) {
        return static_cast<std::uint32_t>(p[base]) |
               static_cast<std::uint32_t>(p[base + 1]) << 8 |
               static_cast<std::uint32_t>(p[base + 2]) << 16 |
               static_cast<std::uint32_t>(p[base + 3]) << 24;
    };
    return Block64{word(4), word(0)};
}

inline std::array<std::uint8_t, 8> block_to_bytes(const Block64& b) {
    std::array<std::uint8_t, 8> p{};
    for (int i = 0; i < 4; ++i) {
        p[i] = static_cast<std::uint8_t>(b.y >> (8 * i));
        p[4 + i] = static_cast<std::uint8_t>(b.x >> (8 * i));
    }
    return p;
}

// Designers' published Speck64/128 vector.
inline constexpr Key128 kKatKey{{0x1b1a1918u, 0x13121110u, 0x0b0a0908u, 0x03020100u}};
inline constexpr Block64 kKatPlain{0x3b726574u, 0x7475432du};
inline constexpr Block64 kKatCipher{0x8c6fa548u, 0x454e028bu};

struct KatResult {
    bool encrypt_ok = false;
    bool decrypt_ok = false;
    Block64 got{};

    bool ok() const { return encrypt_ok && decrypt_ok; }
};

inline KatResult run_kat(int rounds = kRounds) {
    const KeySchedule ks = expand_key(kKatKey);
    KatResult r;
    r.got = encrypt_block_rounds(kKatPlain, ks, rounds);
    r.encrypt_ok = (r.got == kKatCipher);
    r.decrypt_ok = r.encrypt_ok && decrypt_block(r.got, ks) == kKatPlain;
    return r;
}

} // namespace canseal::speck
