#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "canseal/errors.hpp"
#include "canseal/speck64.hpp"

// Sealing scheme: a random freshness byte is prepended to the application
// signals, the 8-byte block is encrypted as a whole. Bytes 4..7 of the
// plaintext block are zero padding; unseal verifies them, which doubles
// as a wrong-key / corruption check.
//
// Plain block layout (byte_1..byte_3 follow the capture analysis naming):
//   byte 0  freshness
//   byte 1  app_data      (byte_1)
//   byte 2  constant_ref  (byte_2)
//   byte 3  shifted_data  (byte_3)
//   4..7    zero

namespace canseal {

struct PlainSignals {
    std::uint8_t app_data = 0;
    std::uint8_t constant_ref = 0;
    std::uint8_t shifted_data = 0;

    friend bool operator==(const PlainSignals&, const PlainSignals&) = default;
};

using SealedPayload = std::array<std::uint8_t, 8>;

struct TimingSample {
    std::uint64_t freshness_ns = 0;
    std::uint64_t encrypt_ns = 0;
};

// Deterministic byte stream for freshness values. The seeded form makes
// whole runs reproducible; from_entropy is the opt-in OS-randomness mode.
class FreshnessSource {
  public:
    static FreshnessSource seeded(std::uint64_t seed) { return FreshnessSource(seed); }

    static FreshnessSource from_entropy() {
        std::random_device rd;
        return FreshnessSource((static_cast<std::uint64_t>(rd()) << 32) | rd());
    }

    std::uint8_t next_byte() { return static_cast<std::uint8_t>(engine_()); }

  private:
    explicit FreshnessSource(std::uint64_t seed) : engine_(seed) {}

    std::mt19937_64 engine_;
};

inline std::uint8_t gen_freshness(FreshnessSource& src) { return src.next_byte(); }

// 32 hex characters, read left to right as the four key words (l2,l1,l0,k0).
inline speck::Key128 key_from_hex(std::string_view hex) {
    if (hex.size() != 32)
        throw parse_error("key must be exactly 32 hex characters, got " +
                          std::to_string(hex.size()));
    speck::Key128 key;
    for (int w = 0; w < 4; ++w) {
        const std::string_view part = hex.substr(static_cast<std::size_t>(w) * 8, 8);
        std::uint32_t v = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v, 16);
        if (ec != std::errc{} || p != part.data() + part.size())
            throw parse_error("key is not valid hex: '" + std::string(part) + "'");
        key.words[static_cast<std::size_t>(w)] = v;
    }
    return key;
}

inline std::string key_to_hex(const speck::Key128& key) {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%08x%08x%08x%08x", key.words[0], key.words[1], key.words[2],
                  key.words[3]);
    return buf;
}

// Monotonic timers for the seal instrumentation. The null timer pins all
// samples to zero so virtual-time captures are byte-identical across runs.
struct SteadyTimer {
    std::uint64_t now_ns() const {
        return static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(
                std::chrono::steady_clock::now().time_since_epoch())
                .count());
    }
};

struct NullTimer {
    std::uint64_t now_ns() const { return 0; }
};

inline std::array<std::uint8_t, 8> assemble_plain_block(std::uint8_t freshness,
                                                        const PlainSignals& s) {
    return {freshness, s.app_data, s.constant_ref, s.shifted_data, 0, 0, 0, 0};
}

struct SealOutcome {
    SealedPayload payload{};
    TimingSample timing;
    std::uint8_t freshness = 0; // kept for the plaintext diagnostic mirror
};

template <class Timer>
SealOutcome seal(const PlainSignals& s, FreshnessSource& src, const speck::KeySchedule& ks,
                 const Timer& timer) {
    SealOutcome out;

    const std::uint64_t t0 = timer.now_ns();
    out.freshness = gen_freshness(src);
    const std::uint64_t t1 = timer.now_ns();
    const speck::Block64 cipher =
        speck::encrypt_block(speck::block_from_bytes(assemble_plain_block(out.freshness, s)), ks);
    const std::uint64_t t2 = timer.now_ns();

    out.payload = speck::block_to_bytes(cipher);
    out.timing = {t1 - t0, t2 - t1};
    return out;
}

struct OpenedPayload {
    std::uint8_t freshness = 0;
    PlainSignals signals;

    friend bool operator==(const OpenedPayload&, const OpenedPayload&) = default;
};

// Inverse of seal. nullopt means the zero padding did not verify, i.e.
// the payload was not sealed under this key (or was corrupted).
inline std::optional<OpenedPayload> unseal(const SealedPayload& p,
                                           const speck::KeySchedule& ks) {
    const auto plain = speck::block_to_bytes(speck::decrypt_block(speck::block_from_bytes(p), ks));
    if (plain[4] != 0 || plain[5] != 0 || plain[6] != 0 || plain[7] != 0)
        return std::nullopt;
    return OpenedPayload{plain[0], PlainSignals{plain[1], plain[2], plain[3]}};
}

} // namespace canseal
