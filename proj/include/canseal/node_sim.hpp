#pragma once

#include <chrono>
#include <cstdint>
#include <thread>
#include <utility>

#include "canseal/errors.hpp"
#include "canseal/frame.hpp"
#include "canseal/payload.hpp"
#include "canseal/speck64.hpp"

// Virtual-time model of the embedded node: a periodic scheduler emits one
// sealed data frame and one plaintext diagnostic frame per tick. Under the
// virtual clock every tick lands exactly on its nominal time, so schedule
// assertions are exact; the opt-in wall pace sleeps between ticks and
// records measured timestamps instead.

namespace canseal {

inline constexpr std::uint8_t kSawtoothMax = 125;

struct VirtualClock {
    std::uint64_t now_us = 0;
};

enum class SawtoothDirection { ascending, descending };

// Reference application signal: one step per message, 0..125 and back,
// full period 250 emissions.
struct SawtoothState {
    std::uint8_t value = 0;
    SawtoothDirection direction = SawtoothDirection::ascending;

    friend bool operator==(const SawtoothState&, const SawtoothState&) = default;
};

inline SawtoothState sawtooth_next(SawtoothState st) {
    if (st.direction == SawtoothDirection::ascending) {
        if (st.value >= kSawtoothMax)
            return {static_cast<std::uint8_t>(kSawtoothMax - 1), SawtoothDirection::descending};
        const auto v = static_cast<std::uint8_t>(st.value + 1);
        return {v, v == kSawtoothMax ? SawtoothDirection::descending
                                     : SawtoothDirection::ascending};
    }
    if (st.value == 0)
        return {1, SawtoothDirection::ascending};
    const auto v = static_cast<std::uint8_t>(st.value - 1);
    return {v, v == 0 ? SawtoothDirection::ascending : SawtoothDirection::descending};
}

inline std::uint8_t shifted_of(std::uint8_t app, std::uint8_t shift_offset) {
    const int sum = int{app} + int{shift_offset};
    if (sum > 255)
        throw config_error("shifted signal overflows a byte: " + std::to_string(sum));
    return static_cast<std::uint8_t>(sum);
}

enum class PaceMode { virtual_time, wall_clock };
enum class FreshnessMode { seeded, os_entropy };

struct RunConfig {
    RunMode mode = RunMode::encrypted;
    std::uint32_t rate_hz = 100;
    std::uint32_t duration_s = 180;
    std::uint64_t seed = 0;
    speck::Key128 key = speck::kKatKey;
    std::uint32_t data_id = 0x100;
    std::uint32_t diag_id = 0x101;
    std::uint8_t shift_offset = 64;
    std::uint8_t constant_value = 0x55;
    PaceMode pace = PaceMode::virtual_time;
    FreshnessMode freshness = FreshnessMode::seeded;
};

inline void validate_config(const RunConfig& cfg) {
    if (cfg.rate_hz == 0)
        throw config_error("rate_hz must be positive");
    if (cfg.rate_hz > 100000)
        throw config_error("rate_hz above 100000 collapses microsecond ticks");
    if (cfg.duration_s == 0)
        throw config_error("duration_s must be positive");
    if (cfg.data_id == cfg.diag_id)
        throw config_error("data_id and diag_id must differ");
    if (cfg.data_id > kMaxStandardId || cfg.diag_id > kMaxStandardId)
        throw config_error("frame ids must fit 11 bits");
    if (int{kSawtoothMax} + int{cfg.shift_offset} > 255)
        throw config_error("shift_offset overflows the shifted signal byte");
}

namespace detail {

inline std::uint8_t saturate_u8(std::uint64_t v) {
    return v > 0xFF ? 0xFF : static_cast<std::uint8_t>(v);
}

inline std::uint16_t saturate_u16(std::uint64_t v) {
    return v > 0xFFFF ? 0xFFFF : static_cast<std::uint16_t>(v);
}

} // namespace detail

// Diagnostic layout: bytes 0..3 mirror the pre-encryption block, byte 4 is
// the freshness time in whole microseconds (saturating), bytes 5..6 the
// encryption time as little-endian u16 microseconds (saturating), byte 7
// is reserved zero.
inline Frame build_diagnostic_frame(std::uint8_t freshness, const PlainSignals& s,
                                    const TimingSample& t, std::uint64_t timestamp_us,
                                    std::uint32_t diag_id) {
    const std::uint8_t f_us = detail::saturate_u8(t.freshness_ns / 1000);
    const std::uint16_t e_us = detail::saturate_u16(t.encrypt_ns / 1000);
    Frame f;
    f.id = diag_id;
    f.dlc = 8;
    f.timestamp_us = timestamp_us;
    f.payload = {freshness,
                 s.app_data,
                 s.constant_ref,
                 s.shifted_data,
                 f_us,
                 static_cast<std::uint8_t>(e_us & 0xFF),
                 static_cast<std::uint8_t>(e_us >> 8),
                 0};
    return f;
}

namespace detail {

template <class Timer>
Capture run_with(const RunConfig& cfg, const Timer& timer) {
    const speck::KeySchedule ks = speck::expand_key(cfg.key);
    FreshnessSource src = cfg.freshness == FreshnessMode::seeded
                              ? FreshnessSource::seeded(cfg.seed)
                              : FreshnessSource::from_entropy();

    Capture capture;
    capture.meta = {cfg.seed, cfg.mode, cfg.duration_s, cfg.rate_hz};

    const std::uint64_t ticks =
        static_cast<std::uint64_t>(cfg.duration_s) * cfg.rate_hz;
    const bool paced = cfg.pace == PaceMode::wall_clock;
    const auto start = std::chrono::steady_clock::now();

    VirtualClock clock;
    SawtoothState sawtooth;
    for (std::uint64_t i = 0; i < ticks; ++i) {
        if (paced) {
            const auto target = start + std::chrono::microseconds(i * 1000000 / cfg.rate_hz);
            std::this_thread::sleep_until(target);
            clock.now_us = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::microseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count());
        } else {
            clock.now_us = i * 1000000 / cfg.rate_hz;
        }

        sawtooth = sawtooth_next(sawtooth);
        const PlainSignals signals{sawtooth.value, cfg.constant_value,
                                   shifted_of(sawtooth.value, cfg.shift_offset)};

        Frame data;
        data.id = cfg.data_id;
        data.dlc = 8;
        data.timestamp_us = clock.now_us;
        std::uint8_t freshness = 0;
        TimingSample timing;
        if (cfg.mode == RunMode::encrypted) {
            const SealOutcome out = seal(signals, src, ks, timer);
            data.payload = out.payload;
            freshness = out.freshness;
            timing = out.timing;
        } else {
            const std::uint64_t t0 = timer.now_ns();
            freshness = gen_freshness(src);
            const std::uint64_t t1 = timer.now_ns();
            data.payload = assemble_plain_block(freshness, signals);
            timing = {t1 - t0, 0};
        }

        // data frame first: lower ID wins arbitration on a shared tick
        capture.add(data);
        capture.add(build_diagnostic_frame(freshness, signals, timing, clock.now_us,
                                           cfg.diag_id));
    }
    return capture;
}

} // namespace detail

inline Capture run(const RunConfig& cfg) {
    validate_config(cfg);
    if (cfg.pace == PaceMode::wall_clock)
        return detail::run_with(cfg, SteadyTimer{});
    return detail::run_with(cfg, NullTimer{});
}

// Same seed and schedule in both modes, so the underlying signal
// trajectories match tick for tick.
inline std::pair<Capture, Capture> run_pair(RunConfig cfg) {
    cfg.mode = RunMode::encrypted;
    Capture enc = run(cfg);
    cfg.mode = RunMode::plaintext;
    Capture plain = run(cfg);
    return {std::move(enc), std::move(plain)};
}

} // namespace canseal
