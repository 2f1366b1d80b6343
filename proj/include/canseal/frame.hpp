#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace canseal {

inline constexpr std::uint32_t kMaxStandardId = 0x7FFu;      // 11-bit
inline constexpr std::uint32_t kMaxExtendedId = 0x1FFFFFFFu; // 29-bit
inline constexpr int kMaxDlc = 8;

// One CAN message as the logger sees it. Unused payload bytes are kept
// zero so value comparison is well defined.
struct Frame {
    std::uint32_t id = 0;
    bool extended = false;
    std::uint8_t dlc = 0;
    std::array<std::uint8_t, 8> payload{};
    std::uint64_t timestamp_us = 0;

    friend bool operator==(const Frame&, const Frame&) = default;
};

// Returns the first violated bound, or nullopt when the frame is valid.
inline std::optional<std::string> validate_frame(const Frame& f) {
    if (!f.extended && f.id > kMaxStandardId)
        return "id exceeds 11 bits";
    if (f.extended && f.id > kMaxExtendedId)
        return "id exceeds 29 bits";
    if (f.dlc > kMaxDlc)
        return "dlc exceeds 8";
    for (int i = f.dlc; i < kMaxDlc; ++i)
        if (f.payload[static_cast<std::size_t>(i)] != 0)
            return "payload bytes beyond dlc are not zero";
    return std::nullopt;
}

struct CanId {
    bool extended = false;
    std::uint32_t value = 0;

    friend auto operator<=>(const CanId&, const CanId&) = default;
};

inline CanId id_of(const Frame& f) { return CanId{f.extended, f.id}; }

enum class RunMode { encrypted, plaintext };

inline const char* to_string(RunMode m) {
    return m == RunMode::encrypted ? "encrypted" : "plaintext";
}

inline std::optional<RunMode> run_mode_from(const std::string& s) {
    if (s == "encrypted") return RunMode::encrypted;
    if (s == "plaintext") return RunMode::plaintext;
    return std::nullopt;
}

struct RunMeta {
    std::uint64_t seed = 0;
    RunMode mode = RunMode::plaintext;
    std::uint32_t duration_s = 0;
    std::uint32_t rate_hz = 0;

    friend bool operator==(const RunMeta&, const RunMeta&) = default;
};

// All traffic of one run, organized per arbitration ID in receive order.
struct Capture {
    std::map<CanId, std::vector<Frame>> by_id;
    RunMeta meta;

    void add(const Frame& f) { by_id[id_of(f)].push_back(f); }

    const std::vector<Frame>* find(CanId id) const {
        auto it = by_id.find(id);
        return it == by_id.end() ? nullptr : &it->second;
    }

    std::size_t total_frames() const {
        std::size_t n = 0;
        for (const auto& [id, frames] : by_id) n += frames.size();
        return n;
    }

    friend bool operator==(const Capture&, const Capture&) = default;
};

} // namespace canseal
