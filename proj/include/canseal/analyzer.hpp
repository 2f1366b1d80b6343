#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canseal/errors.hpp"
#include "canseal/frame.hpp"
#include "canseal/stats.hpp"

// What a passive observer can compute from a capture: inter-message
// timing, per-byte value structure, correlations between byte columns,
// and the timing overhead encoded in the diagnostic stream.

namespace canseal {

// Detection thresholds used by the experiment checks. The correlation and
// run-length bounds sit several standard deviations from the independence
// null at the reference run length (18,000 frames).
inline constexpr double kUncorrelatedMax = 0.05;
inline constexpr double kPeriodicAutocorrMin = 0.99;
inline constexpr double kRandomEntropyMinBits = 7.9;
inline constexpr std::size_t kRandomDistinctMin = 250;
inline constexpr std::size_t kRandomMaxRun = 12;
inline constexpr std::size_t kSawtoothPeriod = 250;
inline constexpr std::size_t kSawtoothFullAscent = 126; // values 0..125
inline constexpr double kOverheadFractionMax = 0.01;

inline const std::vector<Frame>& frames_on(const Capture& c, CanId id) {
    const auto* seq = c.find(id);
    if (!seq) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "0x%x", id.value);
        throw insufficient_data("no frames on id " + std::string(buf));
    }
    return *seq;
}

inline std::vector<double> inter_message_intervals(const Capture& c, CanId id) {
    const auto& frames = frames_on(c, id);
    if (frames.size() < 2)
        throw insufficient_data("need at least 2 frames for intervals, have " +
                                std::to_string(frames.size()));
    std::vector<double> out;
    out.reserve(frames.size() - 1);
    for (std::size_t i = 1; i < frames.size(); ++i)
        out.push_back(static_cast<double>(frames[i].timestamp_us - frames[i - 1].timestamp_us) /
                      1e6);
    return out;
}

inline SummaryStats interval_stats(std::span<const double> intervals) {
    return summary_stats(intervals); // seconds in, seconds out
}

// Interval summary for every observed arbitration ID with enough frames.
inline std::map<CanId, SummaryStats> interval_stats_by_id(const Capture& c) {
    std::map<CanId, SummaryStats> out;
    for (const auto& [id, frames] : c.by_id) {
        if (frames.size() < 2) continue;
        out.emplace(id, interval_stats(inter_message_intervals(c, id)));
    }
    return out;
}

inline std::vector<double> byte_column(const Capture& c, CanId id, int byte_index) {
    if (byte_index < 0 || byte_index >= kMaxDlc)
        throw insufficient_data("byte_index out of range");
    const auto& frames = frames_on(c, id);
    std::vector<double> out;
    out.reserve(frames.size());
    for (const Frame& f : frames) {
        if (f.dlc <= byte_index)
            throw insufficient_data("frame dlc " + std::to_string(f.dlc) +
                                    " does not carry byte " + std::to_string(byte_index));
        out.push_back(f.payload[static_cast<std::size_t>(byte_index)]);
    }
    return out;
}

struct ByteColumnProfile {
    int byte_index = 0;
    std::size_t distinct_count = 0;
    double shannon_entropy_bits = 0;
    std::uint8_t min = 0;
    std::uint8_t max = 0;
    bool is_constant = false;
};

inline ByteColumnProfile byte_column_profile(const Capture& c, CanId id, int byte_index) {
    const auto column = byte_column(c, id, byte_index);
    if (column.empty())
        throw insufficient_data("empty byte column");

    std::array<std::size_t, 256> counts{};
    std::uint8_t lo = 255, hi = 0;
    for (double v : column) {
        const auto b = static_cast<std::uint8_t>(v);
        ++counts[b];
        lo = std::min(lo, b);
        hi = std::max(hi, b);
    }

    ByteColumnProfile p;
    p.byte_index = byte_index;
    p.min = lo;
    p.max = hi;
    const auto n = static_cast<double>(column.size());
    for (std::size_t c256 = 0; c256 < 256; ++c256) {
        if (counts[c256] == 0) continue;
        ++p.distinct_count;
        const double prob = static_cast<double>(counts[c256]) / n;
        p.shannon_entropy_bits -= prob * std::log2(prob);
    }
    p.is_constant = p.distinct_count == 1;
    return p;
}

inline std::optional<double> cross_signal_correlation(std::span<const double> external,
                                                      const Capture& c, CanId id,
                                                      int byte_index) {
    const auto column = byte_column(c, id, byte_index);
    if (external.size() != column.size())
        throw insufficient_data("external series length " + std::to_string(external.size()) +
                                " does not match " + std::to_string(column.size()) + " frames");
    return pearson(external, column);
}

inline std::size_t repeated_payload_count(const Capture& c, CanId id) {
    const auto& frames = frames_on(c, id);
    std::vector<std::array<std::uint8_t, 8>> payloads;
    payloads.reserve(frames.size());
    for (const Frame& f : frames) payloads.push_back(f.payload);
    std::sort(payloads.begin(), payloads.end());
    const auto distinct = static_cast<std::size_t>(
        std::distance(payloads.begin(), std::unique(payloads.begin(), payloads.end())));
    return frames.size() - distinct;
}

struct OverheadReport {
    SummaryStats freshness_us;
    SummaryStats encrypt_us;
    double combined_mean_us = 0;
    double fraction_of_period = 0;
    std::vector<double> freshness_series_us;
    std::vector<double> encrypt_series_us;
};

// Decodes the diagnostic timing fields (byte 4, bytes 5..6 LE).
inline OverheadReport overhead_report(const Capture& c, CanId diag_id, double period_us) {
    if (period_us <= 0)
        throw config_error("period_us must be positive");
    const auto& frames = frames_on(c, diag_id);

    OverheadReport r;
    r.freshness_series_us.reserve(frames.size());
    r.encrypt_series_us.reserve(frames.size());
    for (const Frame& f : frames) {
        if (f.dlc != 8)
            throw parse_error("malformed diagnostic frame: dlc " + std::to_string(f.dlc));
        r.freshness_series_us.push_back(f.payload[4]);
        r.encrypt_series_us.push_back(f.payload[5] | (f.payload[6] << 8));
    }
    r.freshness_us = summary_stats(r.freshness_series_us);
    r.encrypt_us = summary_stats(r.encrypt_series_us);
    r.combined_mean_us = r.freshness_us.mean + r.encrypt_us.mean;
    r.fraction_of_period = r.combined_mean_us / period_us;
    return r;
}

// Everything the observer extracts from one run's data (+ diagnostic)
// stream. Components that a capture cannot support are left unset.
struct StreamAnalysis {
    CanId data_id;
    std::size_t frame_count = 0;
    std::optional<SummaryStats> intervals;
    std::optional<DensityEstimate> interval_density;
    std::array<std::optional<ByteColumnProfile>, 8> byte_profiles;
    std::array<std::array<std::optional<double>, 8>, 8> pearson_matrix{};
    std::array<std::optional<double>, 8> autocorr_at_period;
    std::array<std::optional<RunLengths>, 8> run_lengths;
    std::size_t repeated_payloads = 0;
    std::optional<OverheadReport> overhead;
};

inline StreamAnalysis analyze_stream(const Capture& c, CanId data_id,
                                     std::optional<CanId> diag_id, double period_us) {
    StreamAnalysis a;
    a.data_id = data_id;
    const auto& frames = frames_on(c, data_id);
    a.frame_count = frames.size();
    a.repeated_payloads = repeated_payload_count(c, data_id);

    try {
        const auto ivals = inter_message_intervals(c, data_id);
        a.intervals = interval_stats(ivals);
        a.interval_density = density_estimate(ivals);
    } catch (const insufficient_data&) {
    }

    std::array<std::optional<std::vector<double>>, 8> columns;
    for (int b = 0; b < kMaxDlc; ++b) {
        try {
            columns[static_cast<std::size_t>(b)] = byte_column(c, data_id, b);
            a.byte_profiles[static_cast<std::size_t>(b)] = byte_column_profile(c, data_id, b);
        } catch (const insufficient_data&) {
            continue;
        }
        const auto& col = *columns[static_cast<std::size_t>(b)];
        try {
            a.autocorr_at_period[static_cast<std::size_t>(b)] =
                autocorrelation(col, kSawtoothPeriod);
        } catch (const insufficient_data&) {
        }
        try {
            a.run_lengths[static_cast<std::size_t>(b)] = monotonic_run_lengths(col);
        } catch (const insufficient_data&) {
        }
    }
    for (int i = 0; i < kMaxDlc; ++i) {
        for (int j = 0; j < kMaxDlc; ++j) {
            const auto& ci = columns[static_cast<std::size_t>(i)];
            const auto& cj = columns[static_cast<std::size_t>(j)];
            if (ci && cj && ci->size() >= 2)
                a.pearson_matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    pearson(*ci, *cj);
        }
    }

    if (diag_id && c.find(*diag_id)) {
        try {
            a.overhead = overhead_report(c, *diag_id, period_us);
        } catch (const insufficient_data&) {
        } catch (const parse_error&) {
            // frames on the diagnostic id that do not carry the layout
        }
    }
    return a;
}

struct ExperimentCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Side-by-side encrypted/plaintext report plus the six experiment checks.
struct AnalysisReport {
    StreamAnalysis encrypted;
    StreamAnalysis plaintext;
    std::optional<double> external_correlation; // plaintext shifted series vs encrypted byte_1
    std::vector<ExperimentCheck> checks;
    bool all_pass = false;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt_double(*v) : "undefined";
}

} // namespace detail

inline AnalysisReport semantic_report(const Capture& encrypted, const Capture& plaintext,
                                      CanId data_id, CanId diag_id) {
    const auto* enc_frames = encrypted.find(data_id);
    const auto* pt_frames = plaintext.find(data_id);
    if (!enc_frames || !pt_frames)
        throw insufficient_data("both captures need frames on the data id");
    if (enc_frames->size() != pt_frames->size())
        throw config_error("captures do not share a schedule: " +
                           std::to_string(enc_frames->size()) + " vs " +
                           std::to_string(pt_frames->size()) + " data frames");

    const double period_us = encrypted.meta.rate_hz > 0
                                 ? 1e6 / encrypted.meta.rate_hz
                                 : 10000.0;

    AnalysisReport r;
    r.encrypted = analyze_stream(encrypted, data_id, diag_id, period_us);
    r.plaintext = analyze_stream(plaintext, data_id, diag_id, period_us);

    try {
        r.external_correlation =
            cross_signal_correlation(byte_column(plaintext, data_id, 3), encrypted, data_id, 1);
    } catch (const insufficient_data&) {
    }

    auto add = [&](std::string name, bool pass, std::string detail) {
        r.checks.push_back({std::move(name), pass, std::move(detail)});
    };

    // 1. timing: the encrypted stream keeps the exact transmission schedule
    {
        const std::uint64_t expected =
            static_cast<std::uint64_t>(encrypted.meta.duration_s) * encrypted.meta.rate_hz;
        const auto period = static_cast<std::uint64_t>(period_us);
        bool exact = enc_frames->size() == expected && enc_frames->size() >= 2;
        std::uint64_t worst = 0;
        for (std::size_t i = 1; i < enc_frames->size(); ++i) {
            const std::uint64_t d =
                (*enc_frames)[i].timestamp_us - (*enc_frames)[i - 1].timestamp_us;
            worst = std::max(worst, d > period ? d - period : period - d);
        }
        exact = exact && worst == 0;
        add("timing_schedule", exact,
            std::to_string(enc_frames->size()) + " frames (expected " + std::to_string(expected) +
                "), max interval deviation " + std::to_string(worst) + "us");
    }

    // 2. constant masking: byte_2
    {
        const auto& pt = r.plaintext.byte_profiles[2];
        const auto& enc = r.encrypted.byte_profiles[2];
        const bool pass = pt && enc && pt->is_constant &&
                          enc->distinct_count >= kRandomDistinctMin &&
                          enc->shannon_entropy_bits >= kRandomEntropyMinBits;
        add("constant_masking", pass,
            !pt || !enc ? std::string("byte_2 column unavailable")
                        : "plaintext distinct=" + std::to_string(pt->distinct_count) +
                              ", encrypted distinct=" + std::to_string(enc->distinct_count) +
                              " entropy=" + detail::fmt_double(enc->shannon_entropy_bits) + "b");
    }

    // 3. pattern obfuscation: byte_1 sawtooth vs structureless ciphertext
    {
        const auto& pt_runs = r.plaintext.run_lengths[1];
        const auto& enc_runs = r.encrypted.run_lengths[1];
        const auto& pt_ac = r.plaintext.autocorr_at_period[1];
        const auto& enc_ac = r.encrypted.autocorr_at_period[1];
        const bool pt_ok =
            pt_runs && pt_ac && pt_runs->max_ascending == kSawtoothFullAscent &&
            *pt_ac >= kPeriodicAutocorrMin;
        const bool enc_ok = enc_runs && enc_ac &&
                            std::max(enc_runs->max_ascending, enc_runs->max_descending) <=
                                kRandomMaxRun &&
                            std::abs(*enc_ac) <= kUncorrelatedMax;
        add("pattern_obfuscation", pt_ok && enc_ok,
            "plaintext max ascent " +
                (pt_runs ? std::to_string(pt_runs->max_ascending) : std::string("-")) +
                " ac250=" + detail::fmt_opt(pt_ac) + "; encrypted max run " +
                (enc_runs ? std::to_string(std::max(enc_runs->max_ascending,
                                                    enc_runs->max_descending))
                          : std::string("-")) +
                " ac250=" + detail::fmt_opt(enc_ac));
    }

    // 4. inter-signal decorrelation: byte_1 vs byte_3
    {
        const auto& pt_r = r.plaintext.pearson_matrix[1][3];
        const auto& enc_r = r.encrypted.pearson_matrix[1][3];
        const bool pass = pt_r && enc_r && *pt_r == 1.0 && std::abs(*enc_r) <= kUncorrelatedMax;
        add("inter_signal_decorrelation", pass,
            "plaintext r=" + detail::fmt_opt(pt_r) + ", encrypted r=" + detail::fmt_opt(enc_r));
    }

    // 5. external-measurement decorrelation
    {
        const bool pass =
            r.external_correlation && std::abs(*r.external_correlation) <= kUncorrelatedMax;
        add("external_decorrelation", pass, "r=" + detail::fmt_opt(r.external_correlation));
    }

    // 6. computational overhead stays a small fraction of the period
    {
        const auto& oh = r.encrypted.overhead;
        const bool pass = oh && oh->fraction_of_period < kOverheadFractionMax;
        add("computational_overhead", pass,
            oh ? "combined mean " + detail::fmt_double(oh->combined_mean_us) + "us, " +
                     detail::fmt_double(oh->fraction_of_period * 100) + "% of period"
               : "diagnostic stream unavailable");
    }

    r.all_pass = std::all_of(r.checks.begin(), r.checks.end(),
                             [](const ExperimentCheck& c) { return c.pass; });
    return r;
}

} // namespace canseal
