#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "canseal/errors.hpp"
#include "canseal/frame.hpp"

// Run-directory layout:
//   <run>/meta.txt            key=value: seed, mode, duration_s, rate_hz
//   <run>/<hexid>.csv         one file per arbitration ID
//
// CSV columns: timestamp_us,arb_id_hex,dlc,b0,...,b7 (one header line,
// byte columns beyond dlc left empty). Standard IDs print as up to three
// hex digits, extended IDs as exactly eight, which is also how the reader
// tells them apart.

namespace canseal {

inline constexpr std::string_view kCsvHeader =
    "timestamp_us,arb_id_hex,dlc,b0,b1,b2,b3,b4,b5,b6,b7";

namespace detail {

inline bool is_hex(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isxdigit(c) != 0;
    });
}

inline std::uint64_t parse_u64(std::string_view s, const char* what) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw parse_error(std::string(what) + ": not a number: '" + std::string(s) + "'");
    return v;
}

inline std::uint32_t parse_hex32(std::string_view s, const char* what) {
    if (!is_hex(s) || s.size() > 8)
        throw parse_error(std::string(what) + ": not a hex number: '" + std::string(s) + "'");
    std::uint32_t v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v, 16);
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string id_digits(CanId id) {
    char buf[16];
    std::snprintf(buf, sizeof buf, id.extended ? "%08x" : "%x", id.value);
    return buf;
}

// <=3 hex digits means standard, more means extended (candump convention).
inline CanId id_from_digits(std::string_view digits, const char* what) {
    CanId id;
    id.value = parse_hex32(digits, what);
    id.extended = digits.size() > 3;
    const std::uint32_t max = id.extended ? kMaxExtendedId : kMaxStandardId;
    if (id.value > max)
        throw parse_error(std::string(what) + ": id out of range: '" + std::string(digits) + "'");
    return id;
}

} // namespace detail

inline std::string to_csv_record(const Frame& f) {
    std::string out = std::to_string(f.timestamp_us);
    out += ",0x";
    out += detail::id_digits(id_of(f));
    out += ',';
    out += std::to_string(static_cast<int>(f.dlc));
    char buf[4];
    for (int i = 0; i < kMaxDlc; ++i) {
        out += ',';
        if (i < f.dlc) {
            std::snprintf(buf, sizeof buf, "%02x", f.payload[static_cast<std::size_t>(i)]);
            out += buf;
        }
    }
    return out;
}

inline Frame parse_csv_record(std::string_view line) {
    static constexpr const char* kColumns[] = {"timestamp_us", "arb_id_hex", "dlc",
                                               "b0", "b1", "b2", "b3",
                                               "b4", "b5", "b6", "b7"};
    const auto fields = detail::split(line, ',');
    if (fields.size() != 11)
        throw parse_error(std::string(kColumns[std::min<std::size_t>(fields.size(), 10)]) +
                          ": column missing in record '" + std::string(line) + "'");

    Frame f;
    f.timestamp_us = detail::parse_u64(fields[0], "timestamp_us");

    std::string_view idf = fields[1];
    if (idf.size() < 3 || idf.substr(0, 2) != "0x")
        throw parse_error("arb_id_hex: expected 0x-prefixed hex: '" + std::string(idf) + "'");
    const CanId id = detail::id_from_digits(idf.substr(2), "arb_id_hex");
    f.id = id.value;
    f.extended = id.extended;

    const std::uint64_t dlc = detail::parse_u64(fields[2], "dlc");
    if (dlc > kMaxDlc)
        throw parse_error("dlc: out of range: " + std::string(fields[2]));
    f.dlc = static_cast<std::uint8_t>(dlc);

    for (int i = 0; i < kMaxDlc; ++i) {
        const auto field = fields[static_cast<std::size_t>(3 + i)];
        const char* col = kColumns[3 + i];
        if (i < f.dlc) {
            if (field.size() != 2 || !detail::is_hex(field))
                throw parse_error(std::string(col) + ": expected two hex digits: '" +
                                  std::string(field) + "'");
            f.payload[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(detail::parse_hex32(field, col));
        } else if (!field.empty()) {
            throw parse_error(std::string(col) + ": expected empty beyond dlc " +
                              std::to_string(f.dlc));
        }
    }
    return f;
}

// `(<seconds.fraction>) <iface> <HEXID>#<HEXBYTES>`, timestamp kept
// absolute; ingest_candump rebases to the first record.
inline Frame parse_candump_line(std::string_view line) {
    const std::size_t close = line.find(')');
    if (line.empty() || line[0] != '(' || close == std::string_view::npos)
        throw parse_error("candump: missing (timestamp): '" + std::string(line) + "'");

    std::string_view stamp = line.substr(1, close - 1);
    const std::size_t dot = stamp.find('.');
    if (dot == std::string_view::npos)
        throw parse_error("candump: timestamp missing fraction: '" + std::string(stamp) + "'");
    const std::uint64_t secs = detail::parse_u64(stamp.substr(0, dot), "candump timestamp");
    std::string frac(stamp.substr(dot + 1));
    if (frac.empty() || !std::all_of(frac.begin(), frac.end(),
                                     [](unsigned char c) { return std::isdigit(c) != 0; }))
        throw parse_error("candump: bad fraction: '" + std::string(stamp) + "'");
    frac.resize(6, '0'); // pad or truncate to microseconds

    std::string_view rest = line.substr(close + 1);
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    const std::size_t sp = rest.find(' ');
    if (sp == std::string_view::npos)
        throw parse_error("candump: missing interface field: '" + std::string(line) + "'");
    std::string_view body = rest.substr(sp + 1);
    while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
    while (!body.empty() && (body.back() == ' ' || body.back() == '\r')) body.remove_suffix(1);

    const std::size_t hash = body.find('#');
    if (hash == std::string_view::npos)
        throw parse_error("candump: missing '#': '" + std::string(line) + "'");
    std::string_view id_part = body.substr(0, hash);
    std::string_view data = body.substr(hash + 1);

    Frame f;
    const CanId id = detail::id_from_digits(id_part, "candump id");
    f.id = id.value;
    f.extended = id.extended;
    f.timestamp_us = secs * 1000000 + detail::parse_u64(frac, "candump fraction");

    if (data.size() % 2 != 0)
        throw parse_error("candump: odd number of payload hex digits: '" + std::string(data) + "'");
    if (data.size() / 2 > kMaxDlc)
        throw parse_error("candump: payload exceeds 8 bytes: '" + std::string(data) + "'");
    f.dlc = static_cast<std::uint8_t>(data.size() / 2);
    for (int i = 0; i < f.dlc; ++i)
        f.payload[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
            detail::parse_hex32(data.substr(static_cast<std::size_t>(2 * i), 2), "candump payload"));
    return f;
}

// Whole-file ingestion; timestamps become microseconds since the first
// record. Blank lines are skipped, errors carry the 1-based line number.
inline Capture ingest_candump(std::istream& in, RunMeta meta = {}) {
    std::vector<Frame> frames;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            frames.push_back(parse_candump_line(line));
        } catch (const parse_error& e) {
            throw parse_error("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    Capture c;
    c.meta = meta;
    if (frames.empty()) return c;

    const std::uint64_t t0 = frames.front().timestamp_us;
    for (Frame f : frames) {
        if (f.timestamp_us < t0)
            throw parse_error("candump: timestamp before first record at " +
                              std::to_string(f.timestamp_us) + "us");
        f.timestamp_us -= t0;
        c.add(f);
    }
    if (c.meta.duration_s == 0) {
        const std::uint64_t span = frames.back().timestamp_us - t0;
        c.meta.duration_s = std::max<std::uint32_t>(
            1, static_cast<std::uint32_t>((span + 999999) / 1000000));
    }
    if (c.meta.rate_hz == 0) {
        std::size_t busiest = 0;
        for (const auto& [id, seq] : c.by_id) busiest = std::max(busiest, seq.size());
        c.meta.rate_hz = std::max<std::uint32_t>(
            1, static_cast<std::uint32_t>(busiest / c.meta.duration_s));
    }
    return c;
}

inline void write_capture(const Capture& c, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw io_error("cannot create run directory " + dir.string() + ": " + ec.message());

    {
        std::ofstream meta(dir / "meta.txt");
        if (!meta)
            throw io_error("cannot write " + (dir / "meta.txt").string());
        meta << "seed=" << c.meta.seed << '\n'
             << "mode=" << to_string(c.meta.mode) << '\n'
             << "duration_s=" << c.meta.duration_s << '\n'
             << "rate_hz=" << c.meta.rate_hz << '\n';
    }

    for (const auto& [id, frames] : c.by_id) {
        const auto path = dir / (detail::id_digits(id) + ".csv");
        std::ofstream out(path);
        if (!out)
            throw io_error("cannot write " + path.string());
        out << kCsvHeader << '\n';
        std::uint64_t prev = 0;
        bool first = true;
        for (const Frame& f : frames) {
            if (auto violation = validate_frame(f))
                throw config_error("invalid frame in capture: " + *violation);
            if (id_of(f) != id)
                throw config_error("frame id does not match its sequence");
            if (!first && f.timestamp_us < prev)
                throw config_error("timestamps decrease within id " + detail::id_digits(id));
            first = false;
            prev = f.timestamp_us;
            out << to_csv_record(f) << '\n';
        }
    }
}

inline RunMeta read_meta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("not a run directory: missing " + path.string());
    RunMeta meta;
    bool have_seed = false, have_mode = false, have_duration = false, have_rate = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error("meta.txt line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "seed") {
            meta.seed = detail::parse_u64(value, "meta seed");
            have_seed = true;
        } else if (key == "mode") {
            const auto mode = run_mode_from(value);
            if (!mode)
                throw parse_error("meta mode: expected encrypted|plaintext, got '" + value + "'");
            meta.mode = *mode;
            have_mode = true;
        } else if (key == "duration_s") {
            meta.duration_s = static_cast<std::uint32_t>(detail::parse_u64(value, "meta duration_s"));
            have_duration = true;
        } else if (key == "rate_hz") {
            meta.rate_hz = static_cast<std::uint32_t>(detail::parse_u64(value, "meta rate_hz"));
            have_rate = true;
        } else {
            throw parse_error("meta.txt: unknown key '" + key + "'");
        }
    }
    if (!(have_seed && have_mode && have_duration && have_rate))
        throw parse_error("meta.txt: missing required keys (seed, mode, duration_s, rate_hz)");
    return meta;
}

inline Capture read_capture(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw io_error("no such run directory: " + dir.string());

    Capture c;
    c.meta = read_meta(dir / "meta.txt");

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        if (detail::is_hex(entry.path().stem().string())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        const CanId file_id = detail::id_from_digits(path.stem().string(), "capture filename");
        std::ifstream in(path);
        if (!in)
            throw io_error("cannot read " + path.string());
        std::string line;
        if (!std::getline(in, line))
            throw parse_error(path.string() + ": empty capture file");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != kCsvHeader)
            throw parse_error(path.string() + ": unexpected header '" + line + "'");

        auto& seq = c.by_id[file_id];
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            Frame f;
            try {
                f = parse_csv_record(line);
            } catch (const parse_error& e) {
                throw parse_error(path.string() + " line " + std::to_string(lineno) + ": " +
                                  e.what());
            }
            if (id_of(f) != file_id)
                throw parse_error(path.string() + " line " + std::to_string(lineno) +
                                  ": record id does not match filename");
            if (!seq.empty() && f.timestamp_us < seq.back().timestamp_us)
                throw parse_error(path.string() + " line " + std::to_string(lineno) +
                                  ": timestamps decrease");
            seq.push_back(f);
        }
        if (seq.empty()) c.by_id.erase(file_id);
    }
    return c;
}

} // namespace canseal
