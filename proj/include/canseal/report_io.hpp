#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "canseal/analyzer.hpp"
#include "canseal/errors.hpp"
#include "canseal/frame.hpp"

// Plot-data CSV tables, one per experiment, plus the text summary. These
// stand in for the figures: interval and overhead KDE grids, byte time
// series, profiles, and correlation tables.

namespace canseal::report {

using LabeledStream = std::pair<std::string, const StreamAnalysis*>;
using LabeledCapture = std::pair<std::string, const Capture*>;

namespace detail {

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write " + path.string());
    return out;
}

} // namespace detail

inline void write_interval_stats_csv(const std::filesystem::path& path,
                                     const std::vector<LabeledStream>& streams) {
    auto out = detail::open_out(path);
    out << "run,frames,intervals,mean_s,std_s,min_s,max_s,p99_s\n";
    for (const auto& [label, a] : streams) {
        out << label << ',' << a->frame_count;
        if (a->intervals) {
            const auto& s = *a->intervals;
            out << ',' << s.count << ',' << detail::num(s.mean) << ',' << detail::num(s.std_dev)
                << ',' << detail::num(s.min) << ',' << detail::num(s.max) << ','
                << detail::num(s.p99);
        } else {
            out << ",0,,,,,";
        }
        out << '\n';
    }
}

inline void write_per_id_intervals_csv(const std::filesystem::path& path,
                                       const std::vector<LabeledCapture>& captures) {
    auto out = detail::open_out(path);
    out << "run,id,frames,intervals,mean_s,std_s,min_s,max_s,p99_s\n";
    for (const auto& [label, c] : captures) {
        const auto stats = interval_stats_by_id(*c);
        for (const auto& [id, s] : stats) {
            char idbuf[16];
            std::snprintf(idbuf, sizeof idbuf, id.extended ? "0x%08x" : "0x%x", id.value);
            out << label << ',' << idbuf << ',' << (s.count + 1) << ',' << s.count << ','
                << detail::num(s.mean) << ',' << detail::num(s.std_dev) << ','
                << detail::num(s.min) << ',' << detail::num(s.max) << ',' << detail::num(s.p99)
                << '\n';
        }
    }
}

inline void write_density_rows(std::ostream& out, const std::string& label,
                               const std::string& quantity, const DensityEstimate& de) {
    if (de.is_spike) {
        out << label << ',' << quantity << ",spike," << detail::num(de.spike_value) << ",\n";
        return;
    }
    for (std::size_t i = 0; i < de.grid.size(); ++i)
        out << label << ',' << quantity << ",grid," << detail::num(de.grid[i]) << ','
            << detail::num(de.density[i]) << '\n';
}

inline void write_interval_kde_csv(const std::filesystem::path& path,
                                   const std::vector<LabeledStream>& streams) {
    auto out = detail::open_out(path);
    out << "run,quantity,kind,value_s,density\n";
    for (const auto& [label, a] : streams)
        if (a->interval_density)
            write_density_rows(out, label, "interval", *a->interval_density);
}

inline void write_byte_profiles_csv(const std::filesystem::path& path,
                                    const std::vector<LabeledStream>& streams) {
    auto out = detail::open_out(path);
    out << "run,byte,distinct,entropy_bits,min,max,is_constant\n";
    for (const auto& [label, a] : streams)
        for (const auto& p : a->byte_profiles) {
            if (!p) continue;
            out << label << ",b" << p->byte_index << ',' << p->distinct_count << ','
                << detail::num(p->shannon_entropy_bits) << ',' << int{p->min} << ','
                << int{p->max} << ',' << (p->is_constant ? "true" : "false") << '\n';
        }
}

inline void write_pearson_csv(const std::filesystem::path& path,
                              const std::vector<LabeledStream>& streams) {
    auto out = detail::open_out(path);
    out << "run,byte_i,byte_j,r\n";
    for (const auto& [label, a] : streams)
        for (int i = 0; i < kMaxDlc; ++i)
            for (int j = 0; j < kMaxDlc; ++j) {
                const auto& r =
                    a->pearson_matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                out << label << ",b" << i << ",b" << j << ','
                    << (r ? detail::num(*r) : "undefined") << '\n';
            }
}

inline void write_autocorr_csv(const std::filesystem::path& path,
                               const std::vector<LabeledStream>& streams) {
    auto out = detail::open_out(path);
    out << "run,byte,lag,r\n";
    for (const auto& [label, a] : streams)
        for (int b = 0; b < kMaxDlc; ++b) {
            const auto& r = a->autocorr_at_period[static_cast<std::size_t>(b)];
            out << label << ",b" << b << ',' << kSawtoothPeriod << ','
                << (r ? detail::num(*r) : "undefined") << '\n';
        }
}

inline void write_run_lengths_csv(const std::filesystem::path& path,
                                  const std::vector<LabeledStream>& streams) {
    auto out = detail::open_out(path);
    out << "run,byte,max_ascending,max_descending,mean_run\n";
    for (const auto& [label, a] : streams)
        for (int b = 0; b < kMaxDlc; ++b) {
            const auto& r = a->run_lengths[static_cast<std::size_t>(b)];
            if (!r) continue;
            out << label << ",b" << b << ',' << r->max_ascending << ',' << r->max_descending
                << ',' << detail::num(r->mean_run) << '\n';
        }
}

inline void write_overhead_csv(const std::filesystem::path& path,
                               const std::vector<LabeledStream>& streams) {
    auto out = detail::open_out(path);
    out << "run,quantity,count,mean_us,std_us,min_us,max_us,p99_us\n";
    auto row = [&](const std::string& label, const char* qty, const SummaryStats& s) {
        out << label << ',' << qty << ',' << s.count << ',' << detail::num(s.mean) << ','
            << detail::num(s.std_dev) << ',' << detail::num(s.min) << ',' << detail::num(s.max)
            << ',' << detail::num(s.p99) << '\n';
    };
    for (const auto& [label, a] : streams) {
        if (!a->overhead) continue;
        row(label, "freshness", a->overhead->freshness_us);
        row(label, "encrypt", a->overhead->encrypt_us);
        out << label << ",combined_mean_us,," << detail::num(a->overhead->combined_mean_us)
            << ",,,,\n";
        out << label << ",fraction_of_period,," << detail::num(a->overhead->fraction_of_period)
            << ",,,,\n";
    }
}

inline void write_overhead_kde_csv(const std::filesystem::path& path,
                                   const std::vector<LabeledStream>& streams) {
    auto out = detail::open_out(path);
    out << "run,quantity,kind,value_us,density\n";
    for (const auto& [label, a] : streams) {
        if (!a->overhead || a->overhead->freshness_series_us.size() < 2) continue;
        write_density_rows(out, label, "freshness",
                           density_estimate(a->overhead->freshness_series_us));
        write_density_rows(out, label, "encrypt",
                           density_estimate(a->overhead->encrypt_series_us));
    }
}

// One row per tick with the first four payload bytes of every labeled
// capture's data stream, aligned by position.
inline void write_timeseries_csv(const std::filesystem::path& path,
                                 const std::vector<LabeledCapture>& captures, CanId data_id) {
    auto out = detail::open_out(path);
    out << "tick,timestamp_us";
    std::vector<const std::vector<Frame>*> seqs;
    std::size_t rows = 0;
    for (const auto& [label, c] : captures) {
        const auto* seq = c->find(data_id);
        seqs.push_back(seq);
        if (seq) rows = std::max(rows, seq->size());
        for (int b = 0; b < 4; ++b) out << ',' << label << "_b" << b;
    }
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        out << i << ',';
        for (const auto* seq : seqs)
            if (seq && i < seq->size()) {
                out << (*seq)[i].timestamp_us;
                break;
            }
        for (const auto* seq : seqs) {
            if (seq && i < seq->size())
                for (int b = 0; b < 4; ++b)
                    out << ',' << int{(*seq)[i].payload[static_cast<std::size_t>(b)]};
            else
                out << ",,,,";
        }
        out << '\n';
    }
}

inline void write_checks_csv(const std::filesystem::path& path,
                             const std::vector<ExperimentCheck>& checks) {
    auto out = detail::open_out(path);
    out << "check,result,detail\n";
    for (const auto& c : checks) {
        std::string detail = c.detail;
        for (char& ch : detail)
            if (ch == ',') ch = ';';
        out << c.name << ',' << (c.pass ? "pass" : "fail") << ',' << detail << '\n';
    }
}

inline void render_stream_text(std::ostream& out, const std::string& label,
                               const StreamAnalysis& a) {
    out << label << ": " << a.frame_count << " data frames, " << a.repeated_payloads
        << " repeated payloads\n";
    if (a.intervals) {
        const auto& s = *a.intervals;
        out << "  intervals: mean " << detail::num(s.mean) << "s  std " << detail::num(s.std_dev)
            << "s  min " << detail::num(s.min) << "s  max " << detail::num(s.max) << "s\n";
    }
    for (const auto& p : a.byte_profiles) {
        if (!p) continue;
        out << "  b" << p->byte_index << ": distinct " << p->distinct_count << ", entropy "
            << detail::num(p->shannon_entropy_bits) << "b, range [" << int{p->min} << ","
            << int{p->max} << "]" << (p->is_constant ? " CONSTANT" : "") << '\n';
    }
    if (a.overhead)
        out << "  overhead: combined mean " << detail::num(a.overhead->combined_mean_us)
            << "us = " << detail::num(a.overhead->fraction_of_period * 100) << "% of period\n";
}

inline std::string render_compare_text(const AnalysisReport& r) {
    std::ostringstream out;
    render_stream_text(out, "encrypted", r.encrypted);
    render_stream_text(out, "plaintext", r.plaintext);
    out << "external correlation (plaintext shifted vs encrypted byte_1): "
        << (r.external_correlation ? detail::num(*r.external_correlation)
                                   : std::string("undefined"))
        << '\n';
    for (const auto& c : r.checks)
        out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
    out << (r.all_pass ? "all experiment checks passed\n" : "some experiment checks FAILED\n");
    return out.str();
}

} // namespace canseal::report
