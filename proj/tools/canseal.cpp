// canseal: simulate an encrypting CAN node, capture its traffic, and run
// the passive-observer analysis suite over run directories.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "canseal/canseal.hpp"

namespace {

// exit codes: 0 ok, 2 bad flags/config, 3 I/O or malformed input,
// 4 failed analysis check or known-answer test
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitCheckFailed = 4;

std::uint32_t parse_id(const std::string& s) {
    try {
        std::size_t pos = 0;
        const unsigned long v = std::stoul(s, &pos, 0);
        if (pos != s.size() || v > canseal::kMaxExtendedId)
            throw canseal::config_error("bad frame id: '" + s + "'");
        return static_cast<std::uint32_t>(v);
    } catch (const std::exception&) {
        throw canseal::config_error("bad frame id: '" + s + "'");
    }
}

struct SimFlags {
    std::string mode = "encrypted";
    std::uint64_t seed = 0;
    std::uint32_t duration_s = 180;
    std::uint32_t rate_hz = 100;
    std::string key_hex = canseal::key_to_hex(canseal::speck::kKatKey);
    std::string data_id = "0x100";
    std::string diag_id = "0x101";
    std::uint32_t shift = 64;
    std::uint32_t constant = 0x55;
    std::string pace = "virtual";
    std::string freshness = "seeded";
    std::string config_path;
};

void add_sim_flags(CLI::App& cmd, SimFlags& f, bool with_mode) {
    if (with_mode)
        cmd.add_option("--mode", f.mode, "encrypted|plaintext")
            ->check(CLI::IsMember({"encrypted", "plaintext"}));
    cmd.add_option("--seed", f.seed, "freshness PRNG seed");
    cmd.add_option("--duration", f.duration_s, "run length in seconds")
        ->capture_default_str();
    cmd.add_option("--rate", f.rate_hz, "transmission rate in Hz")->capture_default_str();
    cmd.add_option("--key", f.key_hex, "128-bit key as 32 hex chars (words l2,l1,l0,k0)");
    cmd.add_option("--data-id", f.data_id, "arbitration id of the data stream")
        ->capture_default_str();
    cmd.add_option("--diag-id", f.diag_id, "arbitration id of the diagnostic stream")
        ->capture_default_str();
    cmd.add_option("--shift", f.shift, "offset added to app_data for the mirrored signal")
        ->capture_default_str();
    cmd.add_option("--constant", f.constant, "value of the constant reference byte")
        ->capture_default_str();
    cmd.add_option("--pace", f.pace, "virtual|wall (wall sleeps in real time)")
        ->check(CLI::IsMember({"virtual", "wall"}));
    cmd.add_option("--freshness", f.freshness, "seeded|os (os is non-reproducible)")
        ->check(CLI::IsMember({"seeded", "os"}));
    cmd.add_option("--config", f.config_path,
                   "key=value file with the same keys as the flags; flags win");
}

// Config files are plain key=value lines applied as new defaults before
// the command line is parsed, so explicit flags always win.
void apply_config_file(const std::string& path, SimFlags& f) {
    std::ifstream in(path);
    if (!in)
        throw canseal::config_error("cannot open config file " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw canseal::config_error("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "mode")
                f.mode = value;
            else if (key == "seed")
                f.seed = std::stoull(value);
            else if (key == "duration")
                f.duration_s = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "rate")
                f.rate_hz = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "key")
                f.key_hex = value;
            else if (key == "data-id")
                f.data_id = value;
            else if (key == "diag-id")
                f.diag_id = value;
            else if (key == "shift")
                f.shift = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "constant")
                f.constant = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "pace")
                f.pace = value;
            else if (key == "freshness")
                f.freshness = value;
            else
                throw canseal::config_error("config line " + std::to_string(lineno) +
                                            ": unknown key '" + key + "'");
        } catch (const canseal::config_error&) {
            throw;
        } catch (const std::exception&) {
            throw canseal::config_error("config line " + std::to_string(lineno) +
                                        ": bad value for '" + key + "'");
        }
    }
}

canseal::RunConfig to_config(const SimFlags& f) {
    canseal::RunConfig cfg;
    const auto mode = canseal::run_mode_from(f.mode);
    if (!mode)
        throw canseal::config_error("mode must be encrypted or plaintext");
    cfg.mode = *mode;
    cfg.seed = f.seed;
    cfg.duration_s = f.duration_s;
    cfg.rate_hz = f.rate_hz;
    try {
        cfg.key = canseal::key_from_hex(f.key_hex);
    } catch (const canseal::parse_error& e) {
        throw canseal::config_error(e.what());
    }
    cfg.data_id = parse_id(f.data_id);
    cfg.diag_id = parse_id(f.diag_id);
    if (f.shift > 255 || f.constant > 255)
        throw canseal::config_error("--shift and --constant must fit one byte");
    cfg.shift_offset = static_cast<std::uint8_t>(f.shift);
    cfg.constant_value = static_cast<std::uint8_t>(f.constant);
    cfg.pace = f.pace == "wall" ? canseal::PaceMode::wall_clock
                                : canseal::PaceMode::virtual_time;
    cfg.freshness = f.freshness == "os" ? canseal::FreshnessMode::os_entropy
                                        : canseal::FreshnessMode::seeded;
    canseal::validate_config(cfg);
    return cfg;
}

std::string id_str(canseal::CanId id) {
    return "0x" + canseal::detail::id_digits(id);
}

void print_counts(const canseal::Capture& c, const std::filesystem::path& dir) {
    std::cout << "wrote " << dir.string() << " (mode " << to_string(c.meta.mode) << ", seed "
              << c.meta.seed << ")\n";
    for (const auto& [id, frames] : c.by_id)
        std::cout << "  " << id_str(id) << ": " << frames.size() << " frames\n";
}

void write_stream_reports(const std::filesystem::path& dir,
                          const std::vector<canseal::report::LabeledStream>& streams,
                          const std::vector<canseal::report::LabeledCapture>& captures,
                          canseal::CanId data_id) {
    namespace rep = canseal::report;
    std::filesystem::create_directories(dir);
    rep::write_interval_stats_csv(dir / "interval_stats.csv", streams);
    rep::write_per_id_intervals_csv(dir / "intervals_by_id.csv", captures);
    rep::write_interval_kde_csv(dir / "interval_kde.csv", streams);
    rep::write_byte_profiles_csv(dir / "byte_profiles.csv", streams);
    rep::write_pearson_csv(dir / "pearson_matrix.csv", streams);
    rep::write_autocorr_csv(dir / "autocorr.csv", streams);
    rep::write_run_lengths_csv(dir / "run_lengths.csv", streams);
    rep::write_overhead_csv(dir / "overhead.csv", streams);
    rep::write_overhead_kde_csv(dir / "overhead_kde.csv", streams);
    rep::write_timeseries_csv(dir / "timeseries.csv", captures, data_id);
}

int cmd_simulate(const SimFlags& flags, const std::string& out_dir) {
    const canseal::RunConfig cfg = to_config(flags);
    const canseal::Capture capture = canseal::run(cfg);
    canseal::write_capture(capture, out_dir);
    print_counts(capture, out_dir);
    return kExitOk;
}

int cmd_analyze(const std::string& in_dir, const std::string& out_dir,
                const std::string& data_id_s, const std::string& diag_id_s) {
    const canseal::Capture capture = canseal::read_capture(in_dir);
    const canseal::CanId data_id{false, parse_id(data_id_s)};
    const canseal::CanId diag_id{false, parse_id(diag_id_s)};
    const double period_us = capture.meta.rate_hz > 0 ? 1e6 / capture.meta.rate_hz : 10000.0;

    const canseal::StreamAnalysis a =
        canseal::analyze_stream(capture, data_id, diag_id, period_us);

    const std::string label = to_string(capture.meta.mode);
    const std::filesystem::path out = out_dir.empty()
                                          ? std::filesystem::path(in_dir) / "analysis"
                                          : std::filesystem::path(out_dir);
    write_stream_reports(out, {{label, &a}}, {{label, &capture}}, data_id);

    std::ostringstream text;
    canseal::report::render_stream_text(text, label, a);
    std::ofstream(out / "report.txt") << text.str();
    std::cout << text.str() << "reports in " << out.string() << '\n';
    return kExitOk;
}

struct CompareFlags {
    std::string encrypted_dir;
    std::string plaintext_dir;
    SimFlags sim;
    bool have_seed = false;
    std::string out_dir = "compare_out";
    std::string try_key_hex;
};

int cmd_compare(const CompareFlags& flags) {
    canseal::Capture enc, plain;
    if (flags.have_seed) {
        canseal::RunConfig cfg = to_config(flags.sim);
        auto pair = canseal::run_pair(cfg);
        enc = std::move(pair.first);
        plain = std::move(pair.second);
    } else {
        if (flags.encrypted_dir.empty() || flags.plaintext_dir.empty())
            throw canseal::config_error(
                "compare needs --encrypted and --plaintext run directories, or --seed");
        enc = canseal::read_capture(flags.encrypted_dir);
        plain = canseal::read_capture(flags.plaintext_dir);
    }

    const canseal::CanId data_id{false, parse_id(flags.sim.data_id)};
    const canseal::CanId diag_id{false, parse_id(flags.sim.diag_id)};

    const canseal::AnalysisReport report =
        canseal::semantic_report(enc, plain, data_id, diag_id);

    std::string text = canseal::report::render_compare_text(report);

    if (!flags.try_key_hex.empty()) {
        const auto ks = canseal::speck::expand_key(canseal::key_from_hex(flags.try_key_hex));
        std::size_t violations = 0, total = 0;
        for (const canseal::Frame& f : canseal::frames_on(enc, data_id)) {
            ++total;
            if (!canseal::unseal(f.payload, ks)) ++violations;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "key trial: %zu/%zu padding violations (%.2f%%) under key %s\n",
                      violations, total,
                      total ? 100.0 * static_cast<double>(violations) / static_cast<double>(total)
                            : 0.0,
                      flags.try_key_hex.c_str());
        text += buf;
    }

    const std::filesystem::path out = flags.out_dir;
    write_stream_reports(out, {{"encrypted", &report.encrypted}, {"plaintext", &report.plaintext}},
                         {{"encrypted", &enc}, {"plaintext", &plain}}, data_id);
    canseal::report::write_checks_csv(out / "checks.csv", report.checks);
    std::ofstream(out / "report.txt") << text;
    std::cout << text << "reports in " << out.string() << '\n';
    return report.all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_kat() {
    const auto r = canseal::speck::run_kat();
    std::printf("speck64/128 known-answer: plaintext (%08x, %08x) key %s\n",
                canseal::speck::kKatPlain.x, canseal::speck::kKatPlain.y,
                canseal::key_to_hex(canseal::speck::kKatKey).c_str());
    std::printf("  expected (%08x, %08x), got (%08x, %08x) -> %s\n",
                canseal::speck::kKatCipher.x, canseal::speck::kKatCipher.y, r.got.x, r.got.y,
                r.encrypt_ok ? "match" : "MISMATCH");
    std::printf("  decrypt inverts: %s\n", r.decrypt_ok ? "yes" : "NO");
    std::printf("%s\n", r.ok() ? "PASS" : "FAIL");
    return r.ok() ? kExitOk : kExitCheckFailed;
}

int cmd_ingest(const std::string& candump_file, const std::string& out_dir,
               const std::string& mode) {
    std::ifstream in(candump_file);
    if (!in)
        throw canseal::io_error("cannot open candump file " + candump_file);
    canseal::RunMeta meta;
    meta.mode = *canseal::run_mode_from(mode);
    const canseal::Capture capture = canseal::ingest_candump(in, meta);
    canseal::write_capture(capture, out_dir);
    print_counts(capture, out_dir);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speck-sealed CAN payload simulation and passive traffic analysis"};
    app.require_subcommand(1);

    SimFlags sim_flags;
    std::string sim_out = "run_out";
    CLI::App* simulate = app.add_subcommand("simulate", "run the virtual node, write a capture");
    add_sim_flags(*simulate, sim_flags, true);
    simulate->add_option("--out", sim_out, "run directory to create")->capture_default_str();

    std::string an_in, an_out, an_data = "0x100", an_diag = "0x101";
    CLI::App* analyze = app.add_subcommand("analyze", "analyze one run directory");
    analyze->add_option("--in", an_in, "run directory")->required();
    analyze->add_option("--out", an_out, "report directory (default <in>/analysis)");
    analyze->add_option("--data-id", an_data, "data stream id")->capture_default_str();
    analyze->add_option("--diag-id", an_diag, "diagnostic stream id")->capture_default_str();

    CompareFlags cmp;
    CLI::App* compare =
        app.add_subcommand("compare", "side-by-side encrypted/plaintext experiment checks");
    compare->add_option("--encrypted", cmp.encrypted_dir, "encrypted run directory");
    compare->add_option("--plaintext", cmp.plaintext_dir, "plaintext run directory");
    add_sim_flags(*compare, cmp.sim, false);
    CLI::Option* seed_opt = compare->get_option("--seed");
    compare->add_option("--out", cmp.out_dir, "report directory")->capture_default_str();
    compare->add_option("--try-key", cmp.try_key_hex,
                        "attempt to unseal the encrypted stream under this key");

    CLI::App* kat = app.add_subcommand("kat", "run the cipher known-answer check");

    std::string ing_file, ing_out = "ingest_out", ing_mode = "plaintext";
    CLI::App* ingest = app.add_subcommand("ingest", "convert a candump log to a run directory");
    ingest->add_option("--candump", ing_file, "candump text file")->required();
    ingest->add_option("--out", ing_out, "run directory to create")->capture_default_str();
    ingest->add_option("--mode", ing_mode, "mode recorded in meta.txt")
        ->check(CLI::IsMember({"encrypted", "plaintext"}));

    try {
        // pre-pass: config-file values become defaults, flags override
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            std::string path;
            if (arg == "--config" && i + 1 < argc)
                path = argv[i + 1];
            else if (arg.rfind("--config=", 0) == 0)
                path = arg.substr(9);
            if (!path.empty()) {
                apply_config_file(path, sim_flags);
                apply_config_file(path, cmp.sim);
            }
        }
    } catch (const canseal::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_flags, sim_out);
        if (analyze->parsed()) return cmd_analyze(an_in, an_out, an_data, an_diag);
        if (compare->parsed()) {
            cmp.have_seed = seed_opt->count() > 0;
            return cmd_compare(cmp);
        }
        if (kat->parsed()) return cmd_kat();
        if (ingest->parsed()) return cmd_ingest(ing_file, ing_out, ing_mode);
    } catch (const canseal::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const canseal::insufficient_data& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const canseal::parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const canseal::io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
