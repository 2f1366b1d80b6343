#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>
#include <vector>

#include "canseal/analyzer.hpp"
#include "canseal/node_sim.hpp"
#include "canseal/report_io.hpp"

using namespace canseal;

namespace {

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("canseal_report_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

struct Fixture {
    Capture enc, plain;
    AnalysisReport report;

    Fixture() {
        RunConfig cfg;
        cfg.seed = 7;
        cfg.duration_s = 30; // three full sawtooth periods at 100 Hz
        auto pair = run_pair(cfg);
        enc = std::move(pair.first);
        plain = std::move(pair.second);
        report = semantic_report(enc, plain, {false, 0x100}, {false, 0x101});
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

} // namespace

TEST_CASE("checks csv escapes commas and carries one row per check") {
    TempDir tmp("checks");
    std::vector<ExperimentCheck> checks{{"alpha", true, "ok"},
                                        {"beta", false, "left, right"}};
    report::write_checks_csv(tmp.path / "checks.csv", checks);
    const std::string got = slurp(tmp.path / "checks.csv");
    CHECK(got == "check,result,detail\nalpha,pass,ok\nbeta,fail,left; right\n");
}

TEST_CASE("interval kde collapses to a spike row under the virtual clock") {
    TempDir tmp("kde");
    const auto& f = fixture();
    report::write_interval_kde_csv(tmp.path / "kde.csv",
                                   {{"encrypted", &f.report.encrypted}});
    const std::string got = slurp(tmp.path / "kde.csv");
    CHECK(got.find("encrypted,interval,spike,0.01,") != std::string::npos);
    CHECK(count_lines(got) == 2); // header + one spike row
}

TEST_CASE("per-id interval table lists both ids of both runs") {
    TempDir tmp("perid");
    const auto& f = fixture();
    report::write_per_id_intervals_csv(tmp.path / "by_id.csv",
                                       {{"encrypted", &f.enc}, {"plaintext", &f.plain}});
    const std::string got = slurp(tmp.path / "by_id.csv");
    CHECK(got.find("encrypted,0x100,3000,2999,0.01,") != std::string::npos);
    CHECK(got.find("encrypted,0x101,") != std::string::npos);
    CHECK(got.find("plaintext,0x100,") != std::string::npos);
    CHECK(count_lines(got) == 5);
}

TEST_CASE("byte profile table flags the plaintext constant") {
    TempDir tmp("profiles");
    const auto& f = fixture();
    report::write_byte_profiles_csv(tmp.path / "profiles.csv",
                                    {{"plaintext", &f.report.plaintext}});
    const std::string got = slurp(tmp.path / "profiles.csv");
    CHECK(got.find("plaintext,b2,1,0,85,85,true") != std::string::npos);
    CHECK(count_lines(got) == 9); // header + eight byte rows
}

TEST_CASE("timeseries rows align the two captures tick for tick") {
    TempDir tmp("series");
    const auto& f = fixture();
    report::write_timeseries_csv(tmp.path / "ts.csv",
                                 {{"enc", &f.enc}, {"pt", &f.plain}}, {false, 0x100});
    std::ifstream in(tmp.path / "ts.csv");
    std::string header, first;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, first));
    CHECK(header ==
          "tick,timestamp_us,enc_b0,enc_b1,enc_b2,enc_b3,pt_b0,pt_b1,pt_b2,pt_b3");
    // plaintext columns of the first tick: freshness, 1, 0x55, 65
    CHECK(first.rfind(",1,85,65") == first.size() - 8);

    std::size_t rows = 1;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3000);
}

TEST_CASE("compare text lists the six checks with verdicts") {
    const auto& f = fixture();
    const std::string text = report::render_compare_text(f.report);
    for (const char* name : {"timing_schedule", "constant_masking", "pattern_obfuscation",
                             "inter_signal_decorrelation", "external_decorrelation",
                             "computational_overhead"})
        CHECK(text.find(name) != std::string::npos);
    CHECK(text.find("[PASS] timing_schedule") != std::string::npos);
    CHECK(text.find("repeated payloads") != std::string::npos);
}

TEST_CASE("pearson table marks undefined cells") {
    TempDir tmp("pearson");
    const auto& f = fixture();
    report::write_pearson_csv(tmp.path / "r.csv", {{"plaintext", &f.report.plaintext}});
    const std::string got = slurp(tmp.path / "r.csv");
    CHECK(got.find("plaintext,b2,b2,undefined") != std::string::npos); // constant column
    CHECK(got.find("plaintext,b1,b3,1\n") != std::string::npos);
    CHECK(count_lines(got) == 65); // header + 8x8 cells
}
