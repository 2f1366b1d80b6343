#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <set>
#include <vector>

#include "canseal/node_sim.hpp"
#include "canseal/payload.hpp"
#include "canseal/speck64.hpp"

using namespace canseal;

TEST_CASE("freshness source is deterministic per seed") {
    auto a = FreshnessSource::seeded(7);
    auto b = FreshnessSource::seeded(7);
    auto c = FreshnessSource::seeded(8);
    std::vector<std::uint8_t> sa, sb, sc;
    for (int i = 0; i < 64; ++i) {
        sa.push_back(gen_freshness(a));
        sb.push_back(gen_freshness(b));
        sc.push_back(gen_freshness(c));
    }
    CHECK(sa == sb);
    CHECK(sa != sc);
}

TEST_CASE("freshness bytes cover the range and look uniform") {
    auto src = FreshnessSource::seeded(0x5eed3001);
    std::array<std::size_t, 256> counts{};
    const std::size_t draws = 65536;
    for (std::size_t i = 0; i < draws; ++i) ++counts[gen_freshness(src)];

    CHECK(std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));

    // chi-square against uniform, 255 dof; 330.5197 is the 0.999 quantile
    const double expected = static_cast<double>(draws) / 256.0;
    double chi2 = 0;
    for (std::size_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    CHECK(chi2 < 330.5197436340059);
}

TEST_CASE("plain block layout") {
    CHECK(assemble_plain_block(0xAA, {5, 0x55, 69}) ==
          std::array<std::uint8_t, 8>{0xAA, 0x05, 0x55, 0x45, 0, 0, 0, 0});
    CHECK(assemble_plain_block(0, {0, 0, 0}) == std::array<std::uint8_t, 8>{});

    // byte_1/byte_2/byte_3 of the capture analysis are app/constant/shifted
    const auto block = assemble_plain_block(0x11, {0x22, 0x33, 0x44});
    CHECK(block[1] == 0x22);
    CHECK(block[2] == 0x33);
    CHECK(block[3] == 0x44);
}

TEST_CASE("seal encrypts the assembled block with a freshly drawn byte") {
    const auto ks = speck::expand_key(speck::kKatKey);
    const PlainSignals s{5, 0x55, 69};

    auto src = FreshnessSource::seeded(99);
    auto twin = FreshnessSource::seeded(99);
    const SealOutcome out = seal(s, src, ks, NullTimer{});

    const std::uint8_t expected_freshness = gen_freshness(twin);
    CHECK(out.freshness == expected_freshness);
    const auto expected = speck::block_to_bytes(
        speck::encrypt_block(speck::block_from_bytes(assemble_plain_block(expected_freshness, s)), ks));
    CHECK(out.payload == expected);
    CHECK(out.timing.freshness_ns == 0);
    CHECK(out.timing.encrypt_ns == 0);
}

TEST_CASE("unseal inverts seal over the whole signal space") {
    const auto ks = speck::expand_key(speck::kKatKey);
    auto src = FreshnessSource::seeded(0x5eed3002);
    for (int app = 0; app <= 125; ++app) {
        for (int rep = 0; rep < 8; ++rep) {
            const PlainSignals s{static_cast<std::uint8_t>(app), 0x55,
                                 static_cast<std::uint8_t>(app + 64)};
            const SealOutcome out = seal(s, src, ks, NullTimer{});
            const auto opened = unseal(out.payload, ks);
            REQUIRE(opened.has_value());
            CHECK(opened->signals == s);
            CHECK(opened->freshness == out.freshness);
        }
    }
}

TEST_CASE("distinct freshness bytes give distinct ciphertexts") {
    const auto ks = speck::expand_key(speck::kKatKey);
    const PlainSignals s{42, 0x55, 106};
    std::set<SealedPayload> seen;
    for (int f = 0; f < 256; ++f)
        seen.insert(speck::block_to_bytes(speck::encrypt_block(
            speck::block_from_bytes(assemble_plain_block(static_cast<std::uint8_t>(f), s)), ks)));
    CHECK(seen.size() == 256);
}

TEST_CASE("same signals sealed twice differ while the source advances") {
    const auto ks = speck::expand_key(speck::kKatKey);
    auto src = FreshnessSource::seeded(1);
    const PlainSignals s{10, 0x55, 74};
    const SealOutcome a = seal(s, src, ks, NullTimer{});
    const SealOutcome b = seal(s, src, ks, NullTimer{});
    REQUIRE(a.freshness != b.freshness); // holds for this seed's first two draws
    CHECK(a.payload != b.payload);
}

TEST_CASE("identical freshness and signals repeat the ciphertext exactly") {
    const auto ks = speck::expand_key(speck::kKatKey);
    const auto block = assemble_plain_block(0x7C, {99, 0x55, 163});
    const auto once = speck::encrypt_block(speck::block_from_bytes(block), ks);
    const auto again = speck::encrypt_block(speck::block_from_bytes(block), ks);
    CHECK(once == again); // the residual repeat channel freshness only narrows
}

TEST_CASE("unseal of the all-zero plaintext block") {
    const auto ks = speck::expand_key(speck::kKatKey);
    const auto sealed = speck::block_to_bytes(speck::encrypt_block(speck::Block64{}, ks));
    const auto opened = unseal(sealed, ks);
    REQUIRE(opened.has_value());
    CHECK(opened->freshness == 0);
    CHECK(opened->signals == PlainSignals{0, 0, 0});
}

TEST_CASE("wrong key fails the padding check") {
    const auto right = speck::expand_key(speck::kKatKey);
    const auto wrong = speck::expand_key(speck::Key128{{1, 2, 3, 4}});
    auto src = FreshnessSource::seeded(0x5eed3003);

    std::size_t accidental_passes = 0;
    for (int i = 0; i < 10000; ++i) {
        const PlainSignals s{static_cast<std::uint8_t>(i % 126), 0x55,
                             static_cast<std::uint8_t>(i % 126 + 64)};
        const SealOutcome out = seal(s, src, right, NullTimer{});
        if (unseal(out.payload, wrong)) ++accidental_passes;
    }
    // accidental zero padding under the wrong key has probability 2^-32
    CHECK(accidental_passes == 0);
}

TEST_CASE("every ciphertext byte position takes nearly all values over a run") {
    const auto ks = speck::expand_key(speck::kKatKey);
    auto src = FreshnessSource::seeded(0x5eed3004);
    std::array<std::set<std::uint8_t>, 8> seen;

    SawtoothState st;
    for (int i = 0; i < 18000; ++i) {
        st = sawtooth_next(st);
        const PlainSignals s{st.value, 0x55, shifted_of(st.value, 64)};
        const SealOutcome out = seal(s, src, ks, NullTimer{});
        for (int b = 0; b < 8; ++b)
            seen[static_cast<std::size_t>(b)].insert(out.payload[static_cast<std::size_t>(b)]);
    }
    for (const auto& position : seen) CHECK(position.size() >= 250);
}

TEST_CASE("timing samples from the steady timer are sane and stable") {
    const auto ks = speck::expand_key(speck::kKatKey);
    auto src = FreshnessSource::seeded(0x5eed3005);
    const SteadyTimer timer;

    std::vector<std::uint64_t> encrypt_ns;
    encrypt_ns.reserve(18000);
    SawtoothState st;
    for (int i = 0; i < 18000; ++i) {
        st = sawtooth_next(st);
        const PlainSignals s{st.value, 0x55, shifted_of(st.value, 64)};
        const SealOutcome out = seal(s, src, ks, timer);
        encrypt_ns.push_back(out.timing.encrypt_ns);
    }
    std::sort(encrypt_ns.begin(), encrypt_ns.end());
    const std::uint64_t median = encrypt_ns[encrypt_ns.size() / 2];
    const std::uint64_t p99 = encrypt_ns[encrypt_ns.size() * 99 / 100];
    CHECK(median > 0);
    CHECK(p99 < 100 * median);
}

TEST_CASE("key hex parsing") {
    CHECK(key_from_hex("1b1a1918131211100b0a090803020100") == speck::kKatKey);
    CHECK(key_to_hex(speck::kKatKey) == "1b1a1918131211100b0a090803020100");
    CHECK(key_from_hex(key_to_hex(speck::Key128{{0xdeadbeef, 1, 2, 3}})) ==
          speck::Key128{{0xdeadbeef, 1, 2, 3}});

    CHECK_THROWS_AS(key_from_hex("1234"), parse_error);
    CHECK_THROWS_AS(key_from_hex("zz1a1918131211100b0a090803020100"), parse_error);
}
