#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "addchain/cwm.hpp"

using addchain::AdditionChain;
using addchain::CwmPrecomputation;
using addchain::Natural;
using addchain::WindowedBuild;
using addchain::WindowMap;

namespace {

std::vector<std::uint64_t> small_values(const AdditionChain& chain) {
    std::vector<std::uint64_t> out;
    for (const Natural& v : chain.elements())
        out.push_back(v.to_u64());
    return out;
}

AdditionChain table_chain(const CwmPrecomputation& table) {
    std::vector<Natural> elements;
    for (std::uint64_t v : table.values)
        elements.emplace_back(v);
    return AdditionChain(std::move(elements), table.steps);
}

Natural random_natural(std::mt19937_64& rng, std::size_t bits) {
    Natural value;
    for (std::size_t got = 0; got < bits; got += 64) {
        value <<= 64;
        value += Natural(rng());
    }
    value >>= (64 - bits % 64) % 64;
    Natural top = Natural(1) << (bits - 1);
    if (value < top)
        value += top;
    return value;
}

const Natural kTrace = Natural::parse("0b11111011100011001101001");  // 8242793

}  // namespace

TEST_CASE("cwm_split halves the window width when a gap is allowed") {
    CHECK(addchain::cwm_split(6, 3).R == 3);
    CHECK(addchain::cwm_split(6, 3).L == 3);
    CHECK(addchain::cwm_split(5, 2).R == 3);
    CHECK(addchain::cwm_split(5, 2).L == 2);
    CHECK(addchain::cwm_split(1, 4).R == 1);
    CHECK(addchain::cwm_split(1, 4).L == 0);
    CHECK(addchain::cwm_split(4, 0).R == 0);
    CHECK(addchain::cwm_split(4, 0).L == 4);
}

TEST_CASE("cwm_precompute lays out odds, powers, then split values") {
    CwmPrecomputation table = addchain::cwm_precompute(6, 3);
    CHECK(table.count() == 37);
    std::vector<std::uint64_t> head(table.values.begin(), table.values.begin() + 13);
    CHECK(head == std::vector<std::uint64_t>{1, 2, 3, 5, 7, 8, 16, 32, 64, 65, 67, 69, 71});
    CHECK(table.values[13] == 129);
    CHECK(table.values.back() == 455);
    CHECK(addchain::validate_chain(table_chain(table)).ok);

    CHECK(addchain::cwm_precompute(4, 0).values ==
          std::vector<std::uint64_t>{1, 2, 3, 5, 7, 9, 11, 13, 15});
    CHECK(addchain::cwm_precompute(2, 5).values ==
          std::vector<std::uint64_t>{1, 2, 4, 8, 16, 32, 64, 65});
    CHECK(addchain::cwm_precompute(1, 4).values ==
          std::vector<std::uint64_t>{1, 2, 4, 8, 16, 32});
}

TEST_CASE("cwm_precompute counts follow the closed form") {
    for (std::uint32_t k = 1; k <= 10; ++k)
        for (std::uint32_t s = 0; s <= 10; ++s) {
            CAPTURE(k, s);
            CwmPrecomputation table = addchain::cwm_precompute(k, s);
            std::size_t expected;
            if (s == 0)
                expected = k == 1 ? 2 : (std::size_t(1) << (k - 1)) + 1;
            else
                expected = (std::size_t(1) << (k - 1)) + s + 2 - (table.R == 1 ? 1 : 0);
            CHECK(table.count() == expected);
            CHECK(table.count() == addchain::detail::cwm_shape(k, s).count);
            CHECK(addchain::validate_chain(table_chain(table)).ok);
        }
}

TEST_CASE("table membership and index agree with the laid out values") {
    for (std::uint32_t k : {1u, 2u, 3u, 5u, 6u, 8u})
        for (std::uint32_t s : {0u, 1u, 3u, 5u}) {
            CAPTURE(k, s);
            CwmPrecomputation table = addchain::cwm_precompute(k, s);
            auto shape = addchain::detail::cwm_shape(k, s);
            CHECK(shape.max_value == table.values.back());
            for (std::size_t i = 0; i < table.values.size(); ++i) {
                CHECK(addchain::detail::cwm_member(shape, table.values[i]));
                CHECK(addchain::detail::cwm_member_index(shape, table.values[i]) == i);
            }
            for (std::uint64_t probe = 1; probe <= 2 * shape.max_value + 2; ++probe) {
                bool in_table = std::find(table.values.begin(), table.values.end(), probe) !=
                                table.values.end();
                CAPTURE(probe);
                REQUIRE(addchain::detail::cwm_member(shape, probe) == in_table);
            }
        }
}

TEST_CASE("is_window_value accepts exactly the producible window shapes") {
    CHECK(addchain::is_window_value(6, 3, 197));
    CHECK(addchain::is_window_value(6, 3, 455));
    CHECK(addchain::is_window_value(6, 3, 1));
    CHECK(addchain::is_window_value(6, 3, 7));
    CHECK_FALSE(addchain::is_window_value(6, 3, 6));
    CHECK_FALSE(addchain::is_window_value(6, 3, 0));
    CHECK_FALSE(addchain::is_window_value(6, 3, 9));    // odd, but 9 = 0*64 + 9 with 9 >= 8
    CHECK_FALSE(addchain::is_window_value(6, 3, 529));  // a = 8 is out of range

    CHECK(addchain::is_window_value(4, 0, 15));
    CHECK_FALSE(addchain::is_window_value(4, 0, 17));
    CHECK_FALSE(addchain::is_window_value(4, 0, 4));

    // Every extracted window is a window value, and odd window values are
    // exactly the odd table members.
    std::mt19937_64 rng(101);
    for (int round = 0; round < 50; ++round) {
        Natural e = random_natural(rng, 32 + rng() % 128);
        std::uint32_t k = 1 + rng() % 8;
        std::uint32_t s = rng() % 8;
        auto shape = addchain::detail::cwm_shape(k, s);
        for (const auto& [pos, w] : addchain::extract_windows(e, k, s).entries) {
            CHECK(addchain::is_window_value(k, s, w));
            CHECK(addchain::detail::cwm_member(shape, w));
        }
        for (std::uint64_t probe = 1; probe < 2 * shape.max_value; probe += 2)
            CHECK(addchain::is_window_value(k, s, probe) ==
                  addchain::detail::cwm_member(shape, probe));
    }
}

TEST_CASE("extract_windows golden decompositions") {
    WindowMap trace = addchain::extract_windows(kTrace, 6, 3);
    CHECK(trace.w0 == 455);
    REQUIRE(trace.v() == 4);
    CHECK(trace.entries.at(14) == 455);
    CHECK(trace.entries.at(18) == 3);
    CHECK(trace.entries.at(3) == 197);
    CHECK(trace.entries.at(0) == 65);
    CHECK(trace.top_position() == 18);

    WindowMap narrow = addchain::extract_windows(Natural(95), 4, 2);
    CHECK(narrow.w0 == 35);
    REQUIRE(narrow.v() == 3);
    CHECK(narrow.entries.at(1) == 35);
    CHECK(narrow.entries.at(0) == 17);
    CHECK(narrow.entries.at(3) == 1);

    WindowMap twin = addchain::extract_windows(Natural(8385), 2, 5);
    CHECK(twin.w0 == 65);
    REQUIRE(twin.v() == 2);
    CHECK(twin.entries.at(7) == 65);
    CHECK(twin.entries.at(0) == 65);
}

TEST_CASE("window maps reassemble the target") {
    std::mt19937_64 rng(211);
    for (int round = 0; round < 80; ++round) {
        Natural e = random_natural(rng, 16 + rng() % 256);
        std::uint32_t k = 1 + rng() % 10;
        std::uint32_t s = rng() % 10;
        WindowMap map = addchain::extract_windows(e, k, s);
        Natural sum;
        for (const auto& [pos, w] : map.entries)
            sum += Natural(w) << pos;
        CHECK(sum == e);
    }
}

TEST_CASE("cwm reconstructs the traced example in 58 elements") {
    WindowedBuild build = addchain::cwm(6, 3, kTrace);
    CHECK(build.precomp_count == 37);
    CHECK(build.map.top_position() == 18);
    CHECK(build.skips == 0);
    CHECK_FALSE(build.truncated);
    CHECK(build.chain.element_count() == 58);
    CHECK(build.chain.length() == 57);
    CHECK(build.chain.target() == kTrace);
    CHECK(addchain::validate_chain(build.chain).ok);

    // The walk starts at the highest offset in the map, which here belongs
    // to a window carved out of the first window's cleared span: offset 18
    // sits above the first window's own offset 14.
    CHECK(build.chain.elements()[36] == Natural(455));
    std::vector<std::uint64_t> flat = small_values(build.chain);
    std::vector<std::uint64_t> after_table(flat.begin() + 37, flat.begin() + 42);
    CHECK(after_table == std::vector<std::uint64_t>{6, 12, 24, 48, 503});
}

TEST_CASE("cwm handles twin windows with a long gap") {
    WindowedBuild build = addchain::cwm(2, 5, Natural(8385));
    CHECK(small_values(build.chain) ==
          std::vector<std::uint64_t>{1, 2, 4, 8, 16, 32, 64, 65, 130, 260, 520, 1040, 2080,
                                     4160, 8320, 8385});
    CHECK(build.chain.length() == 15);
    CHECK(build.skips == 0);
}

TEST_CASE("cwm with no gap is exactly wm") {
    std::mt19937_64 rng(307);
    for (int round = 0; round < 60; ++round) {
        Natural e = random_natural(rng, 8 + rng() % 120);
        std::uint32_t k = 1 + rng() % 10;
        CHECK(addchain::cwm(k, 0, e).chain.elements() == addchain::wm(k, e).chain.elements());
    }
}

TEST_CASE("cwm truncates inside the table") {
    CHECK(small_values(addchain::cwm(2, 5, Natural(65)).chain) ==
          std::vector<std::uint64_t>{1, 2, 4, 8, 16, 32, 64, 65});
    CHECK(small_values(addchain::cwm(2, 5, Natural(16)).chain) ==
          std::vector<std::uint64_t>{1, 2, 4, 8, 16});
    CHECK(small_values(addchain::cwm(6, 3, Natural(7)).chain) ==
          std::vector<std::uint64_t>{1, 2, 3, 5, 7});
    CHECK(addchain::cwm(6, 3, Natural(1)).truncated);
}

TEST_CASE("cwm_element_count matches the built chain") {
    std::mt19937_64 rng(419);
    for (int round = 0; round < 250; ++round) {
        std::uint64_t e = (rng() >> (rng() % 62)) | 1;
        std::uint32_t k = 1 + rng() % 8;
        std::uint32_t s = rng() % 8;
        CAPTURE(e, k, s);
        CHECK(addchain::cwm_element_count(k, s, Natural(e)) ==
              addchain::cwm(k, s, Natural(e)).chain.element_count());
    }
    for (std::size_t bits : {160, 384}) {
        Natural e = random_natural(rng, bits);
        for (std::uint32_t k = 1; k <= 10; ++k)
            for (std::uint32_t s = 0; s <= 10; ++s) {
                CAPTURE(bits, k, s);
                CHECK(addchain::cwm_element_count(k, s, e) ==
                      addchain::cwm(k, s, e).chain.element_count());
            }
    }
    CHECK(addchain::cwm_element_count(6, 3, kTrace) == 58);
    CHECK(addchain::cwm_element_count(2, 5, Natural(8385)) == 16);
    CHECK(addchain::cwm_element_count(2, 5, Natural(65)) == 8);
    CHECK(addchain::cwm_element_count(2, 5, Natural(16)) == 5);
}

TEST_CASE("cwm_best picks the smallest count over the grid") {
    std::mt19937_64 rng(523);
    Natural e = random_natural(rng, 96);
    addchain::CwmChoice choice = addchain::cwm_best(e, 8, 8);
    std::size_t grid_best = SIZE_MAX;
    for (std::uint32_t k = 1; k <= 8; ++k)
        for (std::uint32_t s = 0; s <= 8; ++s)
            grid_best = std::min(grid_best, addchain::cwm_element_count(k, s, e));
    CHECK(choice.build.chain.element_count() == grid_best);
    CHECK(addchain::validate_chain(choice.build.chain).ok);
    CHECK(choice.build.chain.target() == e);

    addchain::CwmChoice traced = addchain::cwm_best(kTrace, 6, 3);
    CHECK(traced.build.chain.element_count() <= 58);
}

TEST_CASE("cwm chains exponentiate correctly") {
    Natural base(3), modulus(1000);
    CHECK(addchain::exponentiate_with_chain(base, addchain::cwm(2, 2, Natural(13)).chain,
                                            modulus) == Natural(323));
    Natural big_mod = Natural::parse("0xfa93c0fe78d4a17b3d9210567cd3f9b3");
    CHECK(addchain::exponentiate_with_chain(base, addchain::cwm(6, 3, kTrace).chain, big_mod) ==
          addchain::modpow(base, kTrace, big_mod));
}

TEST_CASE("cwm parameter validation") {
    CHECK_THROWS_AS(addchain::cwm(0, 3, Natural(5)), std::invalid_argument);
    CHECK_THROWS_AS(addchain::cwm(31, 3, Natural(5)), std::invalid_argument);
    CHECK_THROWS_AS(addchain::cwm(3, 31, Natural(5)), std::invalid_argument);
    CHECK_THROWS_AS(addchain::cwm(3, 3, Natural()), std::domain_error);
    CHECK_THROWS_AS(addchain::extract_windows(Natural(), 3, 3), std::domain_error);
    CHECK_THROWS_AS(addchain::cwm_best(Natural(5), 0, 3), std::invalid_argument);
}
