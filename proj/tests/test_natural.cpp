#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "addchain/natural.hpp"

using addchain::Natural;

namespace {

// Deterministic 64-bit stream; std::mt19937_64 output is pinned by the
// standard, so these tests behave identically on every platform.
Natural random_natural(std::mt19937_64& rng, std::size_t bits) {
    Natural out;
    if (bits == 0)
        return out;
    for (std::size_t produced = 0; produced < bits; produced += 64) {
        std::size_t take = std::min<std::size_t>(64, bits - produced);
        std::uint64_t word = rng();
        if (take < 64)
            word &= (std::uint64_t{1} << take) - 1;
        out <<= take;
        out += Natural(word);
    }
    return out;
}

const char* kA =
    "2576269826757613847533048494101639100267158794992665057039871967877936202369339170983912336143"
    "67655567023745831496211715698844045038537136009426842157495352";
const char* kB =
    "1604463445561512434239899974457078657133699432775641593771816896070314557245478701849898809778"
    "8768827312075668433432871279344719494386187309636690778";
const char* kSum =
    "2576269987203958403684291918091636545975024508362608334604031345059625809400794895531782521133"
    "55753355792573143571880149131715324383256630395614151794186130";
const char* kProduct =
    "4133530762935681835474052883392459025478048949501786862204498653283889051539675449394780566759"
    "2664381710532420723498453586207249073098188814994510008005156121570042270429400511569853180927"
    "62158636277705014571915390578099498670635277173011685262029884558434699222767635303645673961696"
    "563636226682196263856";

}  // namespace

TEST_CASE("parse and print round-trip") {
    CHECK(Natural::parse("0").to_string() == "0");
    CHECK(Natural::parse("1").to_string() == "1");
    CHECK(Natural::parse("18446744073709551615").to_string() == "18446744073709551615");
    CHECK(Natural::parse("18446744073709551616").to_string() == "18446744073709551616");
    CHECK(Natural::parse("0x0").is_zero());
    CHECK(Natural::parse("0xffffffffffffffff").to_string() == "18446744073709551615");
    CHECK(Natural::parse("0b1101").to_u64() == 13);
    CHECK(Natural::parse("1_000_000").to_u64() == 1000000);
    CHECK(Natural::parse(kA).to_string() == kA);
    CHECK(Natural::parse("0x" + Natural::parse(kA).to_hex()) == Natural::parse(kA));
    CHECK(Natural::parse("0b" + Natural::parse(kB).to_binary()) == Natural::parse(kB));
    CHECK_THROWS_AS(Natural::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Natural::parse("12x4"), std::invalid_argument);
    CHECK_THROWS_AS(Natural::parse("0b102"), std::invalid_argument);
}

TEST_CASE("addition and subtraction against frozen vectors") {
    Natural a = Natural::parse(kA);
    Natural b = Natural::parse(kB);
    CHECK((a + b).to_string() == kSum);
    CHECK((Natural::parse(kSum) - b) == a);
    CHECK((Natural::parse(kSum) - a) == b);
    CHECK_THROWS_AS(b -= a, std::underflow_error);
}

TEST_CASE("multiplication against frozen vector") {
    Natural a = Natural::parse(kA);
    Natural b = Natural::parse(kB);
    CHECK((a * b).to_string() == kProduct);
    CHECK((a * Natural()).is_zero());
    CHECK((Natural(1) * b) == b);
}

TEST_CASE("divmod against frozen vector") {
    Natural n = Natural::parse(kProduct) + Natural(12345);
    Natural b = Natural::parse(kB);
    auto dm = Natural::divmod(n, b);
    CHECK(dm.quotient == Natural::parse(kA));
    CHECK(dm.remainder == Natural(12345));
    CHECK_THROWS_AS(Natural::divmod(n, Natural()), std::domain_error);
}

TEST_CASE("divmod reconstruction identity on random operands") {
    std::mt19937_64 rng(0x5eed0001);
    for (int round = 0; round < 4000; ++round) {
        std::size_t abits = 1 + rng() % 1200;
        std::size_t bbits = 1 + rng() % 1200;
        Natural a = random_natural(rng, abits);
        Natural b = random_natural(rng, bbits);
        if (b.is_zero())
            b = Natural(1);
        auto dm = Natural::divmod(a, b);
        CHECK(dm.remainder < b);
        CHECK(dm.quotient * b + dm.remainder == a);
    }
}

TEST_CASE("divmod exercises the correction branches") {
    // Divisors with a saturated top limb push the quotient estimate to the
    // adjustment loop; these shapes historically trigger the add-back case.
    Natural b = (Natural(1) << 128) - Natural(1);
    Natural a = (Natural(1) << 256) - (Natural(1) << 65);
    auto dm = Natural::divmod(a, b);
    CHECK(dm.quotient * b + dm.remainder == a);
    CHECK(dm.remainder < b);

    Natural b2 = (Natural(0x8000000000000000ull) << 64) + Natural(1);
    Natural a2 = (Natural(0x7fffffffffffffffull) << 128) + (Natural(0xffffffffffffffffull) << 64);
    auto dm2 = Natural::divmod(a2, b2);
    CHECK(dm2.quotient * b2 + dm2.remainder == a2);
    CHECK(dm2.remainder < b2);
}

TEST_CASE("shifts and bit accessors") {
    Natural x = Natural::parse("0b11111011100011001101001");
    CHECK(x.bit_length() == 23);
    CHECK(x.popcount() == 14);
    CHECK(x.trailing_zeros() == 0);
    CHECK((x << 64).trailing_zeros() == 64);
    CHECK((x << 64) >> 64 == x);
    CHECK((x << 3) >> 7 == x >> 4);
    CHECK(x.bit(0));
    CHECK_FALSE(x.bit(1));
    CHECK(x.bit(22));
    CHECK_FALSE(x.bit(23));
    CHECK(x.bits_at(14, 9) == 0b111110111);
    CHECK(x.bits_at(0, 7) == 0b1101001);
    CHECK(x.bits_at(60, 64) == 0);
    CHECK(Natural().bit_length() == 0);
    CHECK(Natural(1).bit_length() == 1);
    CHECK((Natural(1) << 4096).bit_length() == 4097);
}

TEST_CASE("comparisons") {
    CHECK(Natural(2) < Natural(3));
    CHECK(Natural::parse(kB) < Natural::parse(kA));
    CHECK(Natural(5) == Natural::parse("5"));
    CHECK(Natural() < Natural(1));
    CHECK(Natural::parse(kA) <= Natural::parse(kA));
}

TEST_CASE("to_u64 and fits_u64") {
    CHECK(Natural().to_u64() == 0);
    CHECK(Natural(42).to_u64() == 42);
    CHECK_FALSE(Natural::parse(kA).fits_u64());
    CHECK_THROWS_AS(Natural::parse(kA).to_u64(), std::overflow_error);
}

TEST_CASE("modpow against frozen vectors") {
    CHECK(addchain::modpow(Natural(3), Natural(13), Natural(1000)).to_u64() == 323);
    CHECK(addchain::modpow(Natural(123456789), Natural(987654321), Natural(1000000007)).to_u64()
          == 652541198);
    CHECK(addchain::modpow(Natural(5), Natural(), Natural(7)).to_u64() == 1);
    CHECK(addchain::modpow(Natural(5), Natural(3), Natural(1)).is_zero());

    Natural b = Natural::parse(
        "9846764599347920090981630016910183428230006170102162345986609824554620368262677951096543750"
        "1155008226211086786094660987798967283582882056211194108700793759986466378616716438711107836"
        "379512033643811762984485713310862710772627635534319724540455590280501239361432574696358780"
        "805217559013804642361839237633886449");
    Natural e = Natural::parse(
        "8710774237861562695034731591605347886649030197969690456592932768251935207060244521904302"
        "42");
    Natural m = Natural::parse(
        "2054493145223260434817743235097906640312891013425548606016294472859595431066504124354261"
        "7906107348683556559870769744656943587023002193687452790506952961771198152830334198781412"
        "94361");
    Natural want = Natural::parse(
        "1616530374538622691364860015896159643445080071598433279151553065288838035968739494579387"
        "8387558132082521406964742612105321694811918214105245473843918049666578400170318880820811"
        "06719");
    CHECK(addchain::modpow(b, e, m) == want);
}

TEST_CASE("hash distinguishes values") {
    addchain::NaturalHash h;
    CHECK(h(Natural(5)) != h(Natural(6)));
    CHECK(h(Natural::parse(kA)) == h(Natural::parse(kA)));
}
