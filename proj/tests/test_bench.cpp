#include <sstream>
#include <vector>

#include "addchain/bench.hpp"
#include "catch2/catch_amalgamated.hpp"
#include "json.hpp"

using addchain::BenchRecord;
using addchain::ChainMethod;
using addchain::Corpus;
using addchain::CorpusKind;
using addchain::CorpusSpec;
using addchain::Natural;

TEST_CASE("random operands are exact-width and reproducible") {
    CorpusSpec spec{160, 0.5, 8, 42, CorpusKind::random_bits};
    Corpus first = addchain::make_corpus(spec);
    Corpus second = addchain::make_corpus(spec);
    REQUIRE(first.values.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(first.values[i].bit_length() == 160);
        CHECK(first.values[i] == second.values[i]);
    }
    CorpusSpec other = spec;
    other.seed = 43;
    CHECK(addchain::make_corpus(other).values[0] != first.values[0]);
}

TEST_CASE("density one saturates every bit") {
    std::mt19937_64 rng(7);
    CHECK(addchain::random_operand(rng, 8, 1.0) == Natural(255));
    CHECK(addchain::random_operand(rng, 64, 1.0) == Natural(UINT64_MAX));
}

TEST_CASE("mean weight of a dense corpus tracks its density") {
    CorpusSpec spec{160, 0.95, 50, 2024, CorpusKind::random_bits};
    Corpus corpus = addchain::make_corpus(spec);
    double total = 0;
    for (const Natural& e : corpus.values)
        total += double(e.popcount());
    double mean = total / 50.0;
    // binomial: sd of the mean = sqrt(160 * 0.95 * 0.05 / 50) ~ 0.39
    CHECK(mean > 160.0 * 0.95 - 3.0 * 0.39);
    CHECK(mean < 160.0 * 0.95 + 3.0 * 0.39 + 1.0);  // +1 for the forced top bit
}

TEST_CASE("repeated-window operands expose a foldable pattern") {
    CorpusSpec spec{160, 0.5, 12, 99, CorpusKind::repeated_window};
    Corpus corpus = addchain::make_corpus(spec);
    Corpus again = addchain::make_corpus(spec);
    for (std::size_t i = 0; i < corpus.values.size(); ++i) {
        const Natural& e = corpus.values[i];
        CHECK(e == again.values[i]);
        CHECK(e.bit_length() <= 160);
        CHECK(e.trailing_zeros() == 0);
        // the weight is copies * h(window) with 5..7 disjoint copies
        std::size_t h = e.popcount();
        CHECK((h % 5 == 0 || h % 6 == 0 || h % 7 == 0));
    }
}

TEST_CASE("corpus parameter validation") {
    CHECK_THROWS_AS(addchain::make_corpus({1, 0.5, 1, 1, CorpusKind::random_bits}),
                    std::invalid_argument);
    CHECK_THROWS_AS(addchain::make_corpus({160, 0.0, 1, 1, CorpusKind::random_bits}),
                    std::invalid_argument);
    CHECK_THROWS_AS(addchain::make_corpus({160, 1.5, 1, 1, CorpusKind::random_bits}),
                    std::invalid_argument);
    CHECK_THROWS_AS(addchain::make_corpus({160, 0.5, 0, 1, CorpusKind::random_bits}),
                    std::invalid_argument);
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(addchain::repeated_window_operand(rng, 96), std::invalid_argument);
}

TEST_CASE("single-method records match the underlying builders") {
    Natural e = Natural::parse("0b11111011100011001101001");
    addchain::SweepRanges ranges;

    BenchRecord bm_rec = addchain::bench_one(e, ChainMethod::bm, ranges);
    CHECK(bm_rec.method == "bm");
    CHECK(bm_rec.bits == 23);
    CHECK(bm_rec.ones == 14);
    CHECK(bm_rec.elements == 23 + 14 - 1);
    CHECK(bm_rec.r == bm_rec.elements - 1);
    CHECK_FALSE(bm_rec.k);
    CHECK_FALSE(bm_rec.v);
    CHECK_FALSE(bm_rec.formula_ok);
    CHECK(bm_rec.runtime_ms == 0.0);

    BenchRecord wm_rec = addchain::bench_one(e, ChainMethod::wm, ranges);
    std::size_t best = SIZE_MAX;
    std::uint32_t best_k = 0;
    for (std::uint32_t k = 1; k <= ranges.wm_k_max; ++k) {
        std::size_t count = addchain::wm_element_count(k, e);
        if (count < best) {
            best = count;
            best_k = k;
        }
    }
    CHECK(wm_rec.k == best_k);
    CHECK(wm_rec.elements == best);
    REQUIRE(wm_rec.v);
    REQUIRE(wm_rec.u);
    REQUIRE(wm_rec.w0_bits);

    BenchRecord sptm_rec = addchain::bench_one(e, ChainMethod::sptm, ranges);
    addchain::SptmResult sptm_ref = addchain::sptm_best(e, ranges.sptm_m_max);
    CHECK(sptm_rec.m == sptm_ref.m);
    CHECK(sptm_rec.elements == sptm_ref.chain.element_count());

    BenchRecord cwm_rec = addchain::bench_one(e, ChainMethod::cwm, ranges);
    addchain::CwmChoice cwm_ref = addchain::cwm_best(e, ranges.cwm_k_max, ranges.cwm_s_max);
    CHECK(cwm_rec.k == cwm_ref.k);
    CHECK(cwm_rec.s == cwm_ref.s);
    CHECK(cwm_rec.elements == cwm_ref.build.chain.element_count());

    BenchRecord asa_rec = addchain::bench_one(e, ChainMethod::cwm_asa, ranges);
    addchain::CwmAsaChoice asa_ref =
        addchain::cwm_asa_best(e, ranges.asa_k_max, ranges.asa_s_max);
    CHECK(asa_rec.k == asa_ref.k);
    CHECK(asa_rec.s == asa_ref.s);
    CHECK(asa_rec.elements == asa_ref.result.build.chain.element_count());
    CHECK(asa_rec.elements <= cwm_rec.elements);
}

TEST_CASE("window count formula holds when nothing collides") {
    // wide leading window, no truncation: the closed form is exact
    Natural e = Natural::parse("0b11111011100011001101001");
    BenchRecord rec = addchain::bench_one(e, ChainMethod::wm, addchain::SweepRanges{});
    REQUIRE(rec.formula_ok);
    CHECK(*rec.formula_ok);
    CHECK(rec.elements == *rec.u + (rec.bits - *rec.w0_bits) + (*rec.v - 1));
}

TEST_CASE("sweep records obey the cross-method bounds") {
    CorpusSpec spec{96, 0.5, 6, 7, CorpusKind::random_bits};
    Corpus corpus = addchain::make_corpus(spec);
    addchain::SweepOptions options;
    options.methods = {ChainMethod::bm, ChainMethod::wm, ChainMethod::sptm, ChainMethod::cwm,
                       ChainMethod::cwm_asa};
    std::vector<BenchRecord> records = addchain::run_sweep(corpus, options);
    REQUIRE(records.size() == 30);
    for (std::size_t i = 0; i < corpus.values.size(); ++i) {
        const BenchRecord* by_method[5] = {};
        for (std::size_t j = 0; j < 5; ++j)
            by_method[j] = &records[i * 5 + j];
        std::size_t bm_r = by_method[0]->r;
        for (const BenchRecord* rec : by_method) {
            CHECK(rec->p == 0.5);
            CHECK(rec->r == rec->elements - 1);
            CHECK(rec->r <= bm_r);
            CHECK(rec->runtime_ms == 0.0);
        }
        CHECK(by_method[4]->r <= by_method[3]->r);  // substitution never hurts
    }
}

TEST_CASE("sweeps merge deterministically across thread counts") {
    CorpusSpec spec{64, 0.6, 10, 11, CorpusKind::random_bits};
    Corpus corpus = addchain::make_corpus(spec);
    addchain::SweepOptions serial;
    serial.threads = 1;
    addchain::SweepOptions wide;
    wide.threads = 4;
    std::ostringstream a, b;
    addchain::write_records_csv(a, addchain::run_sweep(corpus, serial));
    addchain::write_records_csv(b, addchain::run_sweep(corpus, wide));
    CHECK(a.str() == b.str());
}

TEST_CASE("optimization degree") {
    CHECK_THAT(addchain::optimization_degree(202.06, 182.84),
               Catch::Matchers::WithinAbs(9.51, 0.005));
    CHECK_THAT(addchain::optimization_degree(192.37, 187.89),
               Catch::Matchers::WithinAbs(2.33, 0.005));
    CHECK(addchain::optimization_degree(5.0, 5.0) == 0.0);
    CHECK_THROWS_AS(addchain::optimization_degree(0.0, 1.0), std::domain_error);
}

TEST_CASE("mean length aggregates one method's records") {
    BenchRecord a;
    a.method = "wm";
    a.r = 10;
    BenchRecord b;
    b.method = "wm";
    b.r = 20;
    BenchRecord c;
    c.method = "cwm";
    c.r = 12;
    std::vector<BenchRecord> records{a, b, c};
    CHECK(addchain::mean_length(records, ChainMethod::wm) == 15.0);
    CHECK(addchain::mean_length(records, ChainMethod::cwm) == 12.0);
    CHECK_THROWS_AS(addchain::mean_length(records, ChainMethod::sptm), std::domain_error);
}

TEST_CASE("record rows come out sorted and exactly shaped") {
    BenchRecord windowed;
    windowed.e_hex = "ff";
    windowed.bits = 8;
    windowed.ones = 8;
    windowed.p = 0.5;
    windowed.method = "wm";
    windowed.k = 3;
    windowed.elements = 11;
    windowed.r = 10;
    windowed.v = 2;
    windowed.u = 5;
    windowed.w0_bits = 3;
    windowed.formula_ok = true;

    BenchRecord plain;
    plain.e_hex = "b";
    plain.bits = 4;
    plain.ones = 3;
    plain.method = "bm";
    plain.elements = 6;
    plain.r = 5;

    std::ostringstream out;
    addchain::write_records_csv(out, {windowed, plain});  // unsorted on purpose
    CHECK(out.str() ==
          "e_hex,bits,p,method,k,s,m,elements,r,v,u,w0_bits,formula_ok,runtime_ms\n"
          "b,4,,bm,,,,6,5,,,,,0.000\n"
          "ff,8,0.5,wm,3,,,11,10,2,5,3,true,0.000\n");

    std::ostringstream empty;
    addchain::write_records_csv(empty, {});
    CHECK(empty.str() ==
          "e_hex,bits,p,method,k,s,m,elements,r,v,u,w0_bits,formula_ok,runtime_ms\n");
}

TEST_CASE("json report mirrors the rows and aggregates them") {
    BenchRecord a;
    a.e_hex = "a1";
    a.bits = 160;
    a.ones = 80;
    a.p = 0.5;
    a.method = "wm";
    a.elements = 11;
    a.r = 10;
    BenchRecord b = a;
    b.e_hex = "a3";
    b.r = 20;
    b.elements = 21;
    BenchRecord c = a;
    c.e_hex = "a5";
    c.method = "cwm";
    c.r = 12;
    c.elements = 13;

    std::ostringstream out;
    addchain::write_report_json(out, {a, b, c});
    nlohmann::json report = nlohmann::json::parse(out.str());
    REQUIRE(report["records"].size() == 3);
    CHECK(report["records"][0]["e_hex"] == "a1");
    CHECK(report["summary"]["mean_r_by_bits"]["160"]["wm"] == 15.0);
    CHECK(report["summary"]["mean_r_by_p"]["0.5"]["cwm"] == 12.0);
    CHECK_THAT(double(report["summary"]["optimization_degree_vs_wm_by_bits"]["160"]["cwm"]),
               Catch::Matchers::WithinAbs(20.0, 1e-9));
}

TEST_CASE("small dense corpus shows the expected ordering") {
    CorpusSpec spec{160, 0.9, 10, 31, CorpusKind::random_bits};
    Corpus corpus = addchain::make_corpus(spec);
    std::vector<BenchRecord> records = addchain::run_sweep(corpus, addchain::SweepOptions{});
    double wm = addchain::mean_length(records, ChainMethod::wm);
    double cwm = addchain::mean_length(records, ChainMethod::cwm);
    double asa = addchain::mean_length(records, ChainMethod::cwm_asa);
    CHECK(cwm <= wm);
    CHECK(asa < wm);
}

TEST_CASE("repeated-window corpus favors the folding method") {
    CorpusSpec spec{160, 0.5, 10, 57, CorpusKind::repeated_window};
    Corpus corpus = addchain::make_corpus(spec);
    std::vector<BenchRecord> records = addchain::run_sweep(corpus, addchain::SweepOptions{});
    double sptm = addchain::mean_length(records, ChainMethod::sptm);
    CHECK(sptm < addchain::mean_length(records, ChainMethod::wm));
    CHECK(sptm < addchain::mean_length(records, ChainMethod::cwm));
    CHECK(sptm < addchain::mean_length(records, ChainMethod::cwm_asa));
}
