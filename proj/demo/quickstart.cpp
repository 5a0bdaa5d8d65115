// A tour of the library: build a chain for one exponent with every
// method, compare lengths against the exact minimum, and use the best
// chain to perform a modular exponentiation.

#include <cinttypes>
#include <cstdio>
#include <string>

#include "addchain/asa.hpp"
#include "addchain/bench.hpp"
#include "addchain/classic.hpp"
#include "addchain/cwm.hpp"
#include "addchain/oracle.hpp"
#include "addchain/sptm.hpp"

using namespace addchain;

int main() {
    Natural e = Natural::parse("0b11111011100011001101001");
    std::printf("e = %s (%zu bits, %zu ones)\n\n", e.to_string().c_str(), e.bit_length(),
                e.popcount());

    // fixed-parameter builds
    AdditionChain binary = bm(e);
    AdditionChain fold = bm_star(e);
    WindowedBuild window = wm(4, e);
    WindowedBuild composite = cwm(6, 3, e);
    CwmAsaBuild substituted = cwm_asa(6, 3, e);
    SptmResult pattern = sptm(5, e);
    std::printf("bm            r = %zu\n", binary.length());
    std::printf("bm-star       r = %zu\n", fold.length());
    std::printf("wm k=4        r = %zu\n", window.chain.length());
    std::printf("cwm k=6 s=3   r = %zu (%zu windows)\n", composite.chain.length(),
                composite.map.v());
    std::printf("cwm-asa k=6 s=3  r = %zu (sequence %s)\n", substituted.build.chain.length(),
                substituted.substituted ? "substituted" : "kept");
    std::printf("sptm m=5      r = %zu\n\n", pattern.chain.length());

    // parameter searches over the default ranges
    CwmAsaChoice best = cwm_asa_best(e, 20, 20);
    std::printf("best cwm-asa: k=%u s=%u r=%zu\n", best.k, best.s,
                best.result.build.chain.length());

    // exact search handles targets up to 2^20
    std::uint64_t small = 9999;
    std::printf("l(%" PRIu64 ") = %zu exactly; cwm-asa best reaches %zu\n\n", small,
                shortest_length(small),
                cwm_asa_best(Natural(small), 20, 20).result.build.chain.length());

    // every chain drives the same modular exponentiation
    Natural base(3), modulus(1000000007);
    Natural out = exponentiate_with_chain(base, best.result.build.chain, modulus);
    std::printf("3^e mod 1000000007 = %s\n", out.to_string().c_str());
    std::printf("square-and-multiply agrees: %s\n",
                out == modpow(base, e, modulus) ? "yes" : "no");

    // a seeded corpus and a one-line benchmark record
    Corpus corpus = make_corpus({160, 0.5, 1, 42, CorpusKind::random_bits});
    BenchRecord record = bench_one(corpus.values[0], ChainMethod::cwm_asa, SweepRanges{});
    std::printf("\n160-bit sample via cwm-asa: k=%zu s=%zu r=%zu elements=%zu\n",
                *record.k, *record.s, record.r, record.elements);
    return 0;
}
