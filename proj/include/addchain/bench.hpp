#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "addchain/asa.hpp"
#include "addchain/sptm.hpp"
#include "json.hpp"

namespace addchain {

// Bit densities and operand sizes used by the stock measurement grids.
inline constexpr double kDensityGrid[] = {0.1, 0.2, 0.4, 0.5, 0.6, 0.8, 0.9};
inline constexpr std::size_t kBitLengthGrid[] = {160, 384, 512, 1024, 2048, 4096};

enum class CorpusKind { random_bits, repeated_window };

struct CorpusSpec {
    std::size_t bits = 160;
    double p = 0.5;  // probability that a non-top bit is set
    std::size_t count = 1;
    std::uint64_t seed = 1;
    CorpusKind kind = CorpusKind::random_bits;
};

namespace detail {

inline void require_corpus(const CorpusSpec& spec) {
    if (spec.bits < 2)
        throw std::invalid_argument("corpus: bit-length must be at least 2");
    if (!(spec.p > 0.0) || spec.p > 1.0)
        throw std::invalid_argument("corpus: bit density must be in (0, 1]");
    if (spec.count == 0)
        throw std::invalid_argument("corpus: count must be positive");
}

// One bit with probability p. mt19937_64 output is pinned by the standard,
// so comparing the top 53 bits of a raw draw against a fixed threshold
// keeps corpora byte-identical across platforms; distribution adapters
// would not.
class BitSource {
public:
    BitSource(std::mt19937_64& rng, double p)
        : rng_(rng),
          threshold_(p >= 1.0 ? std::uint64_t(1) << 53
                              : std::uint64_t(p * 9007199254740992.0)) {}

    bool operator()() { return (rng_() >> 11) < threshold_; }

private:
    std::mt19937_64& rng_;
    std::uint64_t threshold_;
};

// Uniform draw from [0, n) by rejection on raw mt19937_64 output.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
    std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = rng();
    while (x >= bound)
        x = rng();
    return x % n;
}

}  // namespace detail

// A random operand of the exact requested bit-length: top bit set, every
// lower bit one with probability p.
inline Natural random_operand(std::mt19937_64& rng, std::size_t bits, double p) {
    detail::BitSource bit(rng, p);
    std::string pattern = "0b1";
    pattern.reserve(bits + 2);
    for (std::size_t i = 1; i < bits; ++i)
        pattern.push_back(bit() ? '1' : '0');
    return Natural::parse(pattern);
}

// An operand made of k+1 disjoint copies of one window pattern
// w = 2^(k+s) + v. The first copy is anchored at the top of the frame, the
// rest land at random positions at pairwise distance >= k whose set bits
// collide with nothing already placed, and trailing zeros are stripped.
// Chains that fold a repeated pattern thrive on such operands.
inline Natural repeated_window_operand(std::mt19937_64& rng, std::size_t bits) {
    if (bits < 128)
        throw std::invalid_argument("repeated_window_operand: frame below 128 bits");
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::uint64_t k = 4 + detail::draw_below(rng, 3);
        std::uint64_t s = 40 + detail::draw_below(rng, 21);
        std::uint64_t v = (std::uint64_t(1) << (k - 1)) |
                          detail::draw_below(rng, std::uint64_t(1) << (k - 1));
        std::vector<std::uint64_t> offsets;  // set-bit offsets within one copy
        for (std::uint64_t b = 0; b < k; ++b)
            if (v >> b & 1)
                offsets.push_back(b);
        offsets.push_back(k + s);

        std::uint64_t top_shift = bits - 1 - (k + s);
        std::vector<bool> frame(bits, false);
        std::vector<std::uint64_t> shifts{top_shift};
        for (std::uint64_t off : offsets)
            frame[top_shift + off] = true;

        bool placed_all = true;
        for (std::uint64_t copy = 0; copy + 1 <= k && placed_all; ++copy) {
            bool placed = false;
            for (int tries = 0; tries < 64 && !placed; ++tries) {
                std::uint64_t t = detail::draw_below(rng, top_shift);
                bool fits = true;
                for (std::uint64_t other : shifts)
                    if ((t > other ? t - other : other - t) < k)
                        fits = false;
                for (std::uint64_t off : offsets)
                    if (fits && frame[t + off])
                        fits = false;
                if (!fits)
                    continue;
                for (std::uint64_t off : offsets)
                    frame[t + off] = true;
                shifts.push_back(t);
                placed = true;
            }
            placed_all = placed;
        }
        if (!placed_all)
            continue;

        std::string pattern = "0b";
        pattern.reserve(bits + 2);
        for (std::size_t i = bits; i-- > 0;)
            pattern.push_back(frame[i] ? '1' : '0');
        Natural e = Natural::parse(pattern);
        return e >> e.trailing_zeros();
    }
    throw std::runtime_error("repeated_window_operand: could not place the copies");
}

struct Corpus {
    CorpusSpec spec;
    std::vector<Natural> values;
};

inline Corpus make_corpus(const CorpusSpec& spec) {
    detail::require_corpus(spec);
    std::mt19937_64 rng(spec.seed);
    Corpus out{spec, {}};
    out.values.reserve(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i)
        out.values.push_back(spec.kind == CorpusKind::random_bits
                                 ? random_operand(rng, spec.bits, spec.p)
                                 : repeated_window_operand(rng, spec.bits));
    return out;
}

enum class ChainMethod { bm, wm, sptm, cwm, cwm_asa };

inline const char* method_name(ChainMethod method) {
    switch (method) {
        case ChainMethod::bm: return "bm";
        case ChainMethod::wm: return "wm";
        case ChainMethod::sptm: return "sptm";
        case ChainMethod::cwm: return "cwm";
        case ChainMethod::cwm_asa: return "cwm-asa";
    }
    throw std::logic_error("method_name: unknown method");
}

inline std::optional<ChainMethod> parse_method(const std::string& name) {
    for (ChainMethod m : {ChainMethod::bm, ChainMethod::wm, ChainMethod::sptm,
                          ChainMethod::cwm, ChainMethod::cwm_asa})
        if (name == method_name(m))
            return m;
    return std::nullopt;
}

struct SweepRanges {
    std::uint32_t wm_k_max = 20;
    std::uint64_t sptm_m_max = 63;
    std::uint32_t cwm_k_max = 10;
    std::uint32_t cwm_s_max = 10;
    std::uint32_t asa_k_max = 20;
    std::uint32_t asa_s_max = 20;
};

struct BenchRecord {
    std::string e_hex;
    std::size_t bits = 0;  // n(e)
    std::size_t ones = 0;  // h(e)
    std::optional<double> p;
    std::string method;
    std::optional<std::uint64_t> k, s, m;
    std::size_t elements = 0;
    std::size_t r = 0;
    std::optional<std::uint64_t> v, u;
    std::optional<std::size_t> w0_bits;
    std::optional<bool> formula_ok;
    double runtime_ms = 0.0;
};

namespace detail {

inline void record_windowed(BenchRecord& rec, const WindowedBuild& build) {
    rec.elements = build.chain.element_count();
    rec.r = build.chain.length();
    rec.v = build.map.entries.size();
    rec.u = build.precomp_count;
    rec.w0_bits = std::bit_width(build.map.w0);
    // table size + one doubling per bit above the first window + one add
    // per further window; skips, truncation, and windows nested above the
    // first all break this and get flagged rather than patched over
    std::size_t expected =
        build.precomp_count + (rec.bits - *rec.w0_bits) + (*rec.v - 1);
    rec.formula_ok = rec.elements == expected;
}

inline void require_valid_result(const AdditionChain& chain, const BenchRecord& rec) {
    ValidationReport report = validate_chain(chain);
    if (!report.ok)
        throw std::runtime_error("benchmark produced an invalid chain: method " +
                                 rec.method + ", e " + rec.e_hex + ": " + report.message);
    if (!(chain.target() == Natural::parse("0x" + rec.e_hex)))
        throw std::runtime_error("benchmark chain misses its target: method " +
                                 rec.method + ", e " + rec.e_hex);
}

}  // namespace detail

// The best result of one method over its parameter range for one operand.
// The winning chain is rebuilt and validated before it is recorded.
inline BenchRecord bench_one(const Natural& e, ChainMethod method,
                             const SweepRanges& ranges, bool timings = false) {
    BitProfile profile = bit_profile(e);
    BenchRecord rec;
    rec.e_hex = e.to_hex();
    rec.bits = profile.n;
    rec.ones = profile.h;
    rec.method = method_name(method);

    auto started = std::chrono::steady_clock::now();
    AdditionChain winner;
    switch (method) {
        case ChainMethod::bm: {
            winner = bm(e);
            break;
        }
        case ChainMethod::wm: {
            std::uint32_t best_k = 1;
            std::size_t best = SIZE_MAX;
            for (std::uint32_t k = 1; k <= ranges.wm_k_max; ++k) {
                std::size_t count = wm_element_count(k, e);
                if (count < best) {
                    best = count;
                    best_k = k;
                }
            }
            WindowedBuild build = wm(best_k, e);
            if (build.chain.element_count() != best)
                throw std::logic_error("wm: count formula disagrees with the built chain");
            detail::record_windowed(rec, build);
            rec.k = best_k;
            winner = std::move(build.chain);
            break;
        }
        case ChainMethod::sptm: {
            SptmResult result = sptm_best(e, ranges.sptm_m_max);
            rec.m = result.m;
            winner = std::move(result.chain);
            break;
        }
        case ChainMethod::cwm: {
            CwmChoice choice = cwm_best(e, ranges.cwm_k_max, ranges.cwm_s_max);
            detail::record_windowed(rec, choice.build);
            rec.k = choice.k;
            rec.s = choice.s;
            winner = std::move(choice.build.chain);
            break;
        }
        case ChainMethod::cwm_asa: {
            CwmAsaChoice choice = cwm_asa_best(e, ranges.asa_k_max, ranges.asa_s_max);
            detail::record_windowed(rec, choice.result.build);
            rec.k = choice.k;
            rec.s = choice.s;
            winner = std::move(choice.result.build.chain);
            break;
        }
    }
    double elapsed = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();

    rec.elements = winner.element_count();
    rec.r = winner.length();
    detail::require_valid_result(winner, rec);
    rec.runtime_ms = timings ? elapsed : 0.0;
    return rec;
}

struct SweepOptions {
    SweepRanges ranges{};
    std::vector<ChainMethod> methods{ChainMethod::wm, ChainMethod::sptm,
                                     ChainMethod::cwm, ChainMethod::cwm_asa};
    bool timings = false;
    unsigned threads = 1;  // 0 picks the hardware concurrency
};

namespace detail {

// Run fn(i) for i in [0, total) across a fixed number of threads. Results
// must be written to pre-sized slots so the merge is order-independent.
template <typename Fn>
void parallel_for(std::size_t total, unsigned threads, Fn&& fn) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        for (std::size_t i = 0; i < total; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    std::exception_ptr failure;
    std::mutex failure_gate;
    for (unsigned t = 0; t < threads; ++t)
        workers.emplace_back([&, t] {
            try {
                for (std::size_t i = total * t / threads; i < total * (t + 1) / threads; ++i)
                    fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> hold(failure_gate);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    for (std::thread& worker : workers)
        worker.join();
    if (failure)
        std::rethrow_exception(failure);
}

}  // namespace detail

// Best-over-range records for every (operand, method) cell of a corpus.
inline std::vector<BenchRecord> run_sweep(const Corpus& corpus, const SweepOptions& options) {
    std::vector<BenchRecord> records(corpus.values.size() * options.methods.size());
    detail::parallel_for(corpus.values.size(), options.threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < options.methods.size(); ++j) {
            BenchRecord rec =
                bench_one(corpus.values[i], options.methods[j], options.ranges, options.timings);
            if (corpus.spec.kind == CorpusKind::random_bits)
                rec.p = corpus.spec.p;
            records[i * options.methods.size() + j] = std::move(rec);
        }
    });
    return records;
}

// How much shorter the comparison mean is than the baseline mean, as a
// percentage of the baseline.
inline double optimization_degree(double baseline_mean, double comparison_mean) {
    if (!(baseline_mean > 0.0))
        throw std::domain_error("optimization_degree: baseline mean must be positive");
    return (baseline_mean - comparison_mean) / baseline_mean * 100.0;
}

// Mean chain length over the records produced by one method.
inline double mean_length(const std::vector<BenchRecord>& records, ChainMethod method) {
    const char* name = method_name(method);
    double sum = 0.0;
    std::size_t count = 0;
    for (const BenchRecord& rec : records)
        if (rec.method == name) {
            sum += double(rec.r);
            ++count;
        }
    if (count == 0)
        throw std::domain_error(std::string("mean_length: no records for ") + name);
    return sum / double(count);
}

namespace detail {

inline std::string format_density(double p) {
    std::ostringstream out;
    out << p;
    return out.str();
}

inline std::string format_ms(double ms) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.3f", ms);
    return buffer;
}

inline bool record_order(const BenchRecord& a, const BenchRecord& b) {
    auto key = [](const BenchRecord& rec) {
        return std::make_tuple(rec.bits, rec.p.value_or(-1.0), rec.e_hex.size(),
                               std::ref(rec.e_hex), std::ref(rec.method));
    };
    return key(a) < key(b);
}

}  // namespace detail

// One row per record, stable (bits, p, e, method) order, empty cells where
// a column does not apply to the method.
inline void write_records_csv(std::ostream& out, std::vector<BenchRecord> records) {
    std::sort(records.begin(), records.end(), detail::record_order);
    out << "e_hex,bits,p,method,k,s,m,elements,r,v,u,w0_bits,formula_ok,runtime_ms\n";
    auto cell = [](const auto& maybe, auto&& show) {
        return maybe ? show(*maybe) : std::string();
    };
    auto plain = [](auto value) { return std::to_string(value); };
    for (const BenchRecord& rec : records) {
        out << rec.e_hex << ',' << rec.bits << ','
            << cell(rec.p, detail::format_density) << ',' << rec.method << ','
            << cell(rec.k, plain) << ',' << cell(rec.s, plain) << ','
            << cell(rec.m, plain) << ',' << rec.elements << ',' << rec.r << ','
            << cell(rec.v, plain) << ',' << cell(rec.u, plain) << ','
            << cell(rec.w0_bits, plain) << ','
            << cell(rec.formula_ok, [](bool ok) { return std::string(ok ? "true" : "false"); })
            << ',' << detail::format_ms(rec.runtime_ms) << '\n';
    }
}

// JSON mirror of the CSV rows plus aggregate means and, when a baseline is
// present, optimization degrees of every other method against it.
inline void write_report_json(std::ostream& out, std::vector<BenchRecord> records) {
    std::sort(records.begin(), records.end(), detail::record_order);
    nlohmann::json rows = nlohmann::json::array();
    for (const BenchRecord& rec : records) {
        nlohmann::json row{{"e_hex", rec.e_hex}, {"bits", rec.bits},   {"h", rec.ones},
                           {"method", rec.method}, {"elements", rec.elements}, {"r", rec.r},
                           {"runtime_ms", rec.runtime_ms}};
        if (rec.p)
            row["p"] = *rec.p;
        if (rec.k)
            row["k"] = *rec.k;
        if (rec.s)
            row["s"] = *rec.s;
        if (rec.m)
            row["m"] = *rec.m;
        if (rec.v)
            row["v"] = *rec.v;
        if (rec.u)
            row["u"] = *rec.u;
        if (rec.w0_bits)
            row["w0_bits"] = *rec.w0_bits;
        if (rec.formula_ok)
            row["formula_ok"] = *rec.formula_ok;
        rows.push_back(std::move(row));
    }

    std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> by_bits, by_p;
    for (const BenchRecord& rec : records) {
        auto& bits_cell = by_bits[std::to_string(rec.bits)][rec.method];
        bits_cell.first += double(rec.r);
        bits_cell.second += 1;
        if (rec.p) {
            auto& p_cell = by_p[detail::format_density(*rec.p)][rec.method];
            p_cell.first += double(rec.r);
            p_cell.second += 1;
        }
    }
    auto means = [](const auto& groups) {
        nlohmann::json out_means = nlohmann::json::object();
        for (const auto& [group, methods] : groups) {
            nlohmann::json cell = nlohmann::json::object();
            for (const auto& [method, acc] : methods)
                cell[method] = acc.first / double(acc.second);
            out_means[group] = std::move(cell);
        }
        return out_means;
    };
    nlohmann::json degrees = nlohmann::json::object();
    for (const auto& [group, methods] : by_bits) {
        auto baseline = methods.find(method_name(ChainMethod::wm));
        if (baseline == methods.end())
            continue;
        double wm_mean = baseline->second.first / double(baseline->second.second);
        nlohmann::json cell = nlohmann::json::object();
        for (const auto& [method, acc] : methods)
            if (method != baseline->first)
                cell[method] = optimization_degree(wm_mean, acc.first / double(acc.second));
        if (!cell.empty())
            degrees[group] = std::move(cell);
    }

    nlohmann::json report{{"records", std::move(rows)},
                          {"summary",
                           {{"mean_r_by_bits", means(by_bits)},
                            {"mean_r_by_p", means(by_p)},
                            {"optimization_degree_vs_wm_by_bits", std::move(degrees)}}}};
    out << report.dump(2) << '\n';
}

}  // namespace addchain
