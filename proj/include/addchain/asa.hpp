#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "addchain/cwm.hpp"
#include "addchain/window_map.hpp"

namespace addchain {

// A sorted addition sequence: like a chain, but built to pass through a
// whole set of targets rather than to end at one value.
struct AdditionSequence {
    std::vector<std::uint64_t> values;  // ascending, starts 1, 2
    std::vector<ChainStep> steps;

    std::size_t count() const { return values.size(); }

    detail::PrefixBlock block() const { return {values, steps}; }

    AdditionChain to_chain() const {
        std::vector<Natural> elements;
        elements.reserve(values.size());
        for (std::uint64_t v : values)
            elements.emplace_back(v);
        return AdditionChain(std::move(elements), steps);
    }
};

namespace detail {

// bm over a 64-bit value together with the addend values of every element
// after the leading 1.
struct SmallChain {
    std::vector<std::uint64_t> values;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> parents;
};

inline SmallChain bm_small(std::uint64_t e) {
    SmallChain out;
    out.values.push_back(1);
    std::uint64_t acc = 1;
    for (int bit = std::bit_width(e) - 1; bit-- > 0;) {
        out.parents.emplace_back(acc, acc);
        out.values.push_back(acc *= 2);
        if (e >> bit & 1) {
            out.parents.emplace_back(acc, 1);
            out.values.push_back(acc += 1);
        }
    }
    return out;
}

}  // namespace detail

// Builds one sequence through all targets. Walking down from the largest
// element, each value cur is rewritten over its closest smaller neighbour x
// as cur = t*x + C; the multiples of x that bm would use to reach t*x are
// inserted, plus the remainder C. Every element above 2 is eventually
// visited, so every element gets a supporting pair.
inline AdditionSequence asa(const std::vector<std::uint64_t>& targets) {
    std::set<std::uint64_t> pool{1, 2};
    for (std::uint64_t t : targets) {
        if (t == 0)
            throw std::domain_error("asa: targets must be positive");
        if (t > (std::uint64_t(1) << 62))
            throw std::domain_error("asa: target too large");
        pool.insert(t);
    }

    std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> parents;
    std::uint64_t cur = *pool.rbegin();
    while (cur > 2) {
        std::uint64_t x = *std::prev(pool.find(cur));
        std::uint64_t t = cur / x;
        std::uint64_t c = cur % x;
        detail::SmallChain pattern = detail::bm_small(t);
        for (std::size_t i = 1; i < pattern.values.size(); ++i) {
            std::uint64_t scaled = pattern.values[i] * x;
            if (pool.insert(scaled).second)
                parents[scaled] = {pattern.parents[i - 1].first * x,
                                   pattern.parents[i - 1].second * x};
        }
        if (c > 0) {
            pool.insert(c);
            parents[cur] = {cur - c, c};
        } else {
            parents[cur] = {pattern.parents.back().first * x,
                            pattern.parents.back().second * x};
        }
        cur = *std::prev(pool.find(cur));
    }

    AdditionSequence out;
    out.values.assign(pool.begin(), pool.end());
    out.steps.reserve(out.values.size() - 1);
    std::unordered_map<std::uint64_t, std::uint32_t> index = detail::value_index(out.values);
    for (std::size_t i = 1; i < out.values.size(); ++i) {
        if (out.values[i] == 2) {
            out.steps.push_back({0, 0});
            continue;
        }
        auto [a, b] = parents.at(out.values[i]);
        out.steps.push_back({index.at(a), index.at(b)});
    }
    return out;
}

// cwm with the precomputed table replaced by an addition sequence through
// the window values whenever that sequence is strictly smaller. Ties keep
// the default table.
struct CwmAsaBuild {
    WindowedBuild build;
    bool substituted = false;
    std::size_t default_table_count = 0;
};

namespace detail {

inline std::vector<std::uint64_t> window_targets(const WindowMap& map) {
    std::set<std::uint64_t> distinct;
    for (const auto& [pos, w] : map.entries)
        distinct.insert(w);
    return {distinct.begin(), distinct.end()};
}

}  // namespace detail

inline CwmAsaBuild cwm_asa(std::uint32_t k, std::uint32_t s, const Natural& e) {
    detail::require_cwm_params(k, s, "cwm_asa");
    require_positive(e, "cwm_asa");
    detail::CwmShape shape = detail::cwm_shape(k, s);
    WindowMap map = detail::cwm_extract(e, shape);
    AdditionSequence seq = asa(detail::window_targets(map));

    CwmAsaBuild out;
    out.default_table_count = shape.count;
    out.substituted = seq.count() < shape.count;
    if (out.substituted) {
        out.build = detail::assemble_windowed(seq.block(), std::move(map), e);
    } else {
        CwmPrecomputation table = cwm_precompute(k, s);
        out.build = detail::assemble_windowed(table.block(), std::move(map), e);
    }
    return out;
}

// Chain element count cwm_asa(k, s, e) would produce, without building it.
inline std::size_t cwm_asa_element_count(std::uint32_t k, std::uint32_t s, const Natural& e) {
    detail::require_cwm_params(k, s, "cwm_asa_element_count");
    require_positive(e, "cwm_asa_element_count");
    detail::CwmShape shape = detail::cwm_shape(k, s);
    WindowMap map = detail::cwm_extract(e, shape);
    AdditionSequence seq = asa(detail::window_targets(map));
    if (seq.count() >= shape.count)
        return cwm_element_count(k, s, e);

    auto member = [&seq](std::uint64_t v) {
        return std::binary_search(seq.values.begin(), seq.values.end(), v);
    };
    if (e.fits_u64() && member(e.to_u64())) {
        auto at = std::lower_bound(seq.values.begin(), seq.values.end(), e.to_u64());
        return static_cast<std::size_t>(at - seq.values.begin()) + 1;
    }
    std::size_t skips = detail::count_skips(map, member, seq.values.back());
    return seq.count() + map.top_position() + map.v() - 1 - skips;
}

struct CwmAsaChoice {
    std::uint32_t k = 0;
    std::uint32_t s = 0;
    CwmAsaBuild result;
};

// Best (k, s) by element count; ties go to the smaller k, then s.
inline CwmAsaChoice cwm_asa_best(const Natural& e, std::uint32_t k_max, std::uint32_t s_max) {
    detail::require_cwm_params(k_max, s_max, "cwm_asa_best");
    require_positive(e, "cwm_asa_best");
    std::uint32_t best_k = 1, best_s = 0;
    std::size_t best = SIZE_MAX;
    for (std::uint32_t k = 1; k <= k_max; ++k)
        for (std::uint32_t s = 0; s <= s_max; ++s) {
            std::size_t count = cwm_asa_element_count(k, s, e);
            if (count < best) {
                best = count;
                best_k = k;
                best_s = s;
            }
        }
    CwmAsaChoice choice{best_k, best_s, cwm_asa(best_k, best_s, e)};
    if (choice.result.build.chain.element_count() != best)
        throw std::logic_error("cwm_asa_best: count path disagrees with the built chain");
    return choice;
}

}  // namespace addchain
