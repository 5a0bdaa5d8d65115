#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "addchain/chain.hpp"
#include "addchain/natural.hpp"
#include "addchain/window_map.hpp"

namespace addchain {

// Every method in this header treats e = 0 as a domain error; chains reach
// down to 1, so there is nothing to build for zero.

inline void require_positive(const Natural& e, const char* who) {
    if (e.is_zero())
        throw std::domain_error(std::string(who) + ": target must be positive");
}

// Additions used by the binary methods: one doubling per digit after the
// first plus one addition per one-bit after the first.
inline std::size_t bm_length(const Natural& e) {
    require_positive(e, "bm_length");
    return e.bit_length() + e.popcount() - 2;
}

// Binary method, most significant bit first: double for every remaining
// digit and add 1 whenever that digit is set.
inline AdditionChain bm(const Natural& e) {
    require_positive(e, "bm");
    AdditionChain chain = AdditionChain::unit();
    chain.reserve(bm_length(e) + 1);
    std::uint32_t acc = 0;
    for (std::size_t bit = e.bit_length() - 1; bit-- > 0;) {
        acc = chain.push(chain.elements()[acc] + chain.elements()[acc], acc, acc);
        if (e.bit(bit))
            acc = chain.push(chain.elements()[acc] + Natural(1), acc, 0);
    }
    return chain;
}

// Factor method ordering of the same additions: raise all powers of two
// first, then fold the set bits in from the top down.
inline AdditionChain bm_star(const Natural& e) {
    require_positive(e, "bm_star");
    AdditionChain chain = AdditionChain::unit();
    std::size_t n = e.bit_length();
    chain.reserve(bm_length(e) + 1);
    for (std::uint32_t i = 1; i < n; ++i)
        chain.push(chain.elements()[i - 1] + chain.elements()[i - 1], i - 1, i - 1);
    std::uint32_t acc = static_cast<std::uint32_t>(n - 1);
    for (std::size_t bit = n - 1; bit-- > 0;) {
        if (e.bit(bit))
            acc = chain.push(chain.elements()[acc] + chain.elements()[bit], acc,
                             static_cast<std::uint32_t>(bit));
    }
    return chain;
}

// The bm chain for t with every element multiplied by x: the segment that
// grows an existing chain element x to t*x using bm(t)'s step pattern.
inline std::vector<Natural> bm_scaled(const Natural& x, const Natural& t) {
    require_positive(x, "bm_scaled");
    require_positive(t, "bm_scaled");
    AdditionChain pattern = bm(t);
    std::vector<Natural> out;
    out.reserve(pattern.element_count());
    for (const Natural& v : pattern.elements())
        out.push_back(v * x);
    return out;
}

namespace detail {

// bm over a 64-bit value, values only. Kept separate from bm so the two can
// cross-check each other and so 64-bit callers avoid big-integer traffic.
inline std::vector<std::uint64_t> bm_values_u64(std::uint64_t e) {
    if (e == 0)
        throw std::domain_error("bm_values_u64: target must be positive");
    std::vector<std::uint64_t> out{1};
    std::uint64_t acc = 1;
    for (int bit = std::bit_width(e) - 1; bit-- > 0;) {
        out.push_back(acc *= 2);
        if (e >> bit & 1)
            out.push_back(acc += 1);
    }
    return out;
}

inline void require_window_width(std::uint32_t k, const char* who) {
    if (k == 0 || k > 30)
        throw std::invalid_argument(std::string(who) + ": window width must be in [1, 30]");
}

// 1, 2 and the odd values below 2^k, each value two more than the last.
inline detail::PrefixBlock wm_precompute(std::uint32_t k, std::vector<std::uint64_t>& values,
                                         std::vector<ChainStep>& steps) {
    values = {1, 2};
    steps = {{0, 0}};
    for (std::uint64_t odd = 3; odd < (std::uint64_t(1) << k); odd += 2) {
        std::uint32_t prev = static_cast<std::uint32_t>(values.size() - 1);
        values.push_back(odd);
        steps.push_back(odd == 3 ? ChainStep{1, 0} : ChainStep{prev, 1});
    }
    return {values, steps};
}

inline std::size_t wm_precompute_count(std::uint32_t k) {
    return k == 1 ? 2 : (std::size_t(1) << (k - 1)) + 1;
}

inline bool wm_member(std::uint64_t value, std::uint32_t k) {
    if (value == 1 || value == 2)
        return true;
    return value % 2 == 1 && value < (std::uint64_t(1) << k);
}

// Greedy scan from the most significant bit: each window is the widest run
// of at most k bits that ends in a set bit, taken whole.
inline WindowMap wm_extract(const Natural& e, std::uint32_t k) {
    WindowMap map;
    Residue residue(e);
    std::optional<std::size_t> top = e.bit_length() - 1;
    while (top) {
        std::size_t j = residue.anchor(*top, k);
        std::uint64_t w = residue.bits_at(j, *top - j + 1);
        if (map.w0 == 0)
            map.w0 = w;
        map.entries.emplace(j, w);
        residue.clear(w, j);
        if (*top == 0)
            break;
        top = residue.top_bit(*top - 1);
    }
    return map;
}

}  // namespace detail

// Window method: precompute the odd values below 2^k, split e into windows
// of at most k bits, then rebuild e with one doubling per offset step and
// one addition per extra window.
inline WindowedBuild wm(std::uint32_t k, const Natural& e) {
    detail::require_window_width(k, "wm");
    require_positive(e, "wm");
    std::vector<std::uint64_t> values;
    std::vector<ChainStep> steps;
    detail::PrefixBlock prefix = detail::wm_precompute(k, values, steps);
    return detail::assemble_windowed(prefix, detail::wm_extract(e, k), e);
}

// Chain element count wm(k, e) would produce, without building the chain.
inline std::size_t wm_element_count(std::uint32_t k, const Natural& e) {
    detail::require_window_width(k, "wm_element_count");
    require_positive(e, "wm_element_count");
    if (e.fits_u64() && detail::wm_member(e.to_u64(), k)) {
        std::uint64_t v = e.to_u64();
        return v <= 2 ? v : (v - 3) / 2 + 3;
    }
    WindowMap map = detail::wm_extract(e, k);
    std::uint64_t prefix_max = k == 1 ? 2 : (std::uint64_t(1) << k) - 1;
    std::size_t skips = detail::count_skips(
        map, [k](std::uint64_t v) { return detail::wm_member(v, k); }, prefix_max);
    return detail::wm_precompute_count(k) + map.top_position() + map.v() - 1 - skips;
}

}  // namespace addchain
