#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "addchain/classic.hpp"
#include "addchain/window_map.hpp"

namespace addchain {

// The composite window method widens wm's windows to k+s bits by allowing a
// gap of up to s clear bits inside each window. A window is kept whole when
// it fits in R bits, re-anchored to at most R bits when it fits in R+s, and
// otherwise has its middle s bits pushed back into the residue so the value
// splits as a*2^(R+s) + b with b odd below 2^R. The precomputed table holds
// exactly the values those three cases can produce. s = 0 turns the gap off
// and reduces the method to wm.

struct CwmSplit {
    std::uint32_t R = 0;  // low-part width
    std::uint32_t L = 0;  // high-part width, R + L == k
};

inline CwmSplit cwm_split(std::uint32_t k, std::uint32_t s) {
    if (s == 0)
        return {0, k};
    std::uint32_t R = (k + 1) / 2;
    return {R, k - R};
}

namespace detail {

inline void require_cwm_params(std::uint32_t k, std::uint32_t s, const char* who) {
    require_window_width(k, who);
    if (s > 30)
        throw std::invalid_argument(std::string(who) + ": gap width must be at most 30");
}

}  // namespace detail

// True when w can appear in a window map for parameters (k, s): odd and
// either short enough to be taken whole or of the split a*2^(R+s) + b form.
inline bool is_window_value(std::uint32_t k, std::uint32_t s, std::uint64_t w) {
    detail::require_cwm_params(k, s, "is_window_value");
    if (w == 0 || w % 2 == 0)
        return false;
    if (s == 0)
        return w < (std::uint64_t(1) << k);
    auto [R, L] = cwm_split(k, s);
    if (w < (std::uint64_t(1) << R))
        return true;
    std::uint64_t a = w >> (R + s);
    std::uint64_t b = w & ((std::uint64_t(1) << (R + s)) - 1);
    return a >= 1 && a < (std::uint64_t(1) << L) && b < (std::uint64_t(1) << R);
}

struct CwmPrecomputation {
    std::uint32_t k = 0;
    std::uint32_t s = 0;
    std::uint32_t R = 0;
    std::uint32_t L = 0;
    std::vector<std::uint64_t> values;
    std::vector<ChainStep> steps;

    std::size_t count() const { return values.size(); }

    detail::PrefixBlock block() const { return {values, steps}; }
};

// The table the reconstruction draws from: 1, 2 and the odd values below
// 2^R, the powers of two from 2^R through 2^(R+s), and a*2^(R+s) + b for
// every a below 2^L and odd b below 2^R. Values are appended once; for
// R = 1 the power 2 is already present and is not repeated.
inline CwmPrecomputation cwm_precompute(std::uint32_t k, std::uint32_t s) {
    detail::require_cwm_params(k, s, "cwm_precompute");
    CwmPrecomputation out;
    out.k = k;
    out.s = s;
    auto [R, L] = cwm_split(k, s);
    out.R = R;
    out.L = L;
    if (s == 0) {
        detail::wm_precompute(k, out.values, out.steps);
        return out;
    }

    out.values = {1, 2};
    out.steps = {{0, 0}};
    for (std::uint64_t odd = 3; odd < (std::uint64_t(1) << R); odd += 2) {
        std::uint32_t prev = static_cast<std::uint32_t>(out.values.size() - 1);
        out.values.push_back(odd);
        out.steps.push_back(odd == 3 ? ChainStep{1, 0} : ChainStep{prev, 1});
    }
    for (std::uint32_t t = R; t <= R + s; ++t) {
        std::uint64_t power = std::uint64_t(1) << t;
        if (power == 2)
            continue;
        std::uint32_t prev = static_cast<std::uint32_t>(out.values.size() - 1);
        out.values.push_back(power);
        if (out.values[prev] * 2 == power)
            out.steps.push_back({prev, prev});
        else
            out.steps.push_back({prev, 0});  // 2^R = (2^R - 1) + 1
    }
    std::uint32_t top_power = static_cast<std::uint32_t>(out.values.size() - 1);
    std::uint32_t prev_block_start = 0;
    for (std::uint64_t a = 1; a < (std::uint64_t(1) << L); ++a) {
        std::uint32_t block_start = static_cast<std::uint32_t>(out.values.size());
        for (std::uint64_t b = 1; b < (std::uint64_t(1) << R); b += 2) {
            std::uint32_t prev = static_cast<std::uint32_t>(out.values.size() - 1);
            out.values.push_back(a * (std::uint64_t(1) << (R + s)) + b);
            if (b > 1)
                out.steps.push_back({prev, 1});
            else if (a == 1)
                out.steps.push_back({top_power, 0});
            else
                out.steps.push_back({prev_block_start, top_power});
        }
        prev_block_start = block_start;
    }
    return out;
}

namespace detail {

// Everything about the table that the counting paths need, without
// materializing it.
struct CwmShape {
    std::uint32_t k, s, R, L;
    std::size_t count;
    std::uint64_t max_value;
    std::size_t odd_count;    // segment of odd values below 2^R, including 1
    std::size_t power_count;  // segment of fresh powers of two
};

inline CwmShape cwm_shape(std::uint32_t k, std::uint32_t s) {
    auto [R, L] = cwm_split(k, s);
    CwmShape shape{k, s, R, L, 0, 0, 0, 0};
    if (s == 0) {
        shape.count = wm_precompute_count(k);
        shape.max_value = k == 1 ? 2 : (std::uint64_t(1) << k) - 1;
        return shape;
    }
    shape.odd_count = std::size_t(1) << (R - 1);  // 1 plus the odds from 3 up
    shape.power_count = std::size_t(s) + 1 - (R == 1 ? 1 : 0);
    std::size_t split_count = ((std::size_t(1) << L) - 1) << (R - 1);
    shape.count = 1 + shape.odd_count + shape.power_count + split_count;
    shape.max_value = L == 0 ? (std::uint64_t(1) << (R + s))
                             : (((std::uint64_t(1) << L) - 1) << (R + s)) +
                                   (std::uint64_t(1) << R) - 1;
    return shape;
}

inline bool cwm_member(const CwmShape& shape, std::uint64_t value) {
    if (value == 1 || value == 2)
        return true;
    if (shape.s == 0)
        return value % 2 == 1 && value < (std::uint64_t(1) << shape.k);
    if (value % 2 == 1) {
        if (value < (std::uint64_t(1) << shape.R))
            return true;
        std::uint64_t a = value >> (shape.R + shape.s);
        std::uint64_t b = value & ((std::uint64_t(1) << (shape.R + shape.s)) - 1);
        return a >= 1 && a < (std::uint64_t(1) << shape.L) && b < (std::uint64_t(1) << shape.R);
    }
    return std::has_single_bit(value) && value >= (std::uint64_t(1) << shape.R) &&
           value <= (std::uint64_t(1) << (shape.R + shape.s));
}

// Index of a member value in the table's append order.
inline std::size_t cwm_member_index(const CwmShape& shape, std::uint64_t value) {
    if (value <= 2)
        return value - 1;
    if (shape.s == 0)
        return 2 + (value - 3) / 2;
    if (value % 2 == 1 && value < (std::uint64_t(1) << shape.R))
        return 2 + (value - 3) / 2;
    std::size_t powers_at = 1 + shape.odd_count;
    if (value % 2 == 0) {
        std::uint32_t t = static_cast<std::uint32_t>(std::countr_zero(value));
        return powers_at + t - shape.R - (shape.R == 1 ? 1 : 0);
    }
    std::uint64_t a = value >> (shape.R + shape.s);
    std::uint64_t b = value & ((std::uint64_t(1) << shape.R) - 1);
    return powers_at + shape.power_count + (a - 1) * (std::size_t(1) << (shape.R - 1)) +
           (b - 1) / 2;
}

// Greedy window scan shared by the full build and the counting path.
inline WindowMap cwm_extract(const Natural& e, const CwmShape& shape) {
    if (shape.s == 0)
        return wm_extract(e, shape.k);
    std::uint32_t wide = shape.k + shape.s;
    std::uint64_t gap_mask = ((std::uint64_t(1) << shape.s) - 1) << shape.R;
    WindowMap map;
    Residue residue(e);
    std::optional<std::size_t> top = e.bit_length() - 1;
    while (top) {
        std::size_t j = residue.anchor(*top, wide);
        std::size_t len = *top - j + 1;
        std::uint64_t w = residue.bits_at(j, len);
        if (len > shape.R + shape.s) {
            w &= ~gap_mask;
        } else if (len > shape.R) {
            j = residue.anchor(*top, shape.R);
            w = residue.bits_at(j, *top - j + 1);
        }
        if (map.w0 == 0)
            map.w0 = w;
        if (!map.entries.emplace(j, w).second)
            throw std::logic_error("cwm_extract: window offset produced twice");
        residue.clear(w, j);
        if (*top == 0)
            break;
        top = residue.top_bit(*top - 1);
    }
    return map;
}

}  // namespace detail

// Window decomposition of e for parameters (k, s).
inline WindowMap extract_windows(const Natural& e, std::uint32_t k, std::uint32_t s) {
    detail::require_cwm_params(k, s, "extract_windows");
    require_positive(e, "extract_windows");
    return detail::cwm_extract(e, detail::cwm_shape(k, s));
}

// Composite window method: precomputed table plus the reconstruction walk.
inline WindowedBuild cwm(std::uint32_t k, std::uint32_t s, const Natural& e) {
    detail::require_cwm_params(k, s, "cwm");
    require_positive(e, "cwm");
    CwmPrecomputation table = cwm_precompute(k, s);
    WindowMap map = detail::cwm_extract(e, detail::cwm_shape(k, s));
    return detail::assemble_windowed(table.block(), std::move(map), e);
}

// Chain element count cwm(k, s, e) would produce, without building it.
inline std::size_t cwm_element_count(std::uint32_t k, std::uint32_t s, const Natural& e) {
    detail::require_cwm_params(k, s, "cwm_element_count");
    require_positive(e, "cwm_element_count");
    detail::CwmShape shape = detail::cwm_shape(k, s);
    if (e.fits_u64() && detail::cwm_member(shape, e.to_u64()))
        return detail::cwm_member_index(shape, e.to_u64()) + 1;
    WindowMap map = detail::cwm_extract(e, shape);
    std::size_t skips = detail::count_skips(
        map, [&shape](std::uint64_t v) { return detail::cwm_member(shape, v); },
        shape.max_value);
    return shape.count + map.top_position() + map.v() - 1 - skips;
}

struct CwmChoice {
    std::uint32_t k = 0;
    std::uint32_t s = 0;
    WindowedBuild build;
};

// Best (k, s) over the given ranges by element count. Ties go to the
// smaller k, then the smaller s. The winning chain is materialized and its
// size checked against the counting path.
inline CwmChoice cwm_best(const Natural& e, std::uint32_t k_max, std::uint32_t s_max) {
    detail::require_cwm_params(k_max, s_max, "cwm_best");
    require_positive(e, "cwm_best");
    std::uint32_t best_k = 1, best_s = 0;
    std::size_t best = SIZE_MAX;
    for (std::uint32_t k = 1; k <= k_max; ++k)
        for (std::uint32_t s = 0; s <= s_max; ++s) {
            std::size_t count = cwm_element_count(k, s, e);
            if (count < best) {
                best = count;
                best_k = k;
                best_s = s;
            }
        }
    CwmChoice choice{best_k, best_s, cwm(best_k, best_s, e)};
    if (choice.build.chain.element_count() != best)
        throw std::logic_error("cwm_best: count path disagrees with the built chain");
    return choice;
}

}  // namespace addchain
