#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "addchain/classic.hpp"

namespace addchain {

// Branch-and-fold method around a small odd pivot m. One branch per anchor
// exponent i: raise bm_star(m) and the powers of two through 2^i, seed
// 2^i + m, double it while that stays at most e, then walk the prepared
// values from largest to smallest, folding in every one that still fits.
// The walk always lands exactly on e: the doublings leave a remainder
// smaller than the seed, the prepared multiples and powers consume it digit
// by digit, and the bm_star values cover everything below 2^(digits of m).

namespace detail {

inline void require_pivot(std::uint64_t m, const char* who) {
    if (m == 0 || m % 2 == 0)
        throw std::invalid_argument(std::string(who) + ": pivot must be odd");
    if (m > (std::uint64_t(1) << 62))
        throw std::invalid_argument(std::string(who) + ": pivot too large");
}

// bm_star(m)'s values for a 64-bit pivot: the powers of two below m, then
// the partial sums of m's set bits from the top down.
inline std::vector<std::uint64_t> star_values_u64(std::uint64_t m) {
    std::uint32_t q = static_cast<std::uint32_t>(std::bit_width(m));
    std::vector<std::uint64_t> out{1};
    for (std::uint32_t t = 1; t < q; ++t)
        out.push_back(std::uint64_t(1) << t);
    std::uint64_t acc = std::uint64_t(1) << (q - 1);
    for (std::uint32_t bit = q - 1; bit-- > 0;)
        if (m >> bit & 1)
            out.push_back(acc += std::uint64_t(1) << bit);
    return out;
}

}  // namespace detail

// One branch of the method. Returns nothing when the seed 2^i + m already
// overshoots e.
inline std::optional<AdditionChain> sptm_branch(std::uint64_t m, std::uint32_t i,
                                                const Natural& e) {
    detail::require_pivot(m, "sptm_branch");
    require_positive(e, "sptm_branch");
    std::uint32_t q = static_cast<std::uint32_t>(std::bit_width(m));
    if (i < q)
        throw std::invalid_argument("sptm_branch: anchor is below the pivot width");
    Natural seed = (Natural(1) << i) + Natural(m);
    if (seed > e)
        return std::nullopt;

    AdditionChain chain = bm_star(Natural(m));  // powers of two sit at indices 0..q-1
    for (std::uint32_t t = q; t <= i; ++t) {
        std::uint32_t prev = t == q ? q - 1 : static_cast<std::uint32_t>(chain.length());
        chain.push(chain.elements()[prev] + chain.elements()[prev], prev, prev);
    }
    std::uint32_t pivot_at = q + static_cast<std::uint32_t>(std::popcount(m)) - 2;
    std::uint32_t acc = chain.push(seed, static_cast<std::uint32_t>(chain.length()), pivot_at);
    while (true) {
        Natural doubled = chain.elements()[acc] + chain.elements()[acc];
        if (doubled > e)
            break;
        acc = chain.push(std::move(doubled), acc, acc);
    }

    for (std::uint32_t j = acc; j-- > 0;) {
        Natural candidate = chain.elements()[acc] + chain.elements()[j];
        if (candidate <= e)
            acc = chain.push(std::move(candidate), acc, j);
    }
    if (chain.elements()[acc] != e)
        throw std::logic_error("sptm_branch: fold walk missed the target");
    return chain;
}

// Additions sptm_branch(m, i, e) would use, without building the chain. The
// doubling run and the fold walk are equivalent to one division of e by the
// seed: the quotient's digits say which multiples fold in, the remainder's
// digits say which powers do, and what is left runs through the bm_star
// values in one 64-bit pass.
inline std::optional<std::size_t> sptm_branch_length(std::uint64_t m, std::uint32_t i,
                                                     const Natural& e) {
    detail::require_pivot(m, "sptm_branch_length");
    require_positive(e, "sptm_branch_length");
    std::uint32_t q = static_cast<std::uint32_t>(std::bit_width(m));
    if (i < q)
        throw std::invalid_argument("sptm_branch_length: anchor is below the pivot width");
    Natural seed = (Natural(1) << i) + Natural(m);
    if (seed > e)
        return std::nullopt;

    Natural::DivMod split = Natural::divmod(e, seed);
    std::size_t length = std::size_t(i) + std::popcount(m) + split.quotient.bit_length() - 1;
    length += split.quotient.popcount() - 1;
    length += (split.remainder >> q).popcount();

    std::uint64_t gap = split.remainder.bits_at(0, q);
    if (gap != 0) {
        std::vector<std::uint64_t> star = detail::star_values_u64(m);
        for (std::size_t j = star.size(); j-- > 0 && gap != 0;)
            if (star[j] <= gap) {
                gap -= star[j];
                ++length;
            }
        if (gap != 0)
            throw std::logic_error("sptm_branch_length: fold walk missed the target");
    }
    return length;
}

struct SptmResult {
    AdditionChain chain;
    std::uint64_t m = 1;
    std::optional<std::uint32_t> branch_i;  // empty when bm was kept

    std::size_t length() const { return chain.length(); }
};

namespace detail {

struct SptmScan {
    std::optional<std::uint32_t> i;
    std::size_t length;
};

// Shortest branch for a fixed pivot, by additions; ties go to the smaller
// anchor. Falls back to bm's count when no branch beats it.
inline SptmScan sptm_scan(std::uint64_t m, const Natural& e) {
    std::uint32_t q = static_cast<std::uint32_t>(std::bit_width(m));
    SptmScan best{std::nullopt, bm_length(e)};
    for (std::uint32_t i = q; std::size_t(i) < e.bit_length(); ++i) {
        auto length = sptm_branch_length(m, i, e);
        if (length && *length < best.length) {
            best.length = *length;
            best.i = i;
        }
    }
    return best;
}

}  // namespace detail

// Best branch for pivot m, or plain bm when no branch strictly beats it.
inline SptmResult sptm(std::uint64_t m, const Natural& e) {
    detail::require_pivot(m, "sptm");
    require_positive(e, "sptm");
    detail::SptmScan scan = detail::sptm_scan(m, e);
    SptmResult out;
    out.m = m;
    if (scan.i) {
        out.branch_i = scan.i;
        out.chain = *sptm_branch(m, *scan.i, e);
        if (out.chain.length() != scan.length)
            throw std::logic_error("sptm: count path disagrees with the built chain");
    } else {
        out.chain = bm(e);
    }
    return out;
}

// Best result over the odd pivots up to m_max; ties keep the smaller pivot.
inline SptmResult sptm_best(const Natural& e, std::uint64_t m_max) {
    if (m_max == 0)
        throw std::invalid_argument("sptm_best: pivot range is empty");
    require_positive(e, "sptm_best");
    std::uint64_t best_m = 1;
    detail::SptmScan best = detail::sptm_scan(1, e);
    for (std::uint64_t m = 3; m <= m_max; m += 2) {
        detail::SptmScan scan = detail::sptm_scan(m, e);
        if (scan.length < best.length) {
            best = scan;
            best_m = m;
        }
    }
    SptmResult out;
    out.m = best_m;
    if (best.i) {
        out.branch_i = best.i;
        out.chain = *sptm_branch(best_m, *best.i, e);
        if (out.chain.length() != best.length)
            throw std::logic_error("sptm_best: count path disagrees with the built chain");
    } else {
        out.chain = bm(e);
    }
    return out;
}

}  // namespace addchain
