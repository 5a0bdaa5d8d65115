#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "addchain/chain.hpp"
#include "addchain/natural.hpp"

namespace addchain {

// Exact minimum chain lengths by exhaustive search. The search walks
// strictly increasing chains only; any chain can be rewritten as one, so
// this loses no generality. Costs grow quickly with the target, so targets
// are capped; lengths above the cap are a research problem, not a lookup.
inline constexpr std::uint64_t kShortestSearchCap = std::uint64_t(1) << 20;

// Below this bound, chains whose every step adds the current top element
// reach the unrestricted minimum length; 12509 is the smallest target
// where that restricted form needs one extra step. The restricted search
// generates one candidate per chain element instead of one per pair, so
// the search runs in that mode whenever the target allows it.
inline constexpr std::uint64_t kStarExactBound = 12509;

namespace detail {

inline void require_searchable(std::uint64_t e, const char* who) {
    if (e == 0)
        throw std::domain_error(std::string(who) + ": target must be positive");
    if (e > kShortestSearchCap)
        throw std::domain_error(std::string(who) +
                                ": target above the exhaustive search cap of 2^20");
}

// Depth-limited search for a chain of at most the given number of
// additions. Each step extends the chain with a pairwise sum from a
// shrinking window: the next element must exceed the current top, cannot
// exceed its double, and must still be able to reach the target by
// doublings alone. Candidates are tried largest first, which makes the
// first chain found canonical. With top_addend_only set, only sums that
// use the current top are considered, which is exact for targets below
// kStarExactBound and prunes the tree by an order of magnitude.
class DepthSearch {
public:
    explicit DepthSearch(std::uint64_t target, bool top_addend_only = false)
        : target_(target),
          target_ones_(std::uint64_t(std::popcount(target))),
          top_addend_only_(top_addend_only) {
        chain_.reserve(64);
    }

    bool run(std::size_t additions) {
        chain_.assign(1, 1);
        ones_.assign(1, 1);
        return target_ == 1 || extend(additions);
    }

    const std::vector<std::uint64_t>& chain() const { return chain_; }

private:
    bool extend(std::size_t g) {
        std::uint64_t top = chain_.back();
        if (g < 64 && (top << g) < target_)
            return false;  // even doubling every step falls short
        // popcount is subadditive across an addition, so the largest
        // popcount seen so far at most doubles per remaining step
        if (g < 64 && (ones_.back() << g) < target_ones_)
            return false;
        if (g == 0)
            return top == target_;
        if (g == 1) {
            if (top_addend_only_) {
                std::uint64_t need = target_ - top;
                if (need <= top && std::binary_search(chain_.begin(), chain_.end(), need)) {
                    chain_.push_back(target_);
                    return true;
                }
                return false;
            }
            for (std::size_t j = chain_.size(); j-- > 0;) {
                std::uint64_t need = target_ - chain_[j];
                if (need > chain_[j])
                    break;  // addends below this point only shrink the sum
                if (std::binary_search(chain_.begin(), chain_.end(), need)) {
                    chain_.push_back(target_);
                    return true;
                }
            }
            return false;
        }
        std::uint64_t lo = ((target_ - 1) >> (g - 1)) + 1;  // must reach target by doubling
        lo = std::max(lo, top + 1);
        std::uint64_t hi = std::min(top * 2, target_);
        std::vector<std::uint64_t> candidates;
        if (top_addend_only_) {
            // sums with the top are distinct and already descending
            for (std::size_t j = chain_.size(); j-- > 0;) {
                std::uint64_t sum = top + chain_[j];
                if (sum < lo)
                    break;
                if (sum <= hi)
                    candidates.push_back(sum);
            }
        } else {
            for (std::size_t i = chain_.size(); i-- > 0;) {
                if (chain_[i] * 2 < lo)
                    break;
                for (std::size_t j = i + 1; j-- > 0;) {
                    std::uint64_t sum = chain_[i] + chain_[j];
                    if (sum < lo)
                        break;
                    if (sum <= hi)
                        candidates.push_back(sum);
                }
            }
            std::sort(candidates.begin(), candidates.end(), std::greater<>());
            candidates.erase(std::unique(candidates.begin(), candidates.end()),
                             candidates.end());
        }
        for (std::uint64_t c : candidates) {
            if (c == target_) {
                chain_.push_back(c);
                return true;
            }
            chain_.push_back(c);
            ones_.push_back(std::max(ones_.back(), std::uint64_t(std::popcount(c))));
            if (extend(g - 1))
                return true;
            chain_.pop_back();
            ones_.pop_back();
        }
        return false;
    }

    std::uint64_t target_;
    std::uint64_t target_ones_;
    bool top_addend_only_;
    std::vector<std::uint64_t> chain_;
    std::vector<std::uint64_t> ones_;
};

inline std::size_t log2_ceil(std::uint64_t e) {
    return std::bit_width(e - 1);  // e >= 1
}

// Proven floors on the minimum length. Beyond the digit bound: a number
// with three or more set bits needs at least two non-doubling steps, one
// with five or more needs at least three, and every chain satisfies the
// real-valued bound length >= log2(e) + log2(popcount(e)) - 2.13. These
// let the table skip the exhaustive proof whenever the floor already
// meets the constructive ceiling.
inline std::size_t length_lower_bound(std::uint64_t e) {
    std::size_t lb = log2_ceil(e);
    std::size_t lambda = std::size_t(std::bit_width(e)) - 1;
    int ones = std::popcount(e);
    if (ones >= 5)
        lb = std::max(lb, lambda + 3);
    else if (ones >= 3)
        lb = std::max(lb, lambda + 2);
    double analytic = std::log2(double(e)) + std::log2(double(ones)) - 2.13;
    if (analytic > double(lb))
        lb = std::size_t(std::ceil(analytic - 1e-9));
    return lb;
}

}  // namespace detail

// Exact minimum number of additions to reach e from 1.
inline std::size_t shortest_length(std::uint64_t e) {
    detail::require_searchable(e, "shortest_length");
    detail::DepthSearch search(e, e < kStarExactBound);
    for (std::size_t d = detail::length_lower_bound(e);; ++d)
        if (search.run(d))
            return d;
}

// The canonical witness chain behind shortest_length: the first chain found
// when candidates are tried largest first at every depth.
inline AdditionChain shortest_chain(std::uint64_t e) {
    detail::require_searchable(e, "shortest_chain");
    detail::DepthSearch search(e, e < kStarExactBound);
    for (std::size_t d = detail::length_lower_bound(e);; ++d)
        if (search.run(d)) {
            std::vector<Natural> elements;
            elements.reserve(search.chain().size());
            for (std::uint64_t v : search.chain())
                elements.emplace_back(v);
            return AdditionChain::from_values(std::move(elements));
        }
}

// Minimum additions for every target up to limit, indexed by target
// (entry 0 is unused). Walking upward makes most entries cheap: the value
// for e is bounded below by length_lower_bound and above by extending the
// chain for e - 1, doubling the chain for e / 2, or concatenating the
// chains of a divisor pair (a chain for a*b follows a chain for a with a's
// multiples along b's chain). When the bounds meet no search runs at all;
// otherwise the search walks down from the upper bound, so at most one
// depth has to be exhausted to prove optimality.
inline std::vector<std::uint8_t> shortest_table(std::uint64_t limit) {
    detail::require_searchable(limit, "shortest_table");
    std::vector<std::uint8_t> table(limit + 1, 0);
    for (std::uint64_t e = 2; e <= limit; ++e) {
        std::size_t lb = detail::length_lower_bound(e);
        std::size_t ub = std::bit_width(e) + std::size_t(std::popcount(e)) - 2;
        ub = std::min(ub, table[e - 1] + std::size_t(1));
        if (e % 2 == 0)
            ub = std::min(ub, table[e / 2] + std::size_t(1));
        for (std::uint64_t d = 3; d * d <= e; d += 2)
            if (e % d == 0)
                ub = std::min(ub, std::size_t(table[d]) + table[e / d]);
        if (lb < ub) {
            detail::DepthSearch search(e, e < kStarExactBound);
            while (ub > lb && search.run(ub - 1))
                ub = search.chain().size() - 1;
        }
        table[e] = static_cast<std::uint8_t>(ub);
    }
    return table;
}

// Two-column text form of a length table, one "target,additions" row per
// target starting at 1.
inline void write_length_table(std::ostream& out, const std::vector<std::uint8_t>& table) {
    out << "e,l\n";
    for (std::size_t e = 1; e < table.size(); ++e)
        out << e << ',' << unsigned(table[e]) << '\n';
}

inline std::vector<std::uint8_t> read_length_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || (line != "e,l" && line != "e,l\r"))
        throw std::runtime_error("length table: missing 'e,l' header");
    std::vector<std::uint8_t> table{0};
    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::istringstream fields(line);
        std::uint64_t e = 0;
        unsigned l = 0;
        char comma = 0;
        if (!(fields >> e >> comma >> l) || comma != ',' || e != row || l > 255)
            throw std::runtime_error("length table: bad row " + std::to_string(row));
        table.push_back(static_cast<std::uint8_t>(l));
        ++row;
    }
    return table;
}

}  // namespace addchain
