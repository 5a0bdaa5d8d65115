#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "addchain/chain.hpp"
#include "addchain/natural.hpp"

namespace addchain {

// Decomposition e = sum of w << j over the map entries, where each w is an
// odd window value and j its bit offset. w0 is the first window peeled off,
// the one holding e's most significant bit. Later windows usually sit at
// lower offsets, but a window carved out of another window's cleared span
// can land above w0's offset, so the reconstruction walk starts from the
// largest offset present rather than from w0.
struct WindowMap {
    std::map<std::size_t, std::uint64_t> entries;
    std::uint64_t w0 = 0;

    std::size_t v() const { return entries.size(); }

    std::size_t top_position() const {
        if (entries.empty())
            throw std::logic_error("WindowMap::top_position: empty map");
        return entries.rbegin()->first;
    }
};

// A chain produced by precomputing a fixed block of small values and then
// replaying a window map over it: doublings walk the offsets down to zero
// and one addition folds in each window after the first. Values that the
// walk would re-create are reused instead of appended (skips); a target
// that already sits inside the precomputed block truncates the chain there.
struct WindowedBuild {
    AdditionChain chain;
    WindowMap map;
    std::size_t precomp_count = 0;
    std::size_t skips = 0;
    bool truncated = false;

    std::size_t length() const { return chain.length(); }
};

namespace detail {

// Mutable bit set of the still-unassigned part of e while windows are
// peeled off. Cleared positions never come back, so scans only move down.
class Residue {
public:
    explicit Residue(const Natural& e) : limbs_(e.limbs().begin(), e.limbs().end()) {}

    // Highest set bit at or below `from`, if any.
    std::optional<std::size_t> top_bit(std::size_t from) const {
        std::size_t word = from / 64;
        if (word >= limbs_.size())
            word = limbs_.size() - 1;
        std::uint64_t masked = limbs_[word];
        if (word == from / 64 && from % 64 != 63)
            masked &= (std::uint64_t(1) << (from % 64 + 1)) - 1;
        while (true) {
            if (masked != 0)
                return word * 64 + (63 - std::countl_zero(masked));
            if (word == 0)
                return std::nullopt;
            masked = limbs_[--word];
        }
    }

    // Bits [index, index+count) as an integer, count <= 64.
    std::uint64_t bits_at(std::size_t index, std::size_t count) const {
        std::size_t word = index / 64;
        std::size_t shift = index % 64;
        std::uint64_t low = word < limbs_.size() ? limbs_[word] >> shift : 0;
        if (shift != 0 && word + 1 < limbs_.size())
            low |= limbs_[word + 1] << (64 - shift);
        if (count == 64)
            return low;
        return low & ((std::uint64_t(1) << count) - 1);
    }

    // Clears exactly the set bits of `mask << index`.
    void clear(std::uint64_t mask, std::size_t index) {
        std::size_t word = index / 64;
        std::size_t shift = index % 64;
        limbs_[word] &= ~(mask << shift);
        if (shift != 0 && word + 1 < limbs_.size())
            limbs_[word + 1] &= ~(mask >> (64 - shift));
    }

    // Low end of the widest window of at most `width` bits that is anchored
    // with its high bit at `top` and ends in a set bit.
    std::size_t anchor(std::size_t top, std::size_t width) const {
        std::size_t lo = top + 1 >= width ? top + 1 - width : 0;
        std::uint64_t chunk = bits_at(lo, top - lo + 1);
        return lo + std::countr_zero(chunk);
    }

private:
    std::vector<std::uint64_t> limbs_;
};

// The precomputed opening block of a windowed chain: small values with one
// step per value after the leading 1.
struct PrefixBlock {
    std::span<const std::uint64_t> values;
    std::span<const ChainStep> steps;
};

inline std::unordered_map<std::uint64_t, std::uint32_t> value_index(
    std::span<const std::uint64_t> values) {
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    index.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        index.emplace(values[i], static_cast<std::uint32_t>(i));
    return index;
}

// Replays a window map on top of a precomputed block and returns the full
// chain for e. Every window value must already be in the block. The
// accumulator only ever grows, so a candidate value can collide only with
// block values; such candidates are reused, not re-appended.
inline WindowedBuild assemble_windowed(const PrefixBlock& prefix, WindowMap map,
                                       const Natural& e) {
    if (prefix.values.empty() || prefix.values.size() != prefix.steps.size() + 1)
        throw std::invalid_argument("assemble_windowed: malformed prefix block");
    auto index = value_index(prefix.values);

    WindowedBuild out;
    out.map = std::move(map);
    out.precomp_count = prefix.values.size();

    if (e.fits_u64()) {
        auto it = index.find(e.to_u64());
        if (it != index.end()) {
            std::size_t keep = it->second + std::size_t(1);
            std::vector<Natural> elements;
            elements.reserve(keep);
            for (std::size_t i = 0; i < keep; ++i)
                elements.emplace_back(prefix.values[i]);
            out.chain = AdditionChain(std::move(elements),
                                      {prefix.steps.begin(), prefix.steps.begin() + (keep - 1)});
            out.truncated = true;
            return out;
        }
    }

    const auto& entries = out.map.entries;
    if (entries.empty())
        throw std::invalid_argument("assemble_windowed: empty window map");

    AdditionChain chain = AdditionChain::unit();
    chain.reserve(prefix.values.size() + out.map.top_position() + out.map.v() + 1);
    for (std::size_t i = 1; i < prefix.values.size(); ++i)
        chain.push(Natural(prefix.values[i]), prefix.steps[i - 1].i, prefix.steps[i - 1].j);

    auto window_index = [&](std::uint64_t w) -> std::uint32_t {
        auto it = index.find(w);
        if (it == index.end())
            throw std::logic_error("assemble_windowed: window value missing from prefix");
        return it->second;
    };

    auto top = entries.rbegin();
    std::uint32_t acc = window_index(top->second);
    std::size_t pos = top->first;

    auto advance = [&](Natural value, std::uint32_t partner) {
        if (value.fits_u64()) {
            auto it = index.find(value.to_u64());
            if (it != index.end()) {
                acc = it->second;
                ++out.skips;
                return;
            }
        }
        acc = chain.push(std::move(value), acc, partner);
    };

    auto shift_down = [&](std::size_t to) {
        while (pos > to) {
            advance(chain.elements()[acc] + chain.elements()[acc], acc);
            --pos;
        }
    };

    for (auto it = std::next(top); it != entries.rend(); ++it) {
        shift_down(it->first);
        std::uint32_t wi = window_index(it->second);
        advance(chain.elements()[acc] + chain.elements()[wi], wi);
    }
    shift_down(0);

    if (chain.elements()[acc] != e)
        throw std::logic_error("assemble_windowed: reconstruction missed the target");
    out.chain = std::move(chain);
    return out;
}

// Counts the appends the reconstruction walk would skip because the value
// already exists in the precomputed block. Mirrors assemble_windowed exactly
// but stays in 64-bit arithmetic: once the accumulator clears the block's
// largest value no further collision is possible.
template <class MemberFn>
std::size_t count_skips(const WindowMap& map, MemberFn&& is_member, std::uint64_t prefix_max) {
    const auto& entries = map.entries;
    if (entries.empty())
        return 0;
    auto top = entries.rbegin();
    std::uint64_t acc = top->second;
    std::size_t pos = top->first;
    std::size_t skips = 0;
    bool live = acc <= prefix_max;

    auto step = [&](std::uint64_t next) {
        if (next <= prefix_max) {
            if (is_member(next))
                ++skips;
        } else {
            live = false;
        }
        acc = next;
    };

    auto shift_down = [&](std::size_t to) {
        while (live && pos > to) {
            step(acc * 2);
            --pos;
        }
        pos = to;
    };

    for (auto it = std::next(top); it != entries.rend() && live; ++it) {
        shift_down(it->first);
        if (live)
            step(acc + it->second);
    }
    shift_down(0);
    return skips;
}

}  // namespace detail
}  // namespace addchain
