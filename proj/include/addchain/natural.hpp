#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace addchain {

// Arbitrary-precision unsigned integer.
//
// Limbs are 64-bit words stored little-endian and kept normalized: no
// trailing zero limbs, and zero is the empty limb vector. All operations
// that could underflow (subtraction of a larger value) throw instead of
// wrapping, since the chain algorithms never need modular wrap-around.
class Natural {
public:
    Natural() = default;

    Natural(std::uint64_t value) {
        if (value != 0)
            limbs_.push_back(value);
    }

    // Accepts decimal, or hexadecimal / binary with a 0x / 0b prefix.
    // Underscores and apostrophes are allowed as digit separators.
    static Natural parse(std::string_view text) {
        std::string digits;
        digits.reserve(text.size());
        for (char c : text) {
            if (c != '_' && c != '\'')
                digits.push_back(c);
        }
        std::string_view s = digits;
        if (s.empty())
            throw std::invalid_argument("Natural::parse: empty input");
        int base = 10;
        if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
            base = 16;
            s.remove_prefix(2);
        } else if (s.size() > 2 && s[0] == '0' && (s[1] == 'b' || s[1] == 'B')) {
            base = 2;
            s.remove_prefix(2);
        }
        Natural out;
        if (base == 16) {
            for (char c : s)
                out.push_low_bits(hex_digit(c), 4);
        } else if (base == 2) {
            for (char c : s) {
                if (c != '0' && c != '1')
                    throw std::invalid_argument("Natural::parse: bad binary digit");
                out.push_low_bits(static_cast<std::uint64_t>(c - '0'), 1);
            }
        } else {
            // Consume decimal digits in blocks of 19 (largest power of ten
            // that fits a limb) so the multiply-accumulate stays limb-sized.
            std::size_t i = 0;
            while (i < s.size()) {
                std::size_t take = std::min<std::size_t>(19, s.size() - i);
                std::uint64_t chunk = 0, scale = 1;
                for (std::size_t k = 0; k < take; ++k) {
                    char c = s[i + k];
                    if (c < '0' || c > '9')
                        throw std::invalid_argument("Natural::parse: bad decimal digit");
                    chunk = chunk * 10 + static_cast<std::uint64_t>(c - '0');
                    scale *= 10;
                }
                out.mul_add_small(scale, chunk);
                i += take;
            }
        }
        return out;
    }

    bool is_zero() const { return limbs_.empty(); }
    bool is_one() const { return limbs_.size() == 1 && limbs_[0] == 1; }
    bool is_odd() const { return !limbs_.empty() && (limbs_[0] & 1); }

    // Number of significant bits; zero has bit length 0.
    std::size_t bit_length() const {
        if (limbs_.empty())
            return 0;
        return 64 * limbs_.size() - static_cast<std::size_t>(std::countl_zero(limbs_.back()));
    }

    std::size_t popcount() const {
        std::size_t total = 0;
        for (std::uint64_t w : limbs_)
            total += static_cast<std::size_t>(std::popcount(w));
        return total;
    }

    std::size_t trailing_zeros() const {
        if (limbs_.empty())
            throw std::domain_error("Natural::trailing_zeros: zero has no set bit");
        std::size_t i = 0;
        while (limbs_[i] == 0)
            ++i;
        return 64 * i + static_cast<std::size_t>(std::countr_zero(limbs_[i]));
    }

    bool bit(std::size_t index) const {
        std::size_t limb = index / 64;
        if (limb >= limbs_.size())
            return false;
        return (limbs_[limb] >> (index % 64)) & 1;
    }

    // Reads `count` bits starting at bit `index` (little-endian bit order).
    // count must be at most 64.
    std::uint64_t bits_at(std::size_t index, std::size_t count) const {
        if (count > 64)
            throw std::invalid_argument("Natural::bits_at: count > 64");
        if (count == 0)
            return 0;
        std::size_t limb = index / 64, off = index % 64;
        std::uint64_t low = limb < limbs_.size() ? limbs_[limb] >> off : 0;
        if (off != 0 && limb + 1 < limbs_.size())
            low |= limbs_[limb + 1] << (64 - off);
        if (count == 64)
            return low;
        return low & ((std::uint64_t{1} << count) - 1);
    }

    bool fits_u64() const { return limbs_.size() <= 1; }

    std::uint64_t to_u64() const {
        if (limbs_.size() > 1)
            throw std::overflow_error("Natural::to_u64: value exceeds 64 bits");
        return limbs_.empty() ? 0 : limbs_[0];
    }

    std::span<const std::uint64_t> limbs() const { return limbs_; }

    friend bool operator==(const Natural& a, const Natural& b) = default;

    friend std::strong_ordering operator<=>(const Natural& a, const Natural& b) {
        if (a.limbs_.size() != b.limbs_.size())
            return a.limbs_.size() <=> b.limbs_.size();
        for (std::size_t i = a.limbs_.size(); i-- > 0;) {
            if (a.limbs_[i] != b.limbs_[i])
                return a.limbs_[i] <=> b.limbs_[i];
        }
        return std::strong_ordering::equal;
    }

    Natural& operator+=(const Natural& other) {
        if (limbs_.size() < other.limbs_.size())
            limbs_.resize(other.limbs_.size(), 0);
        unsigned char carry = 0;
        std::size_t i = 0;
        for (; i < other.limbs_.size(); ++i)
            carry = add_with_carry(limbs_[i], other.limbs_[i], carry, limbs_[i]);
        for (; carry && i < limbs_.size(); ++i)
            carry = add_with_carry(limbs_[i], 0, carry, limbs_[i]);
        if (carry)
            limbs_.push_back(1);
        return *this;
    }

    Natural& operator-=(const Natural& other) {
        if (*this < other)
            throw std::underflow_error("Natural::operator-=: negative result");
        unsigned char borrow = 0;
        std::size_t i = 0;
        for (; i < other.limbs_.size(); ++i)
            borrow = sub_with_borrow(limbs_[i], other.limbs_[i], borrow, limbs_[i]);
        for (; borrow && i < limbs_.size(); ++i)
            borrow = sub_with_borrow(limbs_[i], 0, borrow, limbs_[i]);
        normalize();
        return *this;
    }

    Natural& operator*=(const Natural& other) {
        *this = *this * other;
        return *this;
    }

    friend Natural operator*(const Natural& a, const Natural& b) {
        Natural out;
        if (a.is_zero() || b.is_zero())
            return out;
        out.limbs_.assign(a.limbs_.size() + b.limbs_.size(), 0);
        for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
            if (a.limbs_[i] == 0)
                continue;
            std::uint64_t carry = 0;
            for (std::size_t j = 0; j < b.limbs_.size(); ++j) {
                unsigned __int128 cur = static_cast<unsigned __int128>(a.limbs_[i]) * b.limbs_[j]
                                        + out.limbs_[i + j] + carry;
                out.limbs_[i + j] = static_cast<std::uint64_t>(cur);
                carry = static_cast<std::uint64_t>(cur >> 64);
            }
            out.limbs_[i + b.limbs_.size()] += carry;
        }
        out.normalize();
        return out;
    }

    Natural& operator<<=(std::size_t shift) {
        if (limbs_.empty() || shift == 0)
            return *this;
        std::size_t limb_shift = shift / 64, bit_shift = shift % 64;
        std::size_t old_size = limbs_.size();
        limbs_.resize(old_size + limb_shift + (bit_shift ? 1 : 0), 0);
        for (std::size_t i = old_size; i-- > 0;) {
            std::uint64_t w = limbs_[i];
            limbs_[i] = 0;
            if (bit_shift) {
                limbs_[i + limb_shift + 1] |= w >> (64 - bit_shift);
                limbs_[i + limb_shift] |= w << bit_shift;
            } else {
                limbs_[i + limb_shift] = w;
            }
        }
        normalize();
        return *this;
    }

    Natural& operator>>=(std::size_t shift) {
        if (limbs_.empty() || shift == 0)
            return *this;
        std::size_t limb_shift = shift / 64, bit_shift = shift % 64;
        if (limb_shift >= limbs_.size()) {
            limbs_.clear();
            return *this;
        }
        std::size_t new_size = limbs_.size() - limb_shift;
        for (std::size_t i = 0; i < new_size; ++i) {
            std::uint64_t w = limbs_[i + limb_shift] >> bit_shift;
            if (bit_shift && i + limb_shift + 1 < limbs_.size())
                w |= limbs_[i + limb_shift + 1] << (64 - bit_shift);
            limbs_[i] = w;
        }
        limbs_.resize(new_size);
        normalize();
        return *this;
    }

    friend Natural operator+(Natural a, const Natural& b) { return a += b; }
    friend Natural operator-(Natural a, const Natural& b) { return a -= b; }
    friend Natural operator<<(Natural a, std::size_t s) { return a <<= s; }
    friend Natural operator>>(Natural a, std::size_t s) { return a >>= s; }

    // Quotient/remainder pair with the usual invariants:
    // numerator == quotient * denominator + remainder, remainder < denominator.
    struct DivMod;

    static DivMod divmod(const Natural& numerator, const Natural& denominator);
    friend Natural operator/(const Natural& a, const Natural& b);
    friend Natural operator%(const Natural& a, const Natural& b);

    std::string to_string() const;

    std::string to_hex() const {
        if (limbs_.empty())
            return "0";
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        std::size_t top_bits = bit_length();
        std::size_t nibbles = (top_bits + 3) / 4;
        for (std::size_t i = nibbles; i-- > 0;)
            out.push_back(digits[bits_at(4 * i, 4)]);
        return out;
    }

    std::string to_binary() const {
        if (limbs_.empty())
            return "0";
        std::string out;
        for (std::size_t i = bit_length(); i-- > 0;)
            out.push_back(bit(i) ? '1' : '0');
        return out;
    }

private:
    static unsigned char add_with_carry(std::uint64_t a, std::uint64_t b, unsigned char carry_in,
                                        std::uint64_t& out) {
        unsigned long long tmp;
        unsigned char c = __builtin_uaddll_overflow(a, b, &tmp);
        unsigned char c2 = __builtin_uaddll_overflow(tmp, carry_in, &tmp);
        out = tmp;
        return c | c2;
    }

    static unsigned char sub_with_borrow(std::uint64_t a, std::uint64_t b, unsigned char borrow_in,
                                         std::uint64_t& out) {
        unsigned long long tmp;
        unsigned char c = __builtin_usubll_overflow(a, b, &tmp);
        unsigned char c2 = __builtin_usubll_overflow(tmp, borrow_in, &tmp);
        out = tmp;
        return c | c2;
    }

    static std::uint64_t hex_digit(char c) {
        if (c >= '0' && c <= '9')
            return static_cast<std::uint64_t>(c - '0');
        if (c >= 'a' && c <= 'f')
            return static_cast<std::uint64_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F')
            return static_cast<std::uint64_t>(c - 'A' + 10);
        throw std::invalid_argument("Natural::parse: bad hex digit");
    }

    // *this = *this * 2^count + value, for value < 2^count. Used by parsing.
    void push_low_bits(std::uint64_t value, std::size_t count) {
        *this <<= count;
        if (value != 0) {
            if (limbs_.empty())
                limbs_.push_back(value);
            else
                limbs_[0] |= value;
        }
    }

    // *this = *this * scale + addend (single-limb scale).
    void mul_add_small(std::uint64_t scale, std::uint64_t addend) {
        std::uint64_t carry = addend;
        for (std::uint64_t& limb : limbs_) {
            unsigned __int128 cur = static_cast<unsigned __int128>(limb) * scale + carry;
            limb = static_cast<std::uint64_t>(cur);
            carry = static_cast<std::uint64_t>(cur >> 64);
        }
        if (carry)
            limbs_.push_back(carry);
    }

    void normalize() {
        while (!limbs_.empty() && limbs_.back() == 0)
            limbs_.pop_back();
    }

    std::vector<std::uint64_t> limbs_;
};

struct Natural::DivMod {
    Natural quotient;
    Natural remainder;
};

inline Natural::DivMod Natural::divmod(const Natural& numerator, const Natural& denominator) {
    if (denominator.is_zero())
        throw std::domain_error("Natural::divmod: division by zero");
    DivMod out;
    if (numerator < denominator) {
        out.remainder = numerator;
        return out;
    }
    if (denominator.limbs_.size() == 1) {
        std::uint64_t rem = 0;
        out.quotient.limbs_.assign(numerator.limbs_.size(), 0);
        for (std::size_t i = numerator.limbs_.size(); i-- > 0;) {
            unsigned __int128 cur = (static_cast<unsigned __int128>(rem) << 64)
                                    | numerator.limbs_[i];
            out.quotient.limbs_[i] = static_cast<std::uint64_t>(cur / denominator.limbs_[0]);
            rem = static_cast<std::uint64_t>(cur % denominator.limbs_[0]);
        }
        out.quotient.normalize();
        out.remainder = Natural(rem);
        return out;
    }
    // Knuth algorithm D on normalized operands (divisor top bit set).
    unsigned shift = static_cast<unsigned>(std::countl_zero(denominator.limbs_.back()));
    std::vector<std::uint64_t> u = (numerator << shift).limbs_;
    const std::vector<std::uint64_t> v = (denominator << shift).limbs_;
    const std::size_t n = v.size();
    u.push_back(0);
    const std::size_t m = u.size() - n - 1;
    out.quotient.limbs_.assign(m + 1, 0);
    for (std::size_t j = m + 1; j-- > 0;) {
        unsigned __int128 top = (static_cast<unsigned __int128>(u[j + n]) << 64) | u[j + n - 1];
        unsigned __int128 qhat = top / v[n - 1];
        unsigned __int128 rhat = top % v[n - 1];
        while (qhat >> 64 ||
               qhat * v[n - 2] > ((rhat << 64) | u[j + n - 2])) {
            --qhat;
            rhat += v[n - 1];
            if (rhat >> 64)
                break;
        }
        // u[j .. j+n] -= qhat * v
        std::uint64_t mul_carry = 0;
        unsigned char borrow = 0;
        for (std::size_t i = 0; i < n; ++i) {
            unsigned __int128 p = qhat * v[i] + mul_carry;
            mul_carry = static_cast<std::uint64_t>(p >> 64);
            borrow = sub_with_borrow(u[i + j], static_cast<std::uint64_t>(p), borrow, u[i + j]);
        }
        unsigned char top_borrow = sub_with_borrow(u[j + n], mul_carry, borrow, u[j + n]);
        if (top_borrow) {
            // qhat was one too large; add the divisor back (rare path).
            --qhat;
            unsigned char carry = 0;
            for (std::size_t i = 0; i < n; ++i)
                carry = add_with_carry(u[i + j], v[i], carry, u[i + j]);
            u[j + n] += carry;
        }
        out.quotient.limbs_[j] = static_cast<std::uint64_t>(qhat);
    }
    out.quotient.normalize();
    u.resize(n);
    out.remainder.limbs_ = std::move(u);
    out.remainder.normalize();
    out.remainder >>= shift;
    return out;
}

inline Natural operator/(const Natural& a, const Natural& b) {
    return Natural::divmod(a, b).quotient;
}

inline Natural operator%(const Natural& a, const Natural& b) {
    return Natural::divmod(a, b).remainder;
}

inline std::string Natural::to_string() const {
    if (limbs_.empty())
        return "0";
    static constexpr std::uint64_t block = 10'000'000'000'000'000'000ull;  // 10^19
    std::vector<std::uint64_t> chunks;
    Natural cur = *this;
    const Natural divisor(block);
    while (!cur.is_zero()) {
        DivMod dm = divmod(cur, divisor);
        chunks.push_back(dm.remainder.is_zero() ? 0 : dm.remainder.limbs_[0]);
        cur = std::move(dm.quotient);
    }
    std::string out = std::to_string(chunks.back());
    for (std::size_t i = chunks.size() - 1; i-- > 0;) {
        std::string part = std::to_string(chunks[i]);
        out.append(19 - part.size(), '0');
        out += part;
    }
    return out;
}

struct NaturalHash {
    std::size_t operator()(const Natural& value) const {
        // FNV-1a over the limb vector.
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t w : value.limbs()) {
            h ^= w;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

// Reference modular exponentiation: left-to-right square and multiply.
// Serves as the independent check for chain-driven exponentiation.
inline Natural modpow(const Natural& base, const Natural& exponent, const Natural& modulus) {
    if (modulus.is_zero())
        throw std::domain_error("modpow: zero modulus");
    if (modulus.is_one())
        return Natural();
    Natural b = base % modulus;
    if (exponent.is_zero())
        return Natural(1);
    Natural acc = b;
    for (std::size_t i = exponent.bit_length() - 1; i-- > 0;) {
        acc = (acc * acc) % modulus;
        if (exponent.bit(i))
            acc = (acc * b) % modulus;
    }
    return acc;
}

}  // namespace addchain
