#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "addchain/natural.hpp"

namespace addchain {

// Bit-level shape of a positive integer: n is the number of binary digits,
// h the number of ones.
struct BitProfile {
    std::size_t n = 0;
    std::size_t h = 0;

    friend bool operator==(const BitProfile&, const BitProfile&) = default;
};

inline BitProfile bit_profile(const Natural& e) {
    if (e.is_zero())
        throw std::domain_error("bit_profile: value must be positive");
    return {e.bit_length(), e.popcount()};
}

// How element x was formed: elements[i] + elements[j], both indices < x.
struct ChainStep {
    std::uint32_t i = 0;
    std::uint32_t j = 0;

    friend bool operator==(const ChainStep&, const ChainStep&) = default;
};

// An addition chain 1 = a_0, a_1, ..., a_r where every element past the
// first is the sum of two earlier (not necessarily distinct) elements.
// The chain's target is its last element, and its length is r, the number
// of additions. Step provenance is optional: chains built by the methods
// carry one ChainStep per element after a_0, while chains assembled from
// bare value lists may omit steps and be checked by pair search instead.
class AdditionChain {
public:
    AdditionChain() = default;

    AdditionChain(std::vector<Natural> elements, std::vector<ChainStep> steps)
        : elements_(std::move(elements)), steps_(std::move(steps)) {}

    static AdditionChain unit() {
        AdditionChain c;
        c.elements_.push_back(Natural(1));
        return c;
    }

    static AdditionChain from_values(std::vector<Natural> values) {
        return AdditionChain(std::move(values), {});
    }

    std::uint32_t push(Natural value, std::uint32_t i, std::uint32_t j) {
        elements_.push_back(std::move(value));
        steps_.push_back({i, j});
        return static_cast<std::uint32_t>(elements_.size() - 1);
    }

    void reserve(std::size_t n) {
        elements_.reserve(n);
        steps_.reserve(n);
    }

    const std::vector<Natural>& elements() const { return elements_; }
    const std::vector<ChainStep>& steps() const { return steps_; }
    bool has_steps() const { return steps_.size() + 1 == elements_.size(); }

    bool empty() const { return elements_.empty(); }
    std::size_t element_count() const { return elements_.size(); }

    // r, the number of additions.
    std::size_t length() const { return elements_.empty() ? 0 : elements_.size() - 1; }

    const Natural& target() const {
        if (elements_.empty())
            throw std::logic_error("AdditionChain::target: empty chain");
        return elements_.back();
    }

private:
    std::vector<Natural> elements_;
    std::vector<ChainStep> steps_;
};

struct ValidationReport {
    bool ok = true;
    std::size_t index = 0;     // first offending element when !ok
    std::string message;

    explicit operator bool() const { return ok; }
};

namespace detail {

// Finds a supporting pair i <= j < x for elements[x] by hashing the values
// seen so far. Values may repeat; the earliest index wins.
inline std::optional<ChainStep> find_support(
    const std::vector<Natural>& elements, std::size_t x,
    const std::unordered_map<Natural, std::uint32_t, NaturalHash>& first_index) {
    const Natural& sum = elements[x];
    for (std::size_t i = 0; i < x; ++i) {
        if (elements[i] >= sum)
            continue;
        Natural need = sum - elements[i];
        auto it = first_index.find(need);
        if (it != first_index.end() && it->second < x)
            return ChainStep{static_cast<std::uint32_t>(i), it->second};
    }
    return std::nullopt;
}

}  // namespace detail

// Structural check: starts at 1, second element (if any) is 2, and every
// later element is the sum of two earlier ones. Duplicate values are
// permitted; elements need not increase. When the chain carries steps they
// are verified directly, otherwise a pair search runs per element.
inline ValidationReport validate_chain(const AdditionChain& chain) {
    const auto& el = chain.elements();
    if (el.empty())
        return {false, 0, "chain is empty"};
    if (!el[0].is_one())
        return {false, 0, "chain must start at 1"};
    if (el.size() >= 2 && el[1] != Natural(2))
        return {false, 1, "second element must be 2"};
    if (chain.has_steps()) {
        const auto& steps = chain.steps();
        for (std::size_t x = 1; x < el.size(); ++x) {
            const ChainStep& s = steps[x - 1];
            if (s.i >= x || s.j >= x)
                return {false, x, "step refers to a later element"};
            if (el[s.i] + el[s.j] != el[x])
                return {false, x, "step addends do not sum to the element"};
        }
        return {};
    }
    std::unordered_map<Natural, std::uint32_t, NaturalHash> first_index;
    first_index.emplace(el[0], 0);
    for (std::size_t x = 1; x < el.size(); ++x) {
        if (!detail::find_support(el, x, first_index))
            return {false, x, "element has no supporting pair"};
        first_index.emplace(el[x], static_cast<std::uint32_t>(x));
    }
    return {};
}

// Recovers one ChainStep per element for a chain without provenance.
// Returns nullopt when some element has no supporting pair.
inline std::optional<std::vector<ChainStep>> resolve_steps(const AdditionChain& chain) {
    if (chain.has_steps())
        return chain.steps();
    const auto& el = chain.elements();
    if (el.empty() || !el[0].is_one())
        return std::nullopt;
    std::vector<ChainStep> steps;
    steps.reserve(el.size() - 1);
    std::unordered_map<Natural, std::uint32_t, NaturalHash> first_index;
    first_index.emplace(el[0], 0);
    for (std::size_t x = 1; x < el.size(); ++x) {
        auto s = detail::find_support(el, x, first_index);
        if (!s)
            return std::nullopt;
        steps.push_back(*s);
        first_index.emplace(el[x], static_cast<std::uint32_t>(x));
    }
    return steps;
}

// base^target mod modulus, computed with one modular multiplication per
// chain step. The chain is validated first; an invalid chain is rejected
// before any multiplication happens.
inline Natural exponentiate_with_chain(const Natural& base, const AdditionChain& chain,
                                       const Natural& modulus) {
    if (modulus.is_zero())
        throw std::domain_error("exponentiate_with_chain: zero modulus");
    ValidationReport report = validate_chain(chain);
    if (!report)
        throw std::invalid_argument("exponentiate_with_chain: invalid chain: " + report.message);
    auto steps = resolve_steps(chain);
    if (!steps)
        throw std::invalid_argument("exponentiate_with_chain: chain has no step provenance");
    if (modulus.is_one())
        return Natural();
    std::vector<Natural> powers;
    powers.reserve(chain.element_count());
    powers.push_back(base % modulus);
    for (const ChainStep& s : *steps)
        powers.push_back((powers[s.i] * powers[s.j]) % modulus);
    return powers.back();
}

// Text form: a target header followed by one line per addition. Element 0
// is always 1 and is not written. Example for [1, 2, 3]:
//   # target=3
//   1: 2 = 1 + 1
//   2: 3 = 2 + 1
inline void emit_chain(std::ostream& out, const AdditionChain& chain) {
    if (chain.empty())
        throw std::invalid_argument("emit_chain: empty chain");
    auto steps = resolve_steps(chain);
    if (!steps)
        throw std::invalid_argument("emit_chain: chain has no supporting pairs");
    const auto& el = chain.elements();
    out << "# target=" << chain.target().to_string() << '\n';
    for (std::size_t x = 1; x < el.size(); ++x) {
        const ChainStep& s = (*steps)[x - 1];
        out << x << ": " << el[x].to_string() << " = " << el[s.i].to_string() << " + "
            << el[s.j].to_string() << '\n';
    }
}

inline std::string chain_to_text(const AdditionChain& chain) {
    std::ostringstream out;
    emit_chain(out, chain);
    return out.str();
}

class ChainParseError : public std::runtime_error {
public:
    ChainParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Parses the emit_chain format back into a chain with step provenance.
// Addends are written as values; each resolves to its earliest occurrence.
inline AdditionChain parse_chain(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (!line.empty())
                return true;
        }
        return false;
    };

    if (!next_line())
        throw ChainParseError(1, "missing '# target=' header");
    const std::string prefix = "# target=";
    if (line.rfind(prefix, 0) != 0)
        throw ChainParseError(line_no, "missing '# target=' header");
    Natural target;
    try {
        target = Natural::parse(line.substr(prefix.size()));
    } catch (const std::invalid_argument&) {
        throw ChainParseError(line_no, "bad target value");
    }

    std::vector<Natural> elements{Natural(1)};
    std::vector<ChainStep> steps;
    std::unordered_map<Natural, std::uint32_t, NaturalHash> first_index;
    first_index.emplace(elements[0], 0);

    while (next_line()) {
        std::istringstream fields(line);
        std::size_t index = 0;
        char colon = 0, eq = 0, plus = 0;
        std::string value_text, left_text, right_text;
        if (!(fields >> index >> colon >> value_text >> eq >> left_text >> plus >> right_text) ||
            colon != ':' || eq != '=' || plus != '+')
            throw ChainParseError(line_no, "expected 'idx: value = a + b'");
        std::string tail;
        if (fields >> tail)
            throw ChainParseError(line_no, "trailing content after addends");
        if (index != elements.size())
            throw ChainParseError(line_no, "expected index " + std::to_string(elements.size()));
        Natural value, left, right;
        try {
            value = Natural::parse(value_text);
            left = Natural::parse(left_text);
            right = Natural::parse(right_text);
        } catch (const std::invalid_argument&) {
            throw ChainParseError(line_no, "bad number");
        }
        if (left + right != value)
            throw ChainParseError(line_no, "addends do not sum to the value");
        auto li = first_index.find(left);
        auto ri = first_index.find(right);
        if (li == first_index.end() || ri == first_index.end())
            throw ChainParseError(line_no, "addend is not an earlier element");
        elements.push_back(value);
        steps.push_back({li->second, ri->second});
        first_index.emplace(elements.back(), static_cast<std::uint32_t>(elements.size() - 1));
    }

    if (elements.back() != target)
        throw ChainParseError(line_no, "last element does not match the target header");
    return AdditionChain(std::move(elements), std::move(steps));
}

inline AdditionChain parse_chain_text(const std::string& text) {
    std::istringstream in(text);
    return parse_chain(in);
}

}  // namespace addchain
