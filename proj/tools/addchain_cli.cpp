#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "addchain/bench.hpp"
#include "addchain/oracle.hpp"

namespace {

using addchain::AdditionChain;
using addchain::Natural;

// Flag combinations the parser cannot catch (method-dependent parameter
// requirements); reported on stderr with exit code 2 like parse errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Range {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
};

Range parse_range(const std::string& text, const char* flag) {
    std::size_t dots = text.find("..");
    if (dots == std::string::npos || dots == 0 || dots + 2 >= text.size())
        throw UsageError(std::string(flag) + ": expected lo..hi, got '" + text + "'");
    Range range;
    try {
        range.lo = std::stoull(text.substr(0, dots));
        range.hi = std::stoull(text.substr(dots + 2));
    } catch (const std::exception&) {
        throw UsageError(std::string(flag) + ": expected lo..hi, got '" + text + "'");
    }
    if (range.lo > range.hi)
        throw UsageError(std::string(flag) + ": empty range '" + text + "'");
    return range;
}

// Everything one chain request produces, shared by `chain` and `modexp`.
struct ChainOutput {
    std::string method;
    AdditionChain chain;
    std::optional<std::uint64_t> k, s, m;
    std::optional<addchain::WindowMap> map;
    std::optional<std::size_t> table_count;
    std::optional<bool> substituted;
};

struct ChainRequest {
    std::string method;
    std::string e_text;
    std::optional<std::uint64_t> k, s, m;
    bool best = false;
    std::string k_range, s_range, m_range;
};

void reject_params(const ChainRequest& req, bool allow_k, bool allow_s, bool allow_m) {
    if (req.k && !allow_k)
        throw UsageError("--k does not apply to method " + req.method);
    if (req.s && !allow_s)
        throw UsageError("--s does not apply to method " + req.method);
    if (req.m && !allow_m)
        throw UsageError("--m does not apply to method " + req.method);
    bool wants_range = !req.k_range.empty() || !req.s_range.empty() || !req.m_range.empty();
    if (wants_range && !req.best)
        throw UsageError("range flags require --best");
    if (req.best && (req.k || req.s || req.m))
        throw UsageError("--best conflicts with fixed --k/--s/--m");
}

void record_windowed(ChainOutput& out, addchain::WindowedBuild&& build) {
    out.map = std::move(build.map);
    out.table_count = build.precomp_count;
    out.chain = std::move(build.chain);
}

ChainOutput build_chain(const ChainRequest& req) {
    Natural e = Natural::parse(req.e_text);
    ChainOutput out;
    out.method = req.method;

    if (req.method == "bm" || req.method == "bm-star") {
        reject_params(req, false, false, false);
        if (req.best)
            throw UsageError("--best does not apply to method " + req.method);
        out.chain = req.method == "bm" ? addchain::bm(e) : addchain::bm_star(e);
        return out;
    }

    if (req.method == "wm") {
        reject_params(req, true, false, false);
        std::uint64_t k = 0;
        if (req.best) {
            Range range{1, 20};
            if (!req.k_range.empty())
                range = parse_range(req.k_range, "--k-range");
            std::size_t best = SIZE_MAX;
            for (std::uint64_t candidate = range.lo; candidate <= range.hi; ++candidate) {
                std::size_t count =
                    addchain::wm_element_count(std::uint32_t(candidate), e);
                if (count < best) {
                    best = count;
                    k = candidate;
                }
            }
        } else if (req.k) {
            k = *req.k;
        } else {
            throw UsageError("method wm needs --k or --best");
        }
        record_windowed(out, addchain::wm(std::uint32_t(k), e));
        out.k = k;
        return out;
    }

    if (req.method == "sptm") {
        reject_params(req, false, false, true);
        std::uint64_t m = 0;
        if (req.best) {
            Range range{1, 63};
            if (!req.m_range.empty())
                range = parse_range(req.m_range, "--m-range");
            std::size_t best = SIZE_MAX;
            for (std::uint64_t candidate = range.lo | 1; candidate <= range.hi;
                 candidate += 2) {
                std::size_t length = addchain::sptm(candidate, e).length();
                if (length + 1 < best) {
                    best = length + 1;
                    m = candidate;
                }
            }
        } else if (req.m) {
            m = *req.m;
        } else {
            throw UsageError("method sptm needs --m or --best");
        }
        addchain::SptmResult result = addchain::sptm(m, e);
        out.chain = std::move(result.chain);
        out.m = result.m;
        return out;
    }

    if (req.method == "cwm" || req.method == "cwm-asa") {
        reject_params(req, true, true, false);
        std::uint64_t k = 0, s = 0;
        bool fixed = req.k && req.s;
        if (!fixed && (req.k || req.s))
            throw UsageError("method " + req.method + " needs both --k and --s");
        if (!fixed && !req.best)
            throw UsageError("method " + req.method + " needs --k and --s, or --best");
        if (req.best) {
            Range k_range = req.method == "cwm" ? Range{1, 10} : Range{1, 20};
            Range s_range = req.method == "cwm" ? Range{0, 10} : Range{0, 20};
            if (!req.k_range.empty())
                k_range = parse_range(req.k_range, "--k-range");
            if (!req.s_range.empty())
                s_range = parse_range(req.s_range, "--s-range");
            if (k_range.lo == 0)
                throw UsageError("--k-range must start at 1 or above");
            std::size_t best = SIZE_MAX;
            for (std::uint64_t kc = k_range.lo; kc <= k_range.hi; ++kc)
                for (std::uint64_t sc = s_range.lo; sc <= s_range.hi; ++sc) {
                    std::size_t count =
                        req.method == "cwm"
                            ? addchain::cwm_element_count(std::uint32_t(kc),
                                                          std::uint32_t(sc), e)
                            : addchain::cwm_asa_element_count(std::uint32_t(kc),
                                                              std::uint32_t(sc), e);
                    if (count < best) {
                        best = count;
                        k = kc;
                        s = sc;
                    }
                }
        } else {
            k = *req.k;
            s = *req.s;
        }
        if (req.method == "cwm") {
            record_windowed(out, addchain::cwm(std::uint32_t(k), std::uint32_t(s), e));
        } else {
            addchain::CwmAsaBuild result =
                addchain::cwm_asa(std::uint32_t(k), std::uint32_t(s), e);
            out.substituted = result.substituted;
            record_windowed(out, std::move(result.build));
        }
        out.k = k;
        out.s = s;
        return out;
    }

    throw UsageError("unknown method '" + req.method +
                     "' (expected bm, bm-star, wm, sptm, cwm, or cwm-asa)");
}

// Windows in extraction order: anchored at the most significant residue
// bit, so ordered by descending top bit.
std::vector<std::pair<std::size_t, std::uint64_t>> extraction_order(
    const addchain::WindowMap& map) {
    std::vector<std::pair<std::size_t, std::uint64_t>> windows(map.entries.begin(),
                                                               map.entries.end());
    std::sort(windows.begin(), windows.end(), [](const auto& a, const auto& b) {
        return a.first + std::bit_width(a.second) > b.first + std::bit_width(b.second);
    });
    return windows;
}

void print_chain_text(std::ostream& os, const ChainOutput& out, const Natural& e) {
    addchain::BitProfile profile = addchain::bit_profile(e);
    os << "method: " << out.method << '\n';
    os << "e: " << (e.fits_u64() ? e.to_string() : "0x" + e.to_hex()) << '\n';
    os << "n: " << profile.n << "  h: " << profile.h << '\n';
    if (out.k)
        os << "k: " << *out.k << (out.s ? "  s: " + std::to_string(*out.s) : "") << '\n';
    if (out.m)
        os << "m: " << *out.m << '\n';
    os << "elements: " << out.chain.element_count() << "  r: " << out.chain.length()
       << '\n';
    if (out.map) {
        os << "v: " << out.map->entries.size() << "  u: " << *out.table_count
           << "  w0: " << out.map->w0 << " (" << std::bit_width(out.map->w0)
           << " bits)" << '\n';
        std::size_t expected = *out.table_count + (profile.n - std::bit_width(out.map->w0)) +
                               (out.map->entries.size() - 1);
        os << "formula_ok: " << (out.chain.element_count() == expected ? "true" : "false")
           << '\n';
        os << "windows:";
        for (const auto& [offset, w] : extraction_order(*out.map))
            os << ' ' << w << '@' << offset;
        os << '\n';
    }
    if (out.substituted)
        os << "substituted: " << (*out.substituted ? "true" : "false") << '\n';
    os << "chain:";
    for (const Natural& value : out.chain.elements())
        os << ' ' << value.to_string();
    os << '\n';
}

void print_chain_json(std::ostream& os, const ChainOutput& out, const Natural& e) {
    addchain::BitProfile profile = addchain::bit_profile(e);
    nlohmann::json doc{{"method", out.method},
                       {"e_hex", e.to_hex()},
                       {"n", profile.n},
                       {"h", profile.h},
                       {"elements", out.chain.element_count()},
                       {"r", out.chain.length()}};
    if (out.k)
        doc["k"] = *out.k;
    if (out.s)
        doc["s"] = *out.s;
    if (out.m)
        doc["m"] = *out.m;
    if (out.map) {
        doc["v"] = out.map->entries.size();
        doc["u"] = *out.table_count;
        doc["w0"] = out.map->w0;
        doc["w0_bits"] = std::bit_width(out.map->w0);
        nlohmann::json windows = nlohmann::json::array();
        for (const auto& [offset, w] : extraction_order(*out.map))
            windows.push_back({{"offset", offset}, {"w", w}});
        doc["windows"] = std::move(windows);
    }
    if (out.substituted)
        doc["substituted"] = *out.substituted;
    nlohmann::json steps = nlohmann::json::array();
    const auto& elements = out.chain.elements();
    for (std::size_t idx = 0; idx < elements.size(); ++idx) {
        nlohmann::json entry{{"value_hex", elements[idx].to_hex()}};
        if (idx > 0 && out.chain.has_steps()) {
            entry["i"] = out.chain.steps()[idx - 1].i;
            entry["j"] = out.chain.steps()[idx - 1].j;
        }
        steps.push_back(std::move(entry));
    }
    doc["chain"] = std::move(steps);
    os << doc.dump(2) << '\n';
}

int run_chain(const ChainRequest& req, const std::string& format) {
    ChainOutput out = build_chain(req);
    Natural e = Natural::parse(req.e_text);
    addchain::ValidationReport report = addchain::validate_chain(out.chain);
    if (!report.ok)
        throw std::runtime_error("produced chain failed validation: " + report.message);
    if (format == "chainfile")
        addchain::emit_chain(std::cout, out.chain);
    else if (format == "json")
        print_chain_json(std::cout, out, e);
    else
        print_chain_text(std::cout, out, e);
    return 0;
}

int run_validate(const std::string& path) {
    AdditionChain chain;
    try {
        if (path == "-") {
            chain = addchain::parse_chain(std::cin);
        } else {
            std::ifstream in(path);
            if (!in)
                throw std::runtime_error("cannot open '" + path + "'");
            chain = addchain::parse_chain(in);
        }
    } catch (const addchain::ChainParseError& err) {
        std::cerr << "invalid: line " << err.line() << ": " << err.what() << '\n';
        return 1;
    }
    addchain::ValidationReport report = addchain::validate_chain(chain);
    if (!report.ok) {
        std::cerr << "invalid: element " << report.index << ": " << report.message << '\n';
        return 1;
    }
    std::cout << "ok r=" << chain.length() << '\n';
    return 0;
}

int run_oracle(const std::string& e_text, std::uint64_t upto, const std::string& cache) {
    if (!e_text.empty() && upto > 0)
        throw UsageError("oracle takes --e or --upto, not both");
    if (!e_text.empty()) {
        Natural e = Natural::parse(e_text);
        if (!e.fits_u64())
            throw std::domain_error("oracle: target must fit 64 bits");
        AdditionChain witness = addchain::shortest_chain(e.to_u64());
        std::cout << "l = " << witness.length() << '\n' << "witness:";
        for (const Natural& value : witness.elements())
            std::cout << ' ' << value.to_string();
        std::cout << '\n';
        return 0;
    }
    if (upto == 0)
        throw UsageError("oracle needs --e or --upto");
    if (!cache.empty()) {
        std::ifstream existing(cache);
        if (existing) {
            std::vector<std::uint8_t> table = addchain::read_length_table(existing);
            if (table.size() > upto) {
                std::cout << "loaded " << cache << " (" << table.size() - 1
                          << " entries)" << '\n';
                return 0;
            }
        }
    }
    std::vector<std::uint8_t> table = addchain::shortest_table(upto);
    if (cache.empty()) {
        addchain::write_length_table(std::cout, table);
    } else {
        std::ofstream outfile(cache, std::ios::trunc);
        if (!outfile)
            throw std::runtime_error("cannot write '" + cache + "'");
        addchain::write_length_table(outfile, table);
        std::cout << "wrote " << cache << " (" << upto << " entries)" << '\n';
    }
    return 0;
}

struct CorpusFlags {
    std::size_t bits = 160;
    double p = 0.5;
    std::size_t count = 10;
    std::uint64_t seed = 1;
    std::string kind = "random";
};

addchain::CorpusSpec to_spec(const CorpusFlags& flags) {
    addchain::CorpusSpec spec;
    spec.bits = flags.bits;
    spec.p = flags.p;
    spec.count = flags.count;
    spec.seed = flags.seed;
    if (flags.kind == "random")
        spec.kind = addchain::CorpusKind::random_bits;
    else if (flags.kind == "sptm-favorable")
        spec.kind = addchain::CorpusKind::repeated_window;
    else
        throw UsageError("--kind must be random or sptm-favorable");
    return spec;
}

void add_corpus_flags(CLI::App* cmd, CorpusFlags& flags) {
    cmd->add_option("--bits", flags.bits, "operand bit-length");
    cmd->add_option("--p", flags.p, "bit density in (0, 1]");
    cmd->add_option("--count", flags.count, "operands to generate");
    cmd->add_option("--seed", flags.seed, "generator seed");
    cmd->add_option("--kind", flags.kind, "random | sptm-favorable");
}

int run_gen(const CorpusFlags& flags) {
    addchain::Corpus corpus = addchain::make_corpus(to_spec(flags));
    for (const Natural& e : corpus.values)
        std::cout << "0x" << e.to_hex() << '\n';
    return 0;
}

struct BenchFlags {
    CorpusFlags corpus;
    std::string methods = "wm,sptm,cwm,cwm-asa";
    std::string csv_path, json_path;
    bool timings = false;
    unsigned threads = 1;
    addchain::SweepRanges ranges;
};

int run_bench(const BenchFlags& flags) {
    addchain::SweepOptions options;
    options.ranges = flags.ranges;
    options.timings = flags.timings;
    options.threads = flags.threads;
    options.methods.clear();
    std::istringstream list(flags.methods);
    std::string name;
    while (std::getline(list, name, ',')) {
        std::optional<addchain::ChainMethod> method = addchain::parse_method(name);
        if (!method)
            throw UsageError("--methods: unknown method '" + name + "'");
        options.methods.push_back(*method);
    }
    if (options.methods.empty())
        throw UsageError("--methods: list is empty");

    std::vector<addchain::BenchRecord> records =
        addchain::run_sweep(addchain::make_corpus(to_spec(flags.corpus)), options);
    if (!flags.json_path.empty()) {
        std::ofstream json_out(flags.json_path, std::ios::trunc);
        if (!json_out)
            throw std::runtime_error("cannot write '" + flags.json_path + "'");
        addchain::write_report_json(json_out, records);
    }
    if (flags.csv_path.empty() || flags.csv_path == "-") {
        addchain::write_records_csv(std::cout, std::move(records));
    } else {
        std::ofstream csv_out(flags.csv_path, std::ios::trunc);
        if (!csv_out)
            throw std::runtime_error("cannot write '" + flags.csv_path + "'");
        addchain::write_records_csv(csv_out, std::move(records));
    }
    return 0;
}

int run_modexp(const std::string& base_text, const std::string& e_text,
               const std::string& mod_text, ChainRequest req) {
    req.e_text = e_text;
    ChainOutput out = build_chain(req);
    Natural base = Natural::parse(base_text);
    Natural modulus = Natural::parse(mod_text);
    std::cout << addchain::exponentiate_with_chain(base, out.chain, modulus).to_string()
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"addition chain generation, validation, and measurement"};
    app.require_subcommand(1);

    ChainRequest chain_req;
    std::string chain_format = "text";
    CLI::App* chain_cmd = app.add_subcommand("chain", "build one addition chain");
    chain_cmd->add_option("--method", chain_req.method,
                          "bm | bm-star | wm | sptm | cwm | cwm-asa")
        ->required();
    chain_cmd->add_option("--e", chain_req.e_text, "target (decimal, 0x hex, 0b binary)")
        ->required();
    chain_cmd->add_option("--k", chain_req.k, "window width");
    chain_cmd->add_option("--s", chain_req.s, "window gap");
    chain_cmd->add_option("--m", chain_req.m, "fold pivot (odd)");
    chain_cmd->add_flag("--best", chain_req.best, "scan the parameter range");
    chain_cmd->add_option("--k-range", chain_req.k_range, "lo..hi for --best");
    chain_cmd->add_option("--s-range", chain_req.s_range, "lo..hi for --best");
    chain_cmd->add_option("--m-range", chain_req.m_range, "lo..hi odd pivots for --best");
    chain_cmd->add_option("--format", chain_format, "text | json | chainfile")
        ->check(CLI::IsMember({"text", "json", "chainfile"}));

    std::string validate_path;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "check a chain file ('-' reads stdin)");
    validate_cmd->add_option("file", validate_path, "chain file path")->required();

    std::string oracle_e;
    std::uint64_t oracle_upto = 0;
    std::string oracle_cache;
    CLI::App* oracle_cmd =
        app.add_subcommand("oracle", "exact minimum lengths by exhaustive search");
    oracle_cmd->add_option("--e", oracle_e, "single target");
    oracle_cmd->add_option("--upto", oracle_upto, "table for all targets up to N");
    oracle_cmd->add_option("--cache", oracle_cache, "table file to reuse or write");

    CorpusFlags gen_flags;
    CLI::App* gen_cmd = app.add_subcommand("gen", "emit a reproducible operand corpus");
    add_corpus_flags(gen_cmd, gen_flags);

    BenchFlags bench_flags;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "sweep methods over a corpus and report");
    add_corpus_flags(bench_cmd, bench_flags.corpus);
    bench_flags.corpus.count = 10;
    bench_cmd->add_option("--methods", bench_flags.methods, "comma list of methods");
    bench_cmd->add_option("--csv", bench_flags.csv_path, "CSV path ('-' or empty: stdout)");
    bench_cmd->add_option("--json", bench_flags.json_path, "JSON report path");
    bench_cmd->add_flag("--timings", bench_flags.timings, "record wall-clock per cell");
    bench_cmd->add_option("--threads", bench_flags.threads, "worker threads (0 = all cores)");
    bench_cmd->add_option("--wm-k-max", bench_flags.ranges.wm_k_max, "wm k range cap");
    bench_cmd->add_option("--sptm-m-max", bench_flags.ranges.sptm_m_max, "sptm pivot cap");
    bench_cmd->add_option("--cwm-k-max", bench_flags.ranges.cwm_k_max, "cwm k range cap");
    bench_cmd->add_option("--cwm-s-max", bench_flags.ranges.cwm_s_max, "cwm s range cap");
    bench_cmd->add_option("--asa-k-max", bench_flags.ranges.asa_k_max, "cwm-asa k range cap");
    bench_cmd->add_option("--asa-s-max", bench_flags.ranges.asa_s_max, "cwm-asa s range cap");

    std::string modexp_base, modexp_e, modexp_mod;
    ChainRequest modexp_req;
    modexp_req.method = "bm";
    CLI::App* modexp_cmd = app.add_subcommand("modexp", "modular exponentiation by chain");
    modexp_cmd->add_option("--base", modexp_base, "base")->required();
    modexp_cmd->add_option("--e", modexp_e, "exponent")->required();
    modexp_cmd->add_option("--mod", modexp_mod, "modulus")->required();
    modexp_cmd->add_option("--method", modexp_req.method, "chain method (default bm)");
    modexp_cmd->add_option("--k", modexp_req.k, "window width");
    modexp_cmd->add_option("--s", modexp_req.s, "window gap");
    modexp_cmd->add_option("--m", modexp_req.m, "fold pivot (odd)");
    modexp_cmd->add_flag("--best", modexp_req.best, "scan the parameter range");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 2;
    }

    try {
        if (app.got_subcommand(chain_cmd))
            return run_chain(chain_req, chain_format);
        if (app.got_subcommand(validate_cmd))
            return run_validate(validate_path);
        if (app.got_subcommand(oracle_cmd))
            return run_oracle(oracle_e, oracle_upto, oracle_cache);
        if (app.got_subcommand(gen_cmd))
            return run_gen(gen_flags);
        if (app.got_subcommand(bench_cmd))
            return run_bench(bench_flags);
        if (app.got_subcommand(modexp_cmd))
            return run_modexp(modexp_base, modexp_e, modexp_mod, modexp_req);
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 2;
}
