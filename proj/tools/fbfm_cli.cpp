// fbfm: build, query, inspect and benchmark fixed-block FM-indexes.
//
// Machine-readable output goes to stdout, diagnostics to stderr.
// Exit status: 0 success, 1 user error, 2 internal invariant failure.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fbfm/fbfm.hpp"

namespace {

using namespace fbfm;
using clock_type = std::chrono::steady_clock;

struct user_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct invariant_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw user_error("cannot read " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw user_error("cannot read " + path);
    return data;
}

Text read_text(const std::string& path) {
    const auto bytes = read_file(path);
    if (bytes.empty()) throw user_error("empty text: " + path);
    return Text::from_bytes(bytes);
}

fm_index read_index(const std::string& path) {
    const auto bytes = read_file(path);
    try {
        return deserialize_bytes(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    } catch (const format_error& e) {
        throw user_error(path + ": " + e.what());
    }
}

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

std::string fixed(double v, int digits = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

// ---- build ------------------------------------------------------------------

struct build_options {
    std::string text, out, variant = "fixed", shape = "huffman";
    std::optional<std::size_t> block_size;
    unsigned rrr_block = rrr_rank_bitvector::default_block_bits;
};

int run_build(const build_options& o) {
    index_config cfg;
    const auto v = parse_variant(o.variant);
    if (!v) throw user_error("unknown variant '" + o.variant + "' (ssa, ssa-rrr, fixed, fixed-rrr)");
    cfg.variant = *v;
    cfg.block_size = o.block_size;
    cfg.rrr_block_bits = o.rrr_block;
    cfg.shape = o.shape == "balanced" ? wt_shape::balanced : wt_shape::huffman;
    if (o.block_size && *o.block_size == 0) throw user_error("--block-size must be positive");
    if (o.rrr_block < 1 || o.rrr_block > rrr::max_block_bits) throw user_error("--rrr-block must be in [1, 63]");

    const auto text = read_text(o.text);
    const auto t0 = clock_type::now();
    const auto ix = fm_index::build(text, cfg);
    const double build_ms = ms_since(t0);
    std::size_t bytes = 0;
    try {
        bytes = save_index(ix, o.out);
    } catch (const std::runtime_error& e) {
        throw user_error(e.what());
    }
    const auto r = ix.size_report();
    std::cout << "n=" << ix.size() << "\n"
              << "sigma=" << ix.sigma() << "\n"
              << "variant=" << variant_name(ix.variant()) << "\n"
              << "block_size=" << ix.block_size() << "\n"
              << "blocks=" << ix.block_count() << "\n"
              << "build_ms=" << fixed(build_ms, 3) << "\n"
              << "file_bytes=" << bytes << "\n"
              << "bits_per_symbol=" << fixed(r.bits_per_symbol()) << "\n";
    return 0;
}

// ---- count ------------------------------------------------------------------

int run_count(const std::string& index_path, const std::vector<std::string>& inline_patterns,
              const std::string& patterns_file) {
    if (inline_patterns.empty() && patterns_file.empty()) throw user_error("no patterns given");
    const auto ix = read_index(index_path);
    for (const auto& p : inline_patterns) std::cout << ix.count(p) << "\n";
    if (!patterns_file.empty()) {
        std::istringstream in(read_file(patterns_file));
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::cout << ix.count(line) << "\n";
        }
    }
    return 0;
}

// ---- stats ------------------------------------------------------------------

int run_stats(const std::string& index_path) {
    const auto ix = read_index(index_path);
    const auto r = ix.size_report();
    const std::pair<const char*, std::size_t> rows[] = {
        {"wavelet_payload", r.wavelet_payload}, {"rank_directories", r.rank_directories},
        {"boundary_occ", r.boundary_occ},       {"topology", r.topology},
        {"c_array", r.c_array},                 {"remap", r.remap},
        {"header", r.header},
    };
    const double n = static_cast<double>(r.n);
    std::cerr << std::left << std::setw(18) << "component" << std::right << std::setw(14) << "bits" << std::setw(12)
              << "bits/sym" << "\n";
    for (const auto& [name, bits] : rows)
        std::cerr << std::left << std::setw(18) << name << std::right << std::setw(14) << bits << std::setw(12)
                  << fixed(static_cast<double>(bits) / n, 4) << "\n";
    std::cerr << std::left << std::setw(18) << "total" << std::right << std::setw(14) << r.total() << std::setw(12)
              << fixed(r.bits_per_symbol(), 4) << "\n";

    std::cout << "variant=" << variant_name(ix.variant()) << "\n"
              << "n=" << ix.size() << "\n"
              << "sigma=" << ix.sigma() << "\n"
              << "block_size=" << ix.block_size() << "\n"
              << "blocks=" << ix.block_count() << "\n";
    for (const auto& [name, bits] : rows) std::cout << name << "=" << bits << "\n";
    std::cout << "total=" << r.total() << "\n"
              << "bits_per_symbol=" << fixed(r.bits_per_symbol()) << "\n";
    return 0;
}

// ---- bench ------------------------------------------------------------------

struct bench_options {
    std::string index, text;
    std::size_t patterns = 10000, length = 20, repeats = 3, threads = 1;
    std::uint64_t seed = 42;
    bool header = true;
};

/// Start offsets of pattern_count substrings of the raw text (the sentinel is
/// never part of a pattern).
std::vector<std::string> bench_patterns(const std::string& raw, const bench_options& o) {
    if (o.length == 0 || o.length > raw.size()) throw user_error("--length must be in [1, text length]");
    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<std::size_t> start(0, raw.size() - o.length);
    std::vector<std::string> out;
    out.reserve(o.patterns);
    for (std::size_t i = 0; i < o.patterns; ++i) out.push_back(raw.substr(start(rng), o.length));
    return out;
}

double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5);
    return v[std::min(idx, v.size() - 1)];
}

int run_bench(const bench_options& o) {
    if (o.patterns == 0 || o.repeats == 0 || o.threads == 0)
        throw user_error("--patterns, --repeats and --threads must be positive");
    const auto ix = read_index(o.index);
    const auto raw = read_file(o.text);
    if (raw.size() + 1 != ix.size()) throw user_error("text does not match index (length differs)");
    const auto patterns = bench_patterns(raw, o);

    std::vector<std::uint64_t> reference(patterns.size());
    for (std::size_t i = 0; i < patterns.size(); ++i) reference[i] = ix.count(patterns[i]);
    if (std::find(reference.begin(), reference.end(), 0u) != reference.end())
        throw user_error("text does not match index (extracted pattern not found)");

    const double bps = ix.size_report().bits_per_symbol();
    if (o.header) std::cout << "variant,b,bits_per_symbol,mean_us\n";
    std::vector<double> run_means;
    for (std::size_t rep = 0; rep < o.repeats; ++rep) {
        std::vector<double> lat(patterns.size());
        std::vector<std::uint64_t> got(patterns.size());
        auto worker = [&](std::size_t first, std::size_t last) {
            for (std::size_t i = first; i < last; ++i) {
                const auto t0 = clock_type::now();
                got[i] = ix.count(patterns[i]);
                lat[i] = std::chrono::duration<double, std::micro>(clock_type::now() - t0).count();
            }
        };
        const auto wall0 = clock_type::now();
        if (o.threads == 1) {
            worker(0, patterns.size());
        } else {
            std::vector<std::thread> pool;
            const std::size_t per = (patterns.size() + o.threads - 1) / o.threads;
            for (std::size_t k = 0; k < o.threads; ++k) {
                const std::size_t a = std::min(patterns.size(), k * per), b = std::min(patterns.size(), a + per);
                pool.emplace_back(worker, a, b);
            }
            for (auto& th : pool) th.join();
        }
        const double wall_ms = ms_since(wall0);
        if (got != reference) throw invariant_failure("counts changed between repeats");
        const double mean = std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());
        run_means.push_back(mean);
        std::cout << variant_name(ix.variant()) << "," << ix.block_size() << "," << fixed(bps) << "," << fixed(mean, 4)
                  << "\n";
        std::cerr << "run " << rep + 1 << ": mean_us=" << fixed(mean, 4) << " median_us=" << fixed(percentile(lat, 0.5), 4)
                  << " p99_us=" << fixed(percentile(lat, 0.99), 4) << " total_ms=" << fixed(wall_ms, 3) << "\n";
    }
    const std::uint64_t matches = std::accumulate(reference.begin(), reference.end(), std::uint64_t{0});
    std::cerr << "patterns=" << patterns.size() << " length=" << o.length << " seed=" << o.seed
              << " threads=" << o.threads << " total_matches=" << matches << "\n"
              << "min_mean_us=" << fixed(*std::min_element(run_means.begin(), run_means.end()), 4)
              << " mean_of_means_us="
              << fixed(std::accumulate(run_means.begin(), run_means.end(), 0.0) / static_cast<double>(run_means.size()), 4)
              << "\n";
    return 0;
}

// ---- entropy ----------------------------------------------------------------

int run_entropy(const std::string& path, std::size_t k_max) {
    const auto text = read_text(path);
    const auto r = entropy_report(text, k_max);
    std::cout << "n=" << r.n << "\n"
              << "sigma=" << r.sigma << "\n"
              << "H0=" << fixed(r.h0) << "\n";
    for (std::size_t k = 1; k <= r.hk.size(); ++k) std::cout << "H" << k << "=" << fixed(r.hk[k - 1]) << "\n";
    return 0;
}

// ---- verify-bounds ----------------------------------------------------------

int run_verify(const std::string& path, std::size_t k, std::optional<std::size_t> block) {
    if (block && *block == 0) throw user_error("--b must be positive");
    const auto text = read_text(path);
    const std::size_t b = block ? *block : default_block_size(text.size(), text.sigma());
    const auto l = bwt(text);
    const double n = static_cast<double>(text.size());

    const auto contexts = context_partition(l, text, k);
    const double context_bits = partition_entropy(l.l, contexts);
    const double nhk = n * hk(text, k);
    const double residual = std::abs(context_bits - nhk);
    const bool identity_ok = residual <= 1e-9 * std::max(1.0, nhk);

    const auto sides = verify_block_bound(l.l, contexts, b);
    const bool bound_ok = sides.holds();
    const double slack = static_cast<double>(contexts.block_count() - 1) * static_cast<double>(b);

    std::cout << "n=" << text.size() << "\n"
              << "k=" << k << "\n"
              << "b=" << b << "\n"
              << "context_blocks=" << contexts.block_count() << "\n"
              << "context_entropy_bits=" << fixed(context_bits) << "\n"
              << "n_hk_bits=" << fixed(nhk) << "\n"
              << "context_residual=" << std::setprecision(3) << std::scientific << residual << std::defaultfloat << "\n"
              << "fixed_block_bits=" << fixed(sides.lhs) << "\n"
              << "bound_bits=" << fixed(sides.rhs) << "\n"
              << "overhead_bits=" << fixed(sides.lhs - context_bits) << "\n"
              << "allowed_overhead_bits=" << fixed(slack) << "\n"
              << "context_identity " << (identity_ok ? "PASS" : "FAIL") << "\n"
              << "block_bound " << (bound_ok ? "PASS" : "FAIL") << "\n";
    return identity_ok && bound_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed-block compressed FM-index tool"};
    app.require_subcommand(1);

    build_options bo;
    auto* build = app.add_subcommand("build", "Build an index from a text file");
    build->add_option("text", bo.text, "Input text file")->required();
    build->add_option("-o,--output", bo.out, "Index file to write")->required();
    build->add_option("--variant", bo.variant, "ssa | ssa-rrr | fixed | fixed-rrr")->capture_default_str();
    build->add_option("--block-size", bo.block_size, "Block size for fixed variants (default sigma*ceil(log2 n)^2)");
    build->add_option("--rrr-block", bo.rrr_block, "RRR block width in bits")->capture_default_str();
    build->add_option("--shape", bo.shape, "Wavelet tree shape")
        ->check(CLI::IsMember({"huffman", "balanced"}))
        ->capture_default_str();

    std::string count_index, patterns_file;
    std::vector<std::string> inline_patterns;
    auto* count = app.add_subcommand("count", "Count occurrences of patterns");
    count->add_option("index", count_index, "Index file")->required();
    count->add_option("patterns", inline_patterns, "Patterns to count");
    count->add_option("-f,--patterns-file", patterns_file, "File with one pattern per line");

    std::string stats_index;
    auto* stats = app.add_subcommand("stats", "Print the index size breakdown");
    stats->add_option("index", stats_index, "Index file")->required();

    bench_options bench_o;
    auto* bench = app.add_subcommand("bench", "Time count queries on patterns extracted from the text");
    bench->add_option("index", bench_o.index, "Index file")->required();
    bench->add_option("text", bench_o.text, "Text the index was built from")->required();
    bench->add_option("--patterns", bench_o.patterns, "Number of patterns")->capture_default_str();
    bench->add_option("--length", bench_o.length, "Pattern length")->capture_default_str();
    bench->add_option("--seed", bench_o.seed, "Pattern sampling seed")->capture_default_str();
    bench->add_option("--repeats", bench_o.repeats, "Timing repetitions")->capture_default_str();
    bench->add_option("--threads", bench_o.threads, "Query threads")->capture_default_str();
    bench->add_flag("!--no-header", bench_o.header, "Omit the CSV header line");

    std::string entropy_text;
    std::size_t k_max = 0;
    auto* entropy = app.add_subcommand("entropy", "Empirical entropies of a text");
    entropy->add_option("text", entropy_text, "Text file")->required();
    entropy->add_option("-k,--k-max", k_max, "Highest context order")->capture_default_str();

    std::string verify_text;
    std::size_t verify_k = 2;
    std::optional<std::size_t> verify_b;
    auto* verify = app.add_subcommand("verify-bounds", "Check the context-block identity and fixed-block bound");
    verify->add_option("text", verify_text, "Text file")->required();
    verify->add_option("-k,--k", verify_k, "Context order")->capture_default_str();
    verify->add_option("-b,--b", verify_b, "Fixed block size (default sigma*ceil(log2 n)^2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*build) return run_build(bo);
        if (*count) return run_count(count_index, inline_patterns, patterns_file);
        if (*stats) return run_stats(stats_index);
        if (*bench) return run_bench(bench_o);
        if (*entropy) return run_entropy(entropy_text, k_max);
        if (*verify) return run_verify(verify_text, verify_k, verify_b);
    } catch (const user_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const invariant_failure& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
