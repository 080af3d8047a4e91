// Acceptance suite: one PASS/FAIL/SKIP line per criterion, exit 1 on any FAIL.
//
// Optional criterion 8 reads the Pizza&Chili 100MB files from the directory in
// FBFM_PIZZACHILI_DIR (xml, dna, english, sources, with or without the
// ".100MB" suffix) and is skipped when the variable is unset.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fbfm/fbfm.hpp"
#include "support/oracles.hpp"

using namespace fbfm;

namespace {

// Tolerances pinned by the criteria.
constexpr double identity_tol = 1e-9;   // criteria 3 and 4, relative to max(1, |rhs|)
constexpr double bound_tol = 1e-9;      // criteria 4, 5 and 6, same convention
constexpr double fixed_vs_ssa = 0.1;    // criterion 7, bits per symbol
constexpr double h0_tol = 0.01;         // criterion 8, bits per symbol
constexpr double count_time_s = 120.0;  // criterion 1 runtime budget

constexpr index_variant all_variants[] = {index_variant::ssa, index_variant::ssa_rrr, index_variant::fixed_block,
                                          index_variant::fixed_block_rrr};

enum class verdict { pass, fail, skip };

struct outcome {
    verdict v;
    std::string detail;
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }
bool at_most(double a, double b, double tol) { return a <= b + tol * std::max(1.0, std::abs(b)); }

index_config config(index_variant v, std::size_t b, unsigned t = 15) {
    index_config cfg;
    cfg.variant = v;
    cfg.block_size = b;
    cfg.rrr_block_bits = t;
    return cfg;
}

std::string str(double v, int digits = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

// 1 -----------------------------------------------------------------------------

outcome count_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    const std::size_t sigmas[] = {2, 4, 26, 100};
    std::size_t queries = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        const std::size_t sigma = sigmas[iter % 4];
        const std::size_t len = 1 + rng() % 10000;
        const auto t = iter % 5 == 4 ? oracle::repetitive_text(rng, len, sigma, 1 + rng() % 50)
                                     : oracle::random_text(rng, len, sigma);
        const auto b = bwt(t);
        const auto patterns = oracle::sample_patterns(rng, t, 70, 40, 16);
        const std::size_t blk = 1 + rng() % std::min<std::size_t>(len + 1, 2048);
        const auto rrr_bits = 1 + static_cast<unsigned>(rng() % 63);
        std::vector<fm_index> indexes;
        for (auto v : all_variants) indexes.push_back(fm_index::build(b, t.remap(), config(v, blk, rrr_bits)));
        for (const auto& p : patterns) {
            const auto expected = naive_count(t, p);
            for (const auto& ix : indexes) {
                ++queries;
                if (ix.count_codes(p) != expected)
                    return {verdict::fail, "text " + std::to_string(iter) + " variant " +
                                               std::string(variant_name(ix.variant())) + " miscounts"};
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string detail = "1000 texts, " + std::to_string(queries) + " queries, " + str(secs, 1) + " s";
    if (secs > count_time_s) return {verdict::fail, detail + " exceeds " + str(count_time_s, 0) + " s"};
    return {verdict::pass, detail};
}

// 2 -----------------------------------------------------------------------------

template <class BV>
bool bitvector_agrees(const std::string& bits, unsigned t) {
    const auto buf = bit_buffer::from_string(bits);
    const BV bv = [&] {
        if constexpr (std::is_same_v<BV, rrr_rank_bitvector>)
            return BV(buf, {t});
        else
            return BV(buf);
    }();
    std::uint64_t ones = 0;
    for (std::size_t j = 0; j <= bits.size(); ++j) {
        if (bv.rank1(j) != ones) return false;
        if (j < bits.size()) ones += bits[j] == '1';
    }
    return true;
}

template <class BV>
bool tree_agrees(const std::vector<symbol_t>& x, wt_shape shape) {
    const wavelet_tree<BV> wt(x, shape);
    std::vector<std::uint64_t> running(max_sigma + 1, 0);
    for (std::size_t j = 0; j <= x.size(); ++j) {
        for (std::size_t c = 0; c <= max_sigma; ++c)
            if (wt.rank(static_cast<symbol_t>(c), j) != running[c]) return false;
        if (j < x.size()) ++running[x[j]];
    }
    return true;
}

outcome rank_equivalence() {
    std::mt19937_64 rng(2002);
    std::size_t vectors = 0, trees = 0;
    for (int iter = 0; iter < 300; ++iter) {
        const std::size_t m = rng() % 2049;
        const double p = std::vector<double>{0.5, 0.1, 0.01, 0.9}[iter % 4];
        const auto bits = oracle::random_bits_string(rng, m, p);
        const auto t = 1 + static_cast<unsigned>(rng() % 63);
        if (!bitvector_agrees<plain_rank_bitvector>(bits, 0) || !bitvector_agrees<rrr_rank_bitvector>(bits, t))
            return {verdict::fail, "bitvector of length " + std::to_string(m)};
        vectors += 2;
    }
    for (int iter = 0; iter < 40; ++iter) {
        const std::size_t sigma = std::vector<std::size_t>{2, 3, 5, 16, 100, 257}[iter % 6];
        const auto x = oracle::random_symbols(rng, 1 + rng() % 2048, sigma);
        for (auto shape : {wt_shape::balanced, wt_shape::huffman}) {
            if (!tree_agrees<plain_rank_bitvector>(x, shape) || !tree_agrees<rrr_rank_bitvector>(x, shape))
                return {verdict::fail, "wavelet tree over sigma " + std::to_string(sigma)};
            trees += 2;
        }
    }
    return {verdict::pass, std::to_string(vectors) + " bitvectors, " + std::to_string(trees) + " trees, every (c, j)"};
}

// 3 -----------------------------------------------------------------------------

outcome context_identity() {
    std::mt19937_64 rng(3003);
    double worst = 0;
    int texts = 0;
    for (int iter = 0; iter < 120; ++iter) {
        const std::size_t len = 1 + rng() % 3000;
        Text t = [&] {
            switch (iter % 4) {
                case 0: return oracle::random_text(rng, len, 2 + rng() % 30);
                case 1: return oracle::markov2_text(rng, len, 3 + rng() % 20);
                case 2: return oracle::repetitive_text(rng, len, 2 + rng() % 10, 1 + rng() % 30, 0.02);
                default: return Text::from_bytes(std::string(len / 2 + 1, 'a') + std::string(len / 3 + 1, 'b'));
            }
        }();
        const auto b = bwt(t);
        for (std::size_t k = 0; k <= 3; ++k) {
            const double lhs = partition_entropy(b.l, context_partition(b, t, k));
            const double rhs = static_cast<double>(t.size()) * oracle::direct_hk(t.data(), k);
            const double rel = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
            worst = std::max(worst, rel);
            if (!close(lhs, rhs, identity_tol))
                return {verdict::fail, "text " + std::to_string(iter) + " k=" + std::to_string(k)};
        }
        ++texts;
    }
    std::ostringstream os;
    os << texts << " texts, k=0..3, worst relative error " << worst;
    return {verdict::pass, os.str()};
}

// 4 -----------------------------------------------------------------------------

outcome concatenation_chain() {
    std::mt19937_64 rng(4004);
    for (int iter = 0; iter < 10000; ++iter) {
        const auto x = oracle::random_symbols(rng, 1 + rng() % 100, 1 + rng() % 12);
        const auto y = oracle::random_symbols(rng, 1 + rng() % 100, 1 + rng() % 12, static_cast<symbol_t>(rng() % 4));
        const auto t = concat_entropy_terms(x, y);
        const double total = static_cast<double>(x.size() + y.size());
        const bool ok = t.delta >= -bound_tol && close(t.delta, t.h_xy - t.sum_hc, identity_tol) &&
                        at_most(t.delta, t.h_xy, bound_tol) && at_most(t.h_xy, total, bound_tol);
        if (!ok) return {verdict::fail, "pair " + std::to_string(iter)};
    }
    const auto worst = concat_entropy_terms(oracle::codes({1, 1}), oracle::codes({2, 2}));
    if (worst.delta != 4.0) return {verdict::fail, "(AA, BB) gives delta " + str(worst.delta, 12)};
    return {verdict::pass, "10000 pairs; (AA, BB) delta = 4 exactly"};
}

// 5 -----------------------------------------------------------------------------

outcome fixed_block_bound() {
    std::mt19937_64 rng(5005);
    double tightest = 1e300;
    for (int iter = 0; iter < 1000; ++iter) {
        const std::size_t len = 1 + rng() % 4000;
        const auto t = iter % 2 ? oracle::markov2_text(rng, len, 2 + rng() % 16)
                                : oracle::random_text(rng, len, 2 + rng() % 16);
        const auto b = bwt(t);
        const std::size_t k = rng() % 5;
        const std::size_t blk = 1 + rng() % t.size();
        const auto sides = verify_block_bound(b.l, context_partition(b, t, k), blk);
        if (!sides.holds(bound_tol))
            return {verdict::fail, "triple " + std::to_string(iter) + ": " + str(sides.lhs) + " > " + str(sides.rhs)};
        tightest = std::min(tightest, sides.rhs - sides.lhs);
    }
    return {verdict::pass, "1000 (text, k, b) triples; smallest margin " + str(tightest, 3) + " bits"};
}

// 6 -----------------------------------------------------------------------------

template <class BV>
bool huffman_bound_holds(const std::vector<symbol_t>& x) {
    const wavelet_tree<BV> huff(x, wt_shape::huffman);
    const wavelet_tree<BV> bal(x, wt_shape::balanced);
    const double n = static_cast<double>(x.size());
    const auto sigma_local = bal.alphabet().size();
    return at_most(static_cast<double>(huff.bitvector_length()), n * (h0(x) + 1), bound_tol) &&
           bal.bitvector_length() == x.size() * bits::ceil_log2(sigma_local);
}

outcome huffman_bound() {
    std::mt19937_64 rng(6006);
    std::size_t trees = 0;
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<symbol_t> x;
        const std::size_t len = 1 + rng() % 5000;
        const std::size_t sigma = 1 + rng() % 257;
        if (iter % 2) {
            x = oracle::random_symbols(rng, len, sigma);
        } else {
            std::geometric_distribution<std::size_t> geo(0.05 + 0.9 * static_cast<double>(rng() % 100) / 100);
            for (std::size_t i = 0; i < len; ++i) x.push_back(static_cast<symbol_t>(std::min(geo(rng), sigma - 1)));
        }
        if (!huffman_bound_holds<plain_rank_bitvector>(x)) return {verdict::fail, "sequence " + std::to_string(iter)};
        ++trees;
    }
    // every block tree of fixed-block indexes
    for (int iter = 0; iter < 20; ++iter) {
        const auto t = oracle::markov2_text(rng, 20000, 2 + rng() % 40);
        const auto b = bwt(t);
        const std::size_t blk = 1 + rng() % 3000;
        const auto part = fixed_partition(b.l.size(), blk);
        for (std::size_t i = 0; i < part.block_count(); ++i) {
            const auto [lo, hi] = part.block(i);
            const std::vector<symbol_t> piece(b.l.begin() + static_cast<std::ptrdiff_t>(lo),
                                              b.l.begin() + static_cast<std::ptrdiff_t>(hi));
            if (!huffman_bound_holds<plain_rank_bitvector>(piece))
                return {verdict::fail, "block " + std::to_string(i) + " of index " + std::to_string(iter)};
            ++trees;
        }
    }
    return {verdict::pass, std::to_string(trees) + " sequences, Huffman and balanced tree each"};
}

// 7 -----------------------------------------------------------------------------

double bits_per_symbol(const Bwt& b, const Text& t, index_variant v) {
    index_config cfg;
    cfg.variant = v;
    return fm_index::build(b, t.remap(), cfg).size_report().bits_per_symbol();
}

outcome compression_effect() {
    std::mt19937_64 rng(7007);
    const auto markov = oracle::markov2_text(rng, 1000000, 17, 0.9);
    const auto mb = bwt(markov);
    const double h0m = h0(markov.data()), h2m = hk(markov, 2);
    const double ssa = bits_per_symbol(mb, markov, index_variant::ssa);
    const double fixed = bits_per_symbol(mb, markov, index_variant::fixed_block);
    const double fixed_rrr = bits_per_symbol(mb, markov, index_variant::fixed_block_rrr);

    const auto uniform = oracle::random_text(rng, 1000000, 5);
    const auto ub = bwt(uniform);
    const double u_ssa_rrr = bits_per_symbol(ub, uniform, index_variant::ssa_rrr);
    const double u_fixed_rrr = bits_per_symbol(ub, uniform, index_variant::fixed_block_rrr);

    const bool ok = h2m < h0m / 2 && fixed_rrr < ssa && fixed < ssa + fixed_vs_ssa && u_ssa_rrr <= u_fixed_rrr;
    return {ok ? verdict::pass : verdict::fail,
            "markov H0=" + str(h0m, 3) + " H2=" + str(h2m, 3) + ": ssa " + str(ssa, 3) + ", fixed " + str(fixed, 3) +
                ", fixed-rrr " + str(fixed_rrr, 3) + "; uniform sigma 4: ssa-rrr " + str(u_ssa_rrr, 3) +
                " <= fixed-rrr " + str(u_fixed_rrr, 3)};
}

// 8 -----------------------------------------------------------------------------

outcome corpus_entropy() {
    const char* dir = std::getenv("FBFM_PIZZACHILI_DIR");
    if (!dir || !*dir) return {verdict::skip, "FBFM_PIZZACHILI_DIR not set"};
    const std::pair<const char*, double> expected[] = {{"xml", 5.23}, {"dna", 1.98}, {"english", 4.53}, {"sources", 5.54}};
    std::string detail;
    bool ok = true;
    for (const auto& [name, h] : expected) {
        std::filesystem::path p = std::filesystem::path(dir) / (std::string(name) + ".100MB");
        if (!std::filesystem::exists(p)) p = std::filesystem::path(dir) / name;
        std::ifstream in(p, std::ios::binary);
        if (!in) return {verdict::fail, "cannot read " + p.string()};
        const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (bytes.empty()) return {verdict::fail, p.string() + " is empty"};
        const double got = h0(Text::from_bytes(bytes).data());
        ok = ok && std::abs(got - h) <= h0_tol;
        detail += std::string(detail.empty() ? "" : ", ") + name + " " + str(got, 3) + " (" + str(h, 2) + ")";
    }
    return {ok ? verdict::pass : verdict::fail, detail};
}

// 9 -----------------------------------------------------------------------------

outcome serialization() {
    std::mt19937_64 rng(9009);
    std::size_t files = 0, rejected = 0;
    for (int iter = 0; iter < 40; ++iter) {
        const auto t = iter % 2 ? oracle::markov2_text(rng, 1 + rng() % 5000, 2 + rng() % 50)
                                : oracle::random_text(rng, rng() % 5000, 2 + rng() % 120);
        const auto patterns = oracle::sample_patterns(rng, t, 60, 40);
        for (auto v : all_variants) {
            const auto cfg = config(v, 1 + rng() % 700, 1 + static_cast<unsigned>(rng() % 63));
            const auto ix = fm_index::build(t, cfg);
            const auto bytes = serialize_bytes(ix);
            if (serialize_bytes(fm_index::build(t, cfg)) != bytes)
                return {verdict::fail, "two builds serialize differently"};
            const auto back = deserialize_bytes(bytes);
            for (const auto& p : patterns)
                if (back.count_codes(p) != ix.count_codes(p)) return {verdict::fail, "round trip changes a count"};
            if (serialize_bytes(back) != bytes) return {verdict::fail, "round trip changes the bytes"};
            ++files;

            // damaged copies: one flipped bit, a truncation, a tampered C array
            for (int d = 0; d < 25; ++d) {
                auto bad = bytes;
                if (d == 0) {
                    bad.resize(rng() % bytes.size());
                } else {
                    const auto at = rng() % bad.size();
                    bad[at] = static_cast<std::uint8_t>(bad[at] ^ (1u << (rng() % 8)));
                }
                try {
                    (void)deserialize_bytes(bad);
                    return {verdict::fail, "damaged file accepted"};
                } catch (const format_error& e) {
                    if (std::string(e.what()).empty()) return {verdict::fail, "empty diagnostic"};
                    ++rejected;
                }
            }
        }
    }
    // C array tamper on BANANA must name the check
    auto bytes = serialize_bytes(fm_index::build(Text::from_bytes("BANANA"), config(index_variant::fixed_block, 3)));
    const std::size_t c1 = 8 + 2 + 1 + 1 + 4 * 8 + 256 * 2 + 8;
    bytes[c1] = 6;
    try {
        (void)deserialize_bytes(bytes);
        return {verdict::fail, "tampered C array accepted"};
    } catch (const format_error& e) {
        if (std::string(e.what()) != "corrupt index: c_array") return {verdict::fail, std::string("got ") + e.what()};
    }
    return {verdict::pass, std::to_string(files) + " files round-tripped byte-identically, " + std::to_string(rejected) +
                               " damaged copies rejected"};
}

// 10 ----------------------------------------------------------------------------

outcome bwt_round_trip() {
    std::mt19937_64 rng(10010);
    for (int iter = 0; iter < 500; ++iter) {
        const auto t = iter % 3 == 2 ? oracle::repetitive_text(rng, rng() % 5000, 2 + rng() % 60, 1 + rng() % 20)
                                     : oracle::random_text(rng, rng() % 5000, 2 + rng() % 255);
        const auto back = inverse_bwt(bwt(t));
        if (!std::equal(t.data().begin(), t.data().end(), back.data().begin(), back.data().end()))
            return {verdict::fail, "text " + std::to_string(iter)};
    }
    return {verdict::pass, "500 texts"};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<outcome()>> criteria[] = {
        {"count equals naive count on all four variants", count_equivalence},
        {"rank equals naive scan for bitvectors and wavelet trees", rank_equivalence},
        {"context blocks of L sum to n Hk", context_identity},
        {"concatenation entropy chain", concatenation_chain},
        {"fixed-block entropy bound", fixed_block_bound},
        {"Huffman and balanced wavelet tree lengths", huffman_bound},
        {"compression effect at desk scale", compression_effect},
        {"corpus zero-order entropies", corpus_entropy},
        {"serialization round trip and rejection", serialization},
        {"BWT round trip", bwt_round_trip},
    };
    int failures = 0, id = 0;
    for (const auto& [name, check] : criteria) {
        ++id;
        outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {verdict::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.v == verdict::pass ? "PASS" : o.v == verdict::skip ? "SKIP" : "FAIL";
        failures += o.v == verdict::fail;
        std::cout << tag << " " << id << " " << name << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
