#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fbfm/bits.hpp"
#include "fbfm/rank_bitvector.hpp"
#include "fbfm/text.hpp"
#include "fbfm/wavelet_tree.hpp"

namespace fbfm {

enum class index_variant : std::uint8_t { ssa = 0, ssa_rrr = 1, fixed_block = 2, fixed_block_rrr = 3 };

constexpr bool uses_rrr(index_variant v) noexcept {
    return v == index_variant::ssa_rrr || v == index_variant::fixed_block_rrr;
}
constexpr bool is_fixed_block(index_variant v) noexcept {
    return v == index_variant::fixed_block || v == index_variant::fixed_block_rrr;
}

/// CLI spelling of a variant.
constexpr std::string_view variant_name(index_variant v) noexcept {
    switch (v) {
        case index_variant::ssa: return "ssa";
        case index_variant::ssa_rrr: return "ssa-rrr";
        case index_variant::fixed_block: return "fixed";
        case index_variant::fixed_block_rrr: return "fixed-rrr";
    }
    return "unknown";
}

inline std::optional<index_variant> parse_variant(std::string_view s) noexcept {
    if (s == "ssa") return index_variant::ssa;
    if (s == "ssa-rrr" || s == "ssa_rrr") return index_variant::ssa_rrr;
    if (s == "fixed" || s == "fixed-block" || s == "fixed_block") return index_variant::fixed_block;
    if (s == "fixed-rrr" || s == "fixed-block-rrr" || s == "fixed_block_rrr") return index_variant::fixed_block_rrr;
    return std::nullopt;
}

/// sigma * ceil(log2 n)^2, clamped to [64, n].
inline std::size_t default_block_size(std::size_t n, std::size_t sigma) {
    if (n < 2) throw std::invalid_argument("default block size needs n >= 2");
    const std::size_t lg = bits::ceil_log2(n);
    const std::size_t b = std::max<std::size_t>(sigma * lg * lg, 64);
    return std::min(b, n);
}

struct index_config {
    index_variant variant = index_variant::fixed_block;
    /// Fixed-block variants only; default_block_size() when unset.
    std::optional<std::size_t> block_size;
    unsigned rrr_block_bits = rrr_rank_bitvector::default_block_bits;
    wt_shape shape = wt_shape::huffman;
};

/// Exact bit accounting of an index.
struct index_size_report {
    std::size_t n = 0;
    std::size_t wavelet_payload = 0;   ///< raw bitvector bits (plain) or classes+offsets (rrr)
    std::size_t rank_directories = 0;  ///< rank directories, samples, per-bitvector headers
    std::size_t boundary_occ = 0;      ///< per-block cumulative symbol counts
    std::size_t topology = 0;          ///< wavelet tree codebooks, alphabets, node links
    std::size_t c_array = 0;
    std::size_t remap = 0;
    std::size_t header = 0;

    std::size_t total() const noexcept {
        return wavelet_payload + rank_directories + boundary_occ + topology + c_array + remap + header;
    }
    double bits_per_symbol() const noexcept { return n == 0 ? 0.0 : static_cast<double>(total()) / static_cast<double>(n); }
};

/// FM-index whose BWT is cut into fixed-size blocks, each held in its own
/// wavelet tree over the block's local alphabet, plus cumulative symbol counts
/// at every block start. A single block covering all of L gives the SSA layout.
template <rank_backend Backend>
class blocked_fm_index {
   public:
    using tree_type = wavelet_tree<Backend>;
    using params_type = typename Backend::params_type;

    /// One left-to-right pass over L. `block_size` >= n yields a single block with no
    /// boundary table.
    blocked_fm_index(const Bwt& bwt, const remap_table& remap, index_variant variant, std::size_t block_size,
                     params_type params = {}, wt_shape shape = wt_shape::huffman)
        : variant_(variant), n_(bwt.l.size()), sigma_(bwt.sigma()), c_(bwt.c), remap_(remap), params_(params) {
        if (n_ == 0 || sigma_ < 2) throw std::invalid_argument("index over an empty text");
        if (block_size == 0) throw std::invalid_argument("block size must be positive");
        const bool single = !is_fixed_block(variant) || block_size >= n_;
        block_size_ = single ? n_ : block_size;

        const std::size_t nblocks = (n_ + block_size_ - 1) / block_size_;
        blocks_.reserve(nblocks);
        if (!single) boundary_ = packed_ints(nblocks * sigma_, bits::width_for(n_));
        std::vector<std::uint64_t> running(sigma_, 0);
        const std::span<const symbol_t> l(bwt.l);
        for (std::size_t blk = 0; blk < nblocks; ++blk) {
            const std::size_t begin = blk * block_size_;
            const auto piece = l.subspan(begin, std::min(block_size_, n_ - begin));
            if (!single)
                for (std::size_t c = 0; c < sigma_; ++c) boundary_.set(blk * sigma_ + c, running[c]);
            for (symbol_t s : piece) {
                if (s >= sigma_) throw std::invalid_argument("bwt symbol outside alphabet");
                ++running[s];
            }
            blocks_.emplace_back(piece, shape, params);
        }
        if (c_array_from_counts(running) != c_) throw std::invalid_argument("C array does not match the bwt");
    }

    static blocked_fm_index from_parts(index_variant variant, std::size_t n, std::size_t sigma, std::size_t block_size,
                                       std::vector<std::uint64_t> c, remap_table remap, std::vector<tree_type> blocks,
                                       packed_ints boundary, params_type params = {}) {
        blocked_fm_index ix;
        ix.params_ = params;
        ix.variant_ = variant;
        ix.n_ = n;
        ix.sigma_ = sigma;
        ix.block_size_ = block_size;
        ix.c_ = std::move(c);
        ix.remap_ = remap;
        ix.blocks_ = std::move(blocks);
        ix.boundary_ = std::move(boundary);
        ix.check_invariants();
        return ix;
    }

    /// Throws std::invalid_argument naming the first violated invariant.
    void check_invariants() const {
        auto fail = [](const char* what) { throw std::invalid_argument(what); };
        if (n_ == 0 || sigma_ < 2 || sigma_ > max_sigma) fail("header");
        if (c_.size() != sigma_ + 1 || c_.front() != 0 || c_.back() != n_ || !std::is_sorted(c_.begin(), c_.end()))
            fail("c_array");
        for (symbol_t code : remap_)
            if (code >= sigma_) fail("remap");
        if (block_size_ == 0 || blocks_.empty()) fail("block lengths");
        if (!is_fixed_block(variant_) && blocks_.size() != 1) fail("block count");
        std::size_t total = 0;
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const std::size_t expect = std::min(block_size_, n_ - std::min(n_, i * block_size_));
            if (blocks_[i].size() != expect || expect == 0) fail("block lengths");
            total += blocks_[i].size();
        }
        if (total != n_ || (n_ + block_size_ - 1) / block_size_ != blocks_.size()) fail("block lengths");

        std::vector<std::uint64_t> running(sigma_, 0);
        const bool single = blocks_.size() == 1;
        if (single ? boundary_.size() != 0
                   : (boundary_.size() != blocks_.size() * sigma_ || boundary_.width() != bits::width_for(n_)))
            fail("boundary_occ");
        for (std::size_t blk = 0; blk < blocks_.size(); ++blk) {
            for (std::size_t c = 0; c < sigma_; ++c) {
                if (!single && boundary_[blk * sigma_ + c] != running[c]) fail("boundary_occ");
            }
            for (symbol_t c : blocks_[blk].alphabet()) {
                if (c >= sigma_) fail("block alphabet");
                running[c] += blocks_[blk].rank(c, blocks_[blk].size());
            }
        }
        if (c_array_from_counts(running) != c_) fail("c_array");
        if (running[0] != 1) fail("sentinel");
    }

    index_variant variant() const noexcept { return variant_; }
    std::size_t size() const noexcept { return n_; }
    std::size_t sigma() const noexcept { return sigma_; }
    std::size_t block_size() const noexcept { return block_size_; }
    std::size_t block_count() const noexcept { return blocks_.size(); }
    std::span<const std::uint64_t> c_array() const noexcept { return c_; }
    const remap_table& remap() const noexcept { return remap_; }
    std::span<const tree_type> blocks() const noexcept { return blocks_; }
    const packed_ints& boundary_occ() const noexcept { return boundary_; }
    const params_type& params() const noexcept { return params_; }
    bool has_boundary_table() const noexcept { return blocks_.size() > 1; }

    /// Count of c in L[0, block * b); zero for the first block.
    std::uint64_t boundary(std::size_t block, symbol_t c) const {
        if (block >= blocks_.size() || c >= sigma_) throw std::out_of_range("boundary lookup");
        return blocks_.size() == 1 ? 0 : boundary_[block * sigma_ + c];
    }

    /// Occurrences of c in L[0, j).
    std::uint64_t rank_l(symbol_t c, std::size_t j) const {
        if (j > n_) throw std::out_of_range("rank position beyond text end");
        if (c >= sigma_) return 0;
        if (blocks_.size() == 1) return blocks_.front().rank(c, j);
        std::size_t blk = j / block_size_;
        if (blk == blocks_.size()) --blk;  // j == n on a block boundary
        return boundary_[blk * sigma_ + c] + blocks_[blk].rank(c, j - blk * block_size_);
    }

    /// Backward search over remapped codes. Patterns holding the sentinel or a
    /// code outside the alphabet count 0; the empty pattern counts n.
    std::uint64_t count_codes(std::span<const symbol_t> p, bool early_break = true) const {
        std::uint64_t b = 0, e = n_;
        for (std::size_t i = p.size(); i-- > 0;) {
            const symbol_t c = p[i];
            if (c == 0 || c >= sigma_) return 0;
            b = c_[c] + rank_l(c, b);
            e = c_[c] + rank_l(c, e);
            if (early_break && b == e) break;
        }
        return e - b;
    }

    std::uint64_t count(std::string_view pattern) const {
        const auto codes = Text::translate_pattern(remap_, pattern);
        return codes ? count_codes(*codes) : 0;
    }

    index_size_report size_report() const noexcept {
        index_size_report r;
        r.n = n_;
        for (const auto& t : blocks_) {
            const auto s = t.size_report();
            r.wavelet_payload += s.payload;
            r.rank_directories += s.directories;
            r.topology += s.topology;
        }
        r.boundary_occ = has_boundary_table() ? boundary_.payload_bits() : 0;
        r.c_array = c_.size() * 64;
        r.remap = remap_.size() * 16;
        // magic, version, variant, rrr block bits, n, sigma, block size, block count
        r.header = 64 + 16 + 8 + 8 + 4 * 64;
        return r;
    }

   private:
    blocked_fm_index() = default;

    index_variant variant_ = index_variant::ssa;
    std::size_t n_ = 0;
    std::size_t sigma_ = 0;
    std::size_t block_size_ = 0;
    std::vector<std::uint64_t> c_;
    remap_table remap_{};
    std::vector<tree_type> blocks_;
    packed_ints boundary_;
    params_type params_{};
};

using plain_fm_index = blocked_fm_index<plain_rank_bitvector>;
using rrr_fm_index = blocked_fm_index<rrr_rank_bitvector>;

/// Runtime choice among the four variants.
class fm_index {
   public:
    using impl_type = std::variant<plain_fm_index, rrr_fm_index>;

    explicit fm_index(impl_type impl) : impl_(std::move(impl)) {}

    static fm_index build(const Bwt& bwt, const remap_table& remap, const index_config& cfg = {}) {
        if (bwt.l.size() < 1) throw std::invalid_argument("index over an empty text");
        std::size_t b = bwt.l.size();
        if (is_fixed_block(cfg.variant)) {
            b = cfg.block_size ? *cfg.block_size
                               : (bwt.l.size() >= 2 ? default_block_size(bwt.l.size(), bwt.sigma()) : 1);
            if (b == 0) throw std::invalid_argument("block size must be positive");
        }
        if (uses_rrr(cfg.variant))
            return fm_index(rrr_fm_index(bwt, remap, cfg.variant, b, {cfg.rrr_block_bits}, cfg.shape));
        return fm_index(plain_fm_index(bwt, remap, cfg.variant, b, {}, cfg.shape));
    }

    static fm_index build(const Text& t, const index_config& cfg = {}) { return build(fbfm::bwt(t), t.remap(), cfg); }

    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit(std::forward<F>(f), impl_);
    }

    const impl_type& impl() const noexcept { return impl_; }

    index_variant variant() const noexcept { return visit([](const auto& ix) { return ix.variant(); }); }
    std::size_t size() const noexcept { return visit([](const auto& ix) { return ix.size(); }); }
    std::size_t sigma() const noexcept { return visit([](const auto& ix) { return ix.sigma(); }); }
    std::size_t block_size() const noexcept { return visit([](const auto& ix) { return ix.block_size(); }); }
    std::size_t block_count() const noexcept { return visit([](const auto& ix) { return ix.block_count(); }); }

    std::uint64_t rank_l(symbol_t c, std::size_t j) const {
        return visit([&](const auto& ix) { return ix.rank_l(c, j); });
    }
    std::uint64_t count_codes(std::span<const symbol_t> p, bool early_break = true) const {
        return visit([&](const auto& ix) { return ix.count_codes(p, early_break); });
    }
    std::uint64_t count(std::string_view pattern) const {
        return visit([&](const auto& ix) { return ix.count(pattern); });
    }
    index_size_report size_report() const noexcept {
        return visit([](const auto& ix) { return ix.size_report(); });
    }

   private:
    impl_type impl_;
};

}  // namespace fbfm
