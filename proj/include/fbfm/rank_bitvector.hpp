#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fbfm/bits.hpp"

namespace fbfm {

/// Common surface of the bitvector backends a wavelet tree can sit on.
template <class B>
concept rank_backend = requires(const B& b, std::size_t j, const bit_buffer& bits,
                                const typename B::params_type& params) {
    { b.size() } -> std::convertible_to<std::size_t>;
    { b.rank1(j) } -> std::convertible_to<std::uint64_t>;
    { b.access(j) } -> std::convertible_to<bool>;
    { b.size_in_bits() } -> std::convertible_to<std::size_t>;
    { b.payload_bits() } -> std::convertible_to<std::size_t>;
    { B(bits, params) } -> std::same_as<B>;
};

struct plain_params {};

/// Uncompressed bitvector with a two-level rank directory: absolute 64-bit
/// counts every 512 bits and 16-bit counts relative to the superblock every
/// 64 bits. The bits themselves are kept verbatim.
class plain_rank_bitvector {
   public:
    using params_type = plain_params;

    static constexpr std::size_t superblock_bits = 512;
    static constexpr std::size_t block_bits = 64;

    plain_rank_bitvector() : plain_rank_bitvector(bit_buffer{}) {}
    explicit plain_rank_bitvector(const bit_buffer& bits, params_type = {})
        : size_(bits.size()), words_(bits.words()) {
        words_.resize(bits::words_for(size_), 0);
        build_directory();
    }

    /// Rebuilds from raw words; bits past `size` must be zero.
    static plain_rank_bitvector from_words(std::size_t size, std::vector<std::uint64_t> words) {
        if (words.size() != bits::words_for(size)) throw std::invalid_argument("word count does not match bit length");
        if (size % 64 != 0 && (words.back() & ~bits::low_mask(size % 64)) != 0)
            throw std::invalid_argument("nonzero padding bits");
        plain_rank_bitvector v;
        v.size_ = size;
        v.words_ = std::move(words);
        v.build_directory();
        return v;
    }

    std::size_t size() const noexcept { return size_; }

    bool access(std::size_t i) const {
        if (i >= size_) throw std::out_of_range("bit access beyond bitvector end");
        return (words_[i / 64] >> (i % 64)) & 1u;
    }

    std::uint64_t rank1(std::size_t j) const {
        if (j > size_) throw std::out_of_range("rank position beyond bitvector end");
        const std::size_t q = j / block_bits;
        std::uint64_t r = superblocks_[j / superblock_bits] + blocks_[q];
        if (j % block_bits) r += std::popcount(words_[q] & bits::low_mask(j % block_bits));
        return r;
    }
    std::uint64_t rank0(std::size_t j) const { return j - rank1(j); }
    std::uint64_t rank(bool bit, std::size_t j) const { return bit ? rank1(j) : rank0(j); }

    /// Length field, raw words, and both directory levels.
    std::size_t size_in_bits() const noexcept {
        return 64 + words_.size() * 64 + superblocks_.size() * 64 + blocks_.size() * 16;
    }
    std::size_t payload_bits() const noexcept { return size_; }

    const std::vector<std::uint64_t>& words() const noexcept { return words_; }
    const std::vector<std::uint64_t>& superblocks() const noexcept { return superblocks_; }
    const std::vector<std::uint16_t>& blocks() const noexcept { return blocks_; }

   private:
    void build_directory() {
        superblocks_.assign(size_ / superblock_bits + 1, 0);
        blocks_.assign(size_ / block_bits + 1, 0);
        std::uint64_t total = 0, in_super = 0;
        for (std::size_t q = 0; q < blocks_.size(); ++q) {
            if (q % (superblock_bits / block_bits) == 0) {
                superblocks_[q / (superblock_bits / block_bits)] = total;
                in_super = 0;
            }
            blocks_[q] = static_cast<std::uint16_t>(in_super);
            if (q < words_.size()) {
                const auto pc = static_cast<std::uint64_t>(std::popcount(words_[q]));
                total += pc;
                in_super += pc;
            }
        }
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
    std::vector<std::uint64_t> superblocks_;
    std::vector<std::uint16_t> blocks_;
};

namespace rrr {

inline constexpr unsigned max_block_bits = 63;

/// binomial(n, k) for n <= 63.
inline const std::array<std::array<std::uint64_t, 64>, 64>& binomials() {
    static const auto table = [] {
        std::array<std::array<std::uint64_t, 64>, 64> t{};
        for (std::size_t n = 0; n < 64; ++n) {
            t[n][0] = 1;
            for (std::size_t k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k < n ? t[n - 1][k] : 0);
        }
        return t;
    }();
    return table;
}

inline std::uint64_t binomial(unsigned n, unsigned k) noexcept { return k > n ? 0 : binomials()[n][k]; }

/// Index of `word` (popcount k, t bits) among all t-bit words of popcount k in
/// increasing numeric order.
inline std::uint64_t encode(std::uint64_t word, unsigned t) noexcept {
    unsigned ones = static_cast<unsigned>(std::popcount(word));
    std::uint64_t offset = 0;
    for (unsigned p = t; p-- > 0 && ones > 0;) {
        if ((word >> p) & 1u) {
            offset += binomial(p, ones);
            --ones;
        }
    }
    return offset;
}

inline std::uint64_t decode(std::uint64_t offset, unsigned t, unsigned k) noexcept {
    std::uint64_t word = 0;
    for (unsigned p = t; p-- > 0 && k > 0;) {
        const std::uint64_t below = binomial(p, k);
        if (offset >= below) {
            word |= std::uint64_t{1} << p;
            offset -= below;
            --k;
        }
    }
    return word;
}

inline unsigned offset_width(unsigned t, unsigned k) noexcept { return bits::ceil_log2(binomial(t, k)); }

}  // namespace rrr

struct rrr_params {
    unsigned block_bits = 15;
};

/// RRR-style compressed bitvector. Blocks of t bits are stored as a popcount
/// class plus an enumerative offset of ceil(log2 C(t, class)) bits; every
/// `sample_rate` blocks an absolute (offset bit position, rank) pair is kept.
class rrr_rank_bitvector {
   public:
    using params_type = rrr_params;

    static constexpr unsigned default_block_bits = 15;
    static constexpr std::size_t sample_rate = 32;

    rrr_rank_bitvector() : rrr_rank_bitvector(bit_buffer{}, params_type{}) {}

    explicit rrr_rank_bitvector(const bit_buffer& input, params_type params = {})
        : size_(input.size()), t_(params.block_bits) {
        check_block_bits(t_);
        const std::size_t nblocks = (size_ + t_ - 1) / t_;
        classes_ = packed_ints(nblocks, bits::width_for(t_));

        std::size_t total_offset_bits = 0;
        std::vector<std::uint64_t> words(nblocks);
        for (std::size_t b = 0; b < nblocks; ++b) {
            words[b] = bits::read_field(input.words(), b * t_, static_cast<unsigned>(std::min<std::size_t>(t_, size_ - b * t_)));
            const auto k = static_cast<unsigned>(std::popcount(words[b]));
            classes_.set(b, k);
            total_offset_bits += rrr::offset_width(t_, k);
        }
        offset_bits_ = total_offset_bits;
        offsets_.assign(bits::words_for(offset_bits_), 0);
        std::size_t pos = 0;
        for (std::size_t b = 0; b < nblocks; ++b) {
            const auto k = static_cast<unsigned>(classes_[b]);
            const unsigned w = rrr::offset_width(t_, k);
            bits::write_field(offsets_, pos, w, rrr::encode(words[b], t_));
            pos += w;
        }
        build_samples();
    }

    /// Reassembles from stored classes and offsets, validating each block and
    /// rebuilding the samples.
    static rrr_rank_bitvector from_parts(std::size_t size, unsigned t, packed_ints classes,
                                         std::vector<std::uint64_t> offsets, std::size_t offset_bits) {
        check_block_bits(t);
        const std::size_t nblocks = (size + t - 1) / t;
        if (classes.size() != nblocks || classes.width() != bits::width_for(t))
            throw std::invalid_argument("class table does not match bit length");
        if (offsets.size() != bits::words_for(offset_bits)) throw std::invalid_argument("offset word count mismatch");
        rrr_rank_bitvector v;
        v.size_ = size;
        v.t_ = t;
        v.classes_ = std::move(classes);
        v.offsets_ = std::move(offsets);
        v.offset_bits_ = offset_bits;
        std::size_t pos = 0;
        for (std::size_t b = 0; b < nblocks; ++b) {
            const auto k = static_cast<unsigned>(v.classes_[b]);
            const unsigned len = v.block_length(b);
            if (k > len) throw std::invalid_argument("block class exceeds block length");
            const unsigned w = rrr::offset_width(t, k);
            if (pos + w > offset_bits) throw std::invalid_argument("offsets shorter than classes require");
            const std::uint64_t off = bits::read_field(v.offsets_, pos, w);
            if (off >= rrr::binomial(t, k)) throw std::invalid_argument("block offset out of range");
            if (rrr::decode(off, t, k) & ~bits::low_mask(len)) throw std::invalid_argument("block sets bits past the end");
            pos += w;
        }
        if (pos != offset_bits) throw std::invalid_argument("offset length does not match classes");
        v.build_samples();
        return v;
    }

    std::size_t size() const noexcept { return size_; }
    unsigned block_bits() const noexcept { return t_; }

    bool access(std::size_t i) const {
        if (i >= size_) throw std::out_of_range("bit access beyond bitvector end");
        const std::size_t b = i / t_;
        return (block_word(b, offset_position(b).first) >> (i % t_)) & 1u;
    }

    std::uint64_t rank1(std::size_t j) const {
        if (j > size_) throw std::out_of_range("rank position beyond bitvector end");
        const std::size_t b = j / t_;
        auto [pos, r] = offset_position(b);
        if (j % t_) r += std::popcount(block_word(b, pos) & bits::low_mask(j % t_));
        return r;
    }
    std::uint64_t rank0(std::size_t j) const { return j - rank1(j); }
    std::uint64_t rank(bool bit, std::size_t j) const { return bit ? rank1(j) : rank0(j); }

    /// Decodes block `b` back to its t-bit word.
    std::uint64_t block(std::size_t b) const { return block_word(b, offset_position(b).first); }
    std::size_t block_count() const noexcept { return classes_.size(); }

    /// Header (length, t, offset length), classes, offsets, and both sample
    /// arrays, each packed array with its count and width.
    std::size_t size_in_bits() const noexcept {
        return 64 + 8 + 64 + 3 * (64 + 8) + classes_.stored_bits() + offsets_.size() * 64 + sample_pos_.stored_bits() +
               sample_rank_.stored_bits();
    }
    std::size_t payload_bits() const noexcept { return classes_.stored_bits() + offsets_.size() * 64; }
    std::size_t offset_bits() const noexcept { return offset_bits_; }

    const packed_ints& classes() const noexcept { return classes_; }
    const std::vector<std::uint64_t>& offsets() const noexcept { return offsets_; }
    const packed_ints& sample_positions() const noexcept { return sample_pos_; }
    const packed_ints& sample_ranks() const noexcept { return sample_rank_; }

   private:
    static void check_block_bits(unsigned t) {
        if (t < 1 || t > rrr::max_block_bits) throw std::invalid_argument("rrr block size must be in [1, 63]");
    }

    unsigned block_length(std::size_t b) const noexcept {
        return static_cast<unsigned>(std::min<std::size_t>(t_, size_ - b * t_));
    }

    /// (offset bit position, rank before block b), scanning from the nearest sample.
    std::pair<std::size_t, std::uint64_t> offset_position(std::size_t b) const noexcept {
        const std::size_t s = b / sample_rate;
        std::size_t pos = sample_pos_[s];
        std::uint64_t r = sample_rank_[s];
        for (std::size_t i = s * sample_rate; i < b; ++i) {
            const auto k = static_cast<unsigned>(classes_[i]);
            r += k;
            pos += rrr::offset_width(t_, k);
        }
        return {pos, r};
    }

    std::uint64_t block_word(std::size_t b, std::size_t pos) const noexcept {
        const auto k = static_cast<unsigned>(classes_[b]);
        return rrr::decode(bits::read_field(offsets_, pos, rrr::offset_width(t_, k)), t_, k);
    }

    void build_samples() {
        const std::size_t nblocks = classes_.size();
        const std::size_t nsamples = nblocks / sample_rate + 1;
        sample_pos_ = packed_ints(nsamples, bits::width_for(offset_bits_));
        sample_rank_ = packed_ints(nsamples, bits::width_for(size_));
        std::size_t pos = 0;
        std::uint64_t r = 0;
        for (std::size_t b = 0; b <= nblocks; ++b) {
            if (b % sample_rate == 0) {
                sample_pos_.set(b / sample_rate, pos);
                sample_rank_.set(b / sample_rate, r);
            }
            if (b == nblocks) break;
            const auto k = static_cast<unsigned>(classes_[b]);
            r += k;
            pos += rrr::offset_width(t_, k);
        }
    }

    std::size_t size_ = 0;
    unsigned t_ = default_block_bits;
    packed_ints classes_;
    std::vector<std::uint64_t> offsets_;
    std::size_t offset_bits_ = 0;
    packed_ints sample_pos_;
    packed_ints sample_rank_;
};

static_assert(rank_backend<plain_rank_bitvector>);
static_assert(rank_backend<rrr_rank_bitvector>);

}  // namespace fbfm
