#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fbfm {

/// Symbol code of a remapped text. Codes are dense in [0, sigma), 0 is the sentinel.
using symbol_t = std::uint16_t;

/// Largest alphabet we accept: 256 byte values plus the sentinel.
inline constexpr std::size_t max_sigma = 257;

/// Raised when a persisted index cannot be decoded.
class format_error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

namespace bits {

/// Number of bits needed to write any value in [0, max_value].
constexpr unsigned width_for(std::uint64_t max_value) noexcept {
    return max_value == 0 ? 1u : static_cast<unsigned>(std::bit_width(max_value));
}

/// ceil(log2(x)) for x >= 1.
constexpr unsigned ceil_log2(std::uint64_t x) noexcept {
    return x <= 1 ? 0u : static_cast<unsigned>(std::bit_width(x - 1));
}

constexpr std::uint64_t low_mask(unsigned w) noexcept {
    return w >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << w) - 1;
}

constexpr std::size_t words_for(std::size_t nbits) noexcept { return (nbits + 63) / 64; }

/// Reads `w` bits (w <= 64) starting at bit `pos` of a LSB-first packed word array.
inline std::uint64_t read_field(const std::vector<std::uint64_t>& words, std::size_t pos,
                                unsigned w) noexcept {
    if (w == 0) return 0;
    const std::size_t word = pos / 64;
    const unsigned off = pos % 64;
    std::uint64_t v = words[word] >> off;
    if (off + w > 64) v |= words[word + 1] << (64 - off);
    return v & low_mask(w);
}

inline void write_field(std::vector<std::uint64_t>& words, std::size_t pos, unsigned w,
                        std::uint64_t value) noexcept {
    if (w == 0) return;
    value &= low_mask(w);
    const std::size_t word = pos / 64;
    const unsigned off = pos % 64;
    words[word] &= ~(low_mask(w) << off);
    words[word] |= value << off;
    if (off + w > 64) {
        const unsigned spill = off + w - 64;
        words[word + 1] &= ~low_mask(spill);
        words[word + 1] |= value >> (64 - off);
    }
}

}  // namespace bits

/// Append-only LSB-first bit buffer; the input format of the rank bitvectors.
class bit_buffer {
   public:
    bit_buffer() = default;

    /// Parses a string of '0'/'1' characters, first character is bit 0.
    static bit_buffer from_string(std::string_view s) {
        bit_buffer b;
        for (char ch : s) {
            if (ch != '0' && ch != '1') throw std::invalid_argument("bit string must contain only 0/1");
            b.push_back(ch == '1');
        }
        return b;
    }

    void push_back(bool bit) {
        if (size_ % 64 == 0) words_.push_back(0);
        if (bit) words_.back() |= std::uint64_t{1} << (size_ % 64);
        ++size_;
    }

    void reserve(std::size_t nbits) { words_.reserve(bits::words_for(nbits)); }

    bool operator[](std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1u; }
    std::size_t size() const noexcept { return size_; }
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    std::string to_string() const {
        std::string s(size_, '0');
        for (std::size_t i = 0; i < size_; ++i)
            if ((*this)[i]) s[i] = '1';
        return s;
    }

   private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

/// Fixed-width packed integer array.
class packed_ints {
   public:
    packed_ints() = default;
    packed_ints(std::size_t count, unsigned width)
        : width_(width), size_(count), words_(bits::words_for(count * width), 0) {
        if (width == 0 || width > 64) throw std::invalid_argument("packed_ints width must be in [1, 64]");
    }

    packed_ints(std::size_t count, unsigned width, std::vector<std::uint64_t> words)
        : width_(width), size_(count), words_(std::move(words)) {
        if (width == 0 || width > 64) throw std::invalid_argument("packed_ints width must be in [1, 64]");
        if (words_.size() != bits::words_for(count * width))
            throw std::invalid_argument("packed_ints word count does not match size");
    }

    std::uint64_t operator[](std::size_t i) const noexcept {
        return bits::read_field(words_, i * width_, width_);
    }
    void set(std::size_t i, std::uint64_t v) noexcept { bits::write_field(words_, i * width_, width_, v); }

    std::size_t size() const noexcept { return size_; }
    unsigned width() const noexcept { return width_; }
    /// Bits occupied by the values themselves, excluding word padding.
    std::size_t payload_bits() const noexcept { return size_ * width_; }
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }
    /// Bits allocated, including padding of the last word.
    std::size_t stored_bits() const noexcept { return words_.size() * 64; }

    friend bool operator==(const packed_ints& a, const packed_ints& b) {
        if (a.width_ != b.width_ || a.size_ != b.size_) return false;
        for (std::size_t i = 0; i < a.size_; ++i)
            if (a[i] != b[i]) return false;
        return true;
    }

   private:
    unsigned width_ = 1;
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace fbfm
