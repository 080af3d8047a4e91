#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fbfm/bits.hpp"

namespace fbfm {

/// Byte -> symbol code table. Code 0 marks a byte that does not occur in the text.
using remap_table = std::array<symbol_t, 256>;

/// A sentinel-terminated string over the dense alphabet {0, ..., sigma-1}.
///
/// data.back() is the sentinel 0 and no other position holds 0. Instances built
/// from bytes keep the byte -> code table so patterns can be translated.
class Text {
   public:
    /// Remaps the distinct bytes of `bytes` to codes 1..sigma-1 in byte order and
    /// appends the sentinel.
    static Text from_bytes(std::string_view bytes) {
        if (bytes.empty()) throw std::invalid_argument("empty text");
        std::array<bool, 256> seen{};
        for (unsigned char b : bytes) seen[b] = true;
        Text t;
        t.remap_.fill(0);
        symbol_t next = 1;
        for (std::size_t b = 0; b < 256; ++b)
            if (seen[b]) t.remap_[b] = next++;
        t.sigma_ = next;
        t.data_.reserve(bytes.size() + 1);
        for (unsigned char b : bytes) t.data_.push_back(t.remap_[b]);
        t.data_.push_back(0);
        return t;
    }

    /// Wraps an already-coded, sentinel-terminated sequence. Byte v translates to
    /// code v for 1 <= v < min(sigma, 256).
    static Text from_codes(std::vector<symbol_t> data, std::size_t sigma) {
        if (data.empty()) throw std::invalid_argument("empty text");
        if (sigma < 2 || sigma > max_sigma) throw std::invalid_argument("sigma must be in [2, 257]");
        if (data.back() != 0) throw std::invalid_argument("text must end with the sentinel 0");
        for (std::size_t i = 0; i + 1 < data.size(); ++i) {
            if (data[i] == 0) throw std::invalid_argument("sentinel 0 occurs before the end of the text");
            if (data[i] >= sigma) throw std::invalid_argument("symbol code out of alphabet range");
        }
        Text t;
        t.data_ = std::move(data);
        t.sigma_ = sigma;
        t.remap_.fill(0);
        for (std::size_t v = 1; v < std::min<std::size_t>(sigma, 256); ++v) t.remap_[v] = static_cast<symbol_t>(v);
        return t;
    }

    std::span<const symbol_t> data() const noexcept { return data_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t sigma() const noexcept { return sigma_; }
    const remap_table& remap() const noexcept { return remap_; }

    /// Pattern bytes -> codes; nullopt when some byte never occurs in the text.
    std::optional<std::vector<symbol_t>> translate(std::string_view pattern) const {
        return translate_pattern(remap_, pattern);
    }

    static std::optional<std::vector<symbol_t>> translate_pattern(const remap_table& remap,
                                                                  std::string_view pattern) {
        std::vector<symbol_t> out;
        out.reserve(pattern.size());
        for (unsigned char b : pattern) {
            if (remap[b] == 0) return std::nullopt;
            out.push_back(remap[b]);
        }
        return out;
    }

   private:
    Text() = default;

    std::vector<symbol_t> data_;
    std::size_t sigma_ = 0;
    remap_table remap_{};
};

/// Burrows-Wheeler transform L together with the C array (c[x] = #symbols < x).
struct Bwt {
    std::vector<symbol_t> l;
    std::vector<std::uint64_t> c;

    std::size_t sigma() const noexcept { return c.empty() ? 0 : c.size() - 1; }
};

/// counts[x] = number of occurrences of x in `x_seq`.
inline std::vector<std::uint64_t> symbol_counts(std::span<const symbol_t> seq, std::size_t sigma) {
    std::vector<std::uint64_t> counts(sigma, 0);
    for (symbol_t s : seq) {
        if (s >= sigma) throw std::invalid_argument("symbol code out of alphabet range");
        ++counts[s];
    }
    return counts;
}

inline std::vector<std::uint64_t> c_array_from_counts(std::span<const std::uint64_t> counts) {
    std::vector<std::uint64_t> c(counts.size() + 1, 0);
    for (std::size_t x = 0; x < counts.size(); ++x) c[x + 1] = c[x] + counts[x];
    return c;
}

/// Suffix array by prefix doubling over cyclic shifts, O(n log n). Because the
/// sentinel is unique and smallest, the rotation order equals the suffix order.
inline std::vector<std::uint32_t> suffix_array(const Text& t) {
    const auto s = t.data();
    const std::size_t n = s.size();
    if (n >= std::numeric_limits<std::uint32_t>::max()) throw std::length_error("text too long for 32-bit suffix array");

    std::vector<std::uint32_t> sa(n), cls(n), tmp_sa(n), tmp_cls(n);
    std::vector<std::uint32_t> cnt(std::max(n, t.sigma()), 0);

    for (std::size_t i = 0; i < n; ++i) ++cnt[s[i]];
    for (std::size_t x = 1; x < t.sigma(); ++x) cnt[x] += cnt[x - 1];
    for (std::size_t i = n; i-- > 0;) sa[--cnt[s[i]]] = static_cast<std::uint32_t>(i);

    std::uint32_t classes = 1;
    cls[sa[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (s[sa[i]] != s[sa[i - 1]]) ++classes;
        cls[sa[i]] = classes - 1;
    }

    for (std::size_t len = 1; len < n && classes < n; len <<= 1) {
        for (std::size_t i = 0; i < n; ++i)
            tmp_sa[i] = static_cast<std::uint32_t>((sa[i] + n - len % n) % n);
        std::fill(cnt.begin(), cnt.begin() + classes, 0);
        for (std::size_t i = 0; i < n; ++i) ++cnt[cls[tmp_sa[i]]];
        for (std::size_t x = 1; x < classes; ++x) cnt[x] += cnt[x - 1];
        for (std::size_t i = n; i-- > 0;) sa[--cnt[cls[tmp_sa[i]]]] = tmp_sa[i];

        tmp_cls[sa[0]] = 0;
        classes = 1;
        for (std::size_t i = 1; i < n; ++i) {
            const auto cur = std::pair{cls[sa[i]], cls[(sa[i] + len) % n]};
            const auto prev = std::pair{cls[sa[i - 1]], cls[(sa[i - 1] + len) % n]};
            if (cur != prev) ++classes;
            tmp_cls[sa[i]] = classes - 1;
        }
        cls.swap(tmp_cls);
    }
    return sa;
}

/// L[i] = T[(sa[i] + n - 1) mod n].
inline Bwt bwt(const Text& t, std::span<const std::uint32_t> sa) {
    const auto s = t.data();
    const std::size_t n = s.size();
    if (sa.size() != n) throw std::invalid_argument("suffix array length does not match text");
    Bwt out;
    out.l.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.l[i] = s[(sa[i] + n - 1) % n];
    out.c = c_array_from_counts(symbol_counts(s, t.sigma()));
    return out;
}

inline Bwt bwt(const Text& t) { return bwt(t, suffix_array(t)); }

/// Inverts L by LF-mapping, walking the text backwards from the sentinel row.
inline Text inverse_bwt(const Bwt& b) {
    const std::size_t n = b.l.size();
    const std::size_t sigma = b.sigma();
    if (n == 0) throw std::invalid_argument("malformed bwt: empty");
    if (sigma < 2) throw std::invalid_argument("malformed bwt: C array too short");
    const auto counts = symbol_counts(b.l, sigma);
    if (counts[0] != 1) throw std::invalid_argument("malformed bwt: expected exactly one sentinel");
    if (c_array_from_counts(counts) != b.c) throw std::invalid_argument("malformed bwt: C array mismatch");

    // lf[i] = C[L[i]] + rank_L(L[i], i)
    std::vector<std::uint64_t> seen(sigma, 0);
    std::vector<std::uint64_t> lf(n);
    for (std::size_t i = 0; i < n; ++i) lf[i] = b.c[b.l[i]] + seen[b.l[i]]++;

    std::vector<symbol_t> data(n);
    data[n - 1] = 0;
    std::size_t row = 0;  // rotation starting with the sentinel
    for (std::size_t pos = n - 1; pos-- > 0;) {
        data[pos] = b.l[row];
        if (data[pos] == 0) throw std::invalid_argument("malformed bwt: sentinel cycle shorter than text");
        row = lf[row];
    }
    return Text::from_codes(std::move(data), sigma);
}

/// Brute-force occurrence count of `p` in the text, sentinel excluded.
inline std::uint64_t naive_count(const Text& t, std::span<const symbol_t> p) {
    const auto s = t.data();
    if (p.empty()) return s.size();
    if (std::find(p.begin(), p.end(), symbol_t{0}) != p.end()) return 0;
    const std::size_t body = s.size() - 1;
    if (p.size() > body) return 0;
    std::uint64_t count = 0;
    for (std::size_t i = 0; i + p.size() <= body; ++i)
        if (std::equal(p.begin(), p.end(), s.begin() + static_cast<std::ptrdiff_t>(i))) ++count;
    return count;
}

/// |{ i < j : s[i] = c }| by linear scan.
inline std::uint64_t naive_rank(std::span<const symbol_t> s, symbol_t c, std::size_t j) {
    if (j > s.size()) throw std::out_of_range("rank position beyond sequence end");
    return static_cast<std::uint64_t>(std::count(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(j), c));
}

}  // namespace fbfm
