#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fbfm/text.hpp"

namespace fbfm {

/// Split of a sequence of `length` symbols into consecutive non-empty blocks.
/// `splits` holds the interior boundaries; 0 and `length` are implicit.
class Partition {
   public:
    Partition() = default;
    Partition(std::size_t length, std::vector<std::size_t> splits) : length_(length), splits_(std::move(splits)) {
        for (std::size_t i = 0; i < splits_.size(); ++i) {
            if (splits_[i] == 0 || splits_[i] >= length_) throw std::invalid_argument("partition split outside (0, length)");
            if (i > 0 && splits_[i] <= splits_[i - 1]) throw std::invalid_argument("partition splits not strictly increasing");
        }
    }

    std::size_t length() const noexcept { return length_; }
    std::size_t block_count() const noexcept { return length_ == 0 ? 0 : splits_.size() + 1; }
    const std::vector<std::size_t>& splits() const noexcept { return splits_; }

    /// [begin, end) of block i.
    std::pair<std::size_t, std::size_t> block(std::size_t i) const {
        if (i >= block_count()) throw std::out_of_range("partition block index");
        const std::size_t begin = i == 0 ? 0 : splits_[i - 1];
        const std::size_t end = i == splits_.size() ? length_ : splits_[i];
        return {begin, end};
    }

    /// Union of both split sets.
    Partition refine(const Partition& other) const {
        if (other.length_ != length_) throw std::invalid_argument("refining partitions of different lengths");
        std::vector<std::size_t> merged;
        std::set_union(splits_.begin(), splits_.end(), other.splits_.begin(), other.splits_.end(),
                       std::back_inserter(merged));
        return Partition(length_, std::move(merged));
    }

    friend bool operator==(const Partition&, const Partition&) = default;

   private:
    std::size_t length_ = 0;
    std::vector<std::size_t> splits_;
};

namespace entropy_detail {

inline double x_log_x(double x) noexcept { return x > 0 ? x * std::log2(x) : 0.0; }

/// Sparse counter that can be reset in time proportional to the symbols touched.
class counter {
   public:
    counter() : counts_(max_sigma, 0) {}
    void add(symbol_t s) {
        if (counts_[s]++ == 0) touched_.push_back(s);
    }
    /// Sums in symbol order so equal multisets give bit-identical results.
    double total_bits_and_clear() {
        std::sort(touched_.begin(), touched_.end());
        double n = 0, sum = 0;
        for (symbol_t s : touched_) {
            n += static_cast<double>(counts_[s]);
            sum += x_log_x(static_cast<double>(counts_[s]));
            counts_[s] = 0;
        }
        touched_.clear();
        return std::max(0.0, x_log_x(n) - sum);
    }

   private:
    std::vector<std::uint64_t> counts_;
    std::vector<symbol_t> touched_;
};

inline double segment_bits(std::span<const symbol_t> seq, counter& cnt) {
    for (symbol_t s : seq) {
        if (s >= max_sigma) throw std::invalid_argument("symbol code out of range");
        cnt.add(s);
    }
    return cnt.total_bits_and_clear();
}

}  // namespace entropy_detail

/// H(x, y): |B| H0(B) for a bitvector B with x zeros and y ones.
inline double binary_entropy_bits(std::uint64_t x, std::uint64_t y) noexcept {
    using entropy_detail::x_log_x;
    const double dx = static_cast<double>(x), dy = static_cast<double>(y);
    return std::max(0.0, x_log_x(dx + dy) - x_log_x(dx) - x_log_x(dy));
}

/// Zero-order empirical entropy in bits per symbol, log base 2.
inline double h0(std::span<const symbol_t> x) {
    if (x.empty()) throw std::invalid_argument("entropy of an empty sequence");
    entropy_detail::counter cnt;
    return entropy_detail::segment_bits(x, cnt) / static_cast<double>(x.size());
}

/// k-th order empirical entropy of the cyclic text: symbols are grouped by the
/// k symbols that follow them (wrapping around) and each group contributes
/// |T|w| H0(T|w). Computed directly from the text, without the BWT.
inline double hk(const Text& t, std::size_t k) {
    const auto s = t.data();
    const std::size_t n = s.size();
    const std::size_t len = std::min(k, n);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    auto context_less = [&](std::uint32_t a, std::uint32_t b) {
        for (std::size_t d = 1; d <= len; ++d) {
            const symbol_t ca = s[(a + d) % n], cb = s[(b + d) % n];
            if (ca != cb) return ca < cb;
        }
        return false;
    };
    if (len > 0) std::sort(order.begin(), order.end(), context_less);

    entropy_detail::counter cnt;
    double bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && context_less(order[i - 1], order[i])) bits += cnt.total_bits_and_clear();
        cnt.add(s[order[i]]);
    }
    bits += cnt.total_bits_and_clear();
    return bits / static_cast<double>(n);
}

/// Splits L into its length-k context blocks: row i of the sorted rotation
/// matrix starts at sa[i], so L[i] is followed by T[sa[i] .. sa[i]+k) and rows
/// sharing that context are adjacent.
inline Partition context_partition(const Bwt& b, const Text& t, std::size_t k) {
    const auto s = t.data();
    const std::size_t n = s.size();
    if (b.l.size() != n) throw std::invalid_argument("bwt length does not match text");
    const auto sa = suffix_array(t);
    for (std::size_t i = 0; i < n; ++i)
        if (b.l[i] != s[(sa[i] + n - 1) % n]) throw std::invalid_argument("bwt does not belong to text");
    const std::size_t len = std::min(k, n);
    std::vector<std::size_t> splits;
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t d = 0; d < len; ++d) {
            if (s[(sa[i] + d) % n] != s[(sa[i - 1] + d) % n]) {
                splits.push_back(i);
                break;
            }
        }
    }
    return Partition(n, std::move(splits));
}

/// Blocks [0, b), [b, 2b), ...; the last block may be shorter.
inline Partition fixed_partition(std::size_t length, std::size_t b) {
    if (b == 0) throw std::invalid_argument("block size must be positive");
    std::vector<std::size_t> splits;
    for (std::size_t p = b; p < length; p += b) splits.push_back(p);
    return Partition(length, std::move(splits));
}

/// Sum over blocks of |X_i| H0(X_i), in bits.
inline double partition_entropy(std::span<const symbol_t> x, const Partition& p) {
    if (p.length() != x.size()) throw std::invalid_argument("partition does not cover the sequence");
    entropy_detail::counter cnt;
    double bits = 0;
    for (std::size_t i = 0; i < p.block_count(); ++i) {
        const auto [begin, end] = p.block(i);
        bits += entropy_detail::segment_bits(x.subspan(begin, end - begin), cnt);
    }
    return bits;
}

struct concat_terms {
    double delta;   ///< |XY|H0(XY) - |X|H0(X) - |Y|H0(Y)
    double h_xy;    ///< H(|X|, |Y|)
    double sum_hc;  ///< sum over c of H(|X|_c, |Y|_c)
};

/// Both sides of the concatenation identity, each evaluated on its own route.
inline concat_terms concat_entropy_terms(std::span<const symbol_t> x, std::span<const symbol_t> y) {
    if (x.empty() || y.empty()) throw std::invalid_argument("concatenation terms need non-empty strings");
    entropy_detail::counter cnt;
    const double bx = entropy_detail::segment_bits(x, cnt);
    const double by = entropy_detail::segment_bits(y, cnt);
    std::vector<symbol_t> xy(x.begin(), x.end());
    xy.insert(xy.end(), y.begin(), y.end());
    const double bxy = entropy_detail::segment_bits(xy, cnt);

    std::vector<std::uint64_t> cx(max_sigma, 0), cy(max_sigma, 0);
    for (symbol_t s : x) ++cx[s];
    for (symbol_t s : y) ++cy[s];
    double sum_hc = 0;
    for (std::size_t c = 0; c < max_sigma; ++c)
        if (cx[c] + cy[c] > 0) sum_hc += binary_entropy_bits(cx[c], cy[c]);
    return {bxy - bx - by, binary_entropy_bits(x.size(), y.size()), sum_hc};
}

struct block_bound_sides {
    double lhs;  ///< entropy of the fixed partition
    double rhs;  ///< entropy of the arbitrary partition + (l - 1) b
    bool holds(double tolerance = 1e-9) const noexcept { return lhs <= rhs + tolerance * std::max(1.0, rhs); }
};

/// Compares the fixed-block partition of x against an arbitrary partition plus
/// (l - 1) b bits of slack.
inline block_bound_sides verify_block_bound(std::span<const symbol_t> x, const Partition& arbitrary, std::size_t b) {
    const double fixed = partition_entropy(x, fixed_partition(x.size(), b));
    const double arb = partition_entropy(x, arbitrary);
    const double slack = static_cast<double>(arbitrary.block_count() - 1) * static_cast<double>(b);
    return {fixed, arb + slack};
}

struct EntropyReport {
    std::size_t n = 0;
    std::size_t sigma = 0;
    double h0 = 0;
    std::vector<double> hk;  ///< hk[k-1] for k = 1..k_max
};

inline EntropyReport entropy_report(const Text& t, std::size_t k_max) {
    EntropyReport r;
    r.n = t.size();
    r.sigma = t.sigma();
    r.h0 = h0(t.data());
    for (std::size_t k = 1; k <= k_max; ++k) r.hk.push_back(hk(t, k));
    return r;
}

}  // namespace fbfm
