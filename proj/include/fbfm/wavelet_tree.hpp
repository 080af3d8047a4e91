#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "fbfm/bits.hpp"
#include "fbfm/rank_bitvector.hpp"

namespace fbfm {

enum class wt_shape : std::uint8_t { balanced = 0, huffman = 1 };

/// Child link of an internal node: >= 0 is a node index, leaf(i) encodes local
/// symbol i, `absent` marks a balanced-tree slot no symbol reaches.
struct wt_node {
    std::int32_t child[2];

    static constexpr std::int32_t leaf(std::size_t local) noexcept { return -static_cast<std::int32_t>(local) - 1; }
    static constexpr bool is_leaf(std::int32_t link) noexcept { return link < 0 && link != absent; }
    static constexpr std::size_t leaf_symbol(std::int32_t link) noexcept { return static_cast<std::size_t>(-(link + 1)); }
    static constexpr std::int32_t absent = std::numeric_limits<std::int32_t>::min();

    friend bool operator==(const wt_node&, const wt_node&) = default;
};

/// Wavelet tree over the symbols actually present in its sequence.
///
/// Codes are root-to-leaf paths (0 = left), stored MSB-first. The balanced
/// shape gives local symbol i the ceil(log2 sigma_local)-bit binary code of i;
/// the Huffman shape is built from the symbol frequencies of the sequence.
template <rank_backend Backend>
class wavelet_tree {
   public:
    using backend_type = Backend;
    using params_type = typename Backend::params_type;

    struct size_breakdown {
        std::size_t payload = 0;
        std::size_t directories = 0;
        std::size_t topology = 0;
        std::size_t total() const noexcept { return payload + directories + topology; }
    };

    wavelet_tree(std::span<const symbol_t> x, wt_shape shape, params_type params = {})
        : size_(x.size()), shape_(shape) {
        if (x.empty()) throw std::invalid_argument("wavelet tree over an empty sequence");

        std::vector<std::uint64_t> freq;
        {
            std::vector<std::uint64_t> counts(max_sigma, 0);
            for (symbol_t s : x) {
                if (s >= max_sigma) throw std::invalid_argument("symbol code out of range");
                ++counts[s];
            }
            for (std::size_t s = 0; s < max_sigma; ++s) {
                if (counts[s] == 0) continue;
                alphabet_.push_back(static_cast<symbol_t>(s));
                freq.push_back(counts[s]);
            }
        }
        codes_.assign(alphabet_.size(), 0);
        code_lengths_.assign(alphabet_.size(), 0);

        if (alphabet_.size() > 1) {
            if (shape == wt_shape::balanced)
                build_balanced_topology();
            else
                build_huffman_topology(freq);
        }

        std::vector<std::uint16_t> local(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) local[i] = static_cast<std::uint16_t>(local_index(x[i]));
        bitvectors_.reserve(nodes_.size());
        for (std::size_t v = 0; v < nodes_.size(); ++v) bitvectors_.emplace_back(bit_buffer{}, params);
        if (!nodes_.empty()) fill_bitvectors(0, 0, std::move(local), params);
    }

    /// Reassembles a tree from stored parts and checks that topology, codebook
    /// and bitvector lengths agree.
    static wavelet_tree from_parts(std::size_t size, wt_shape shape, std::vector<symbol_t> alphabet,
                                   std::vector<std::uint64_t> codes, std::vector<std::uint8_t> code_lengths,
                                   std::vector<wt_node> nodes, std::vector<Backend> bitvectors) {
        wavelet_tree w;
        w.size_ = size;
        w.shape_ = shape;
        w.alphabet_ = std::move(alphabet);
        w.codes_ = std::move(codes);
        w.code_lengths_ = std::move(code_lengths);
        w.nodes_ = std::move(nodes);
        w.bitvectors_ = std::move(bitvectors);
        w.validate();
        return w;
    }

    std::size_t size() const noexcept { return size_; }
    wt_shape shape() const noexcept { return shape_; }
    std::span<const symbol_t> alphabet() const noexcept { return alphabet_; }
    std::span<const std::uint64_t> codes() const noexcept { return codes_; }
    std::span<const std::uint8_t> code_lengths() const noexcept { return code_lengths_; }
    std::span<const wt_node> nodes() const noexcept { return nodes_; }
    std::span<const Backend> bitvectors() const noexcept { return bitvectors_; }

    bool contains(symbol_t c) const noexcept { return std::binary_search(alphabet_.begin(), alphabet_.end(), c); }

    /// Occurrences of c in x[0, r).
    std::uint64_t rank(symbol_t c, std::size_t r) const {
        if (r > size_) throw std::out_of_range("rank position beyond sequence end");
        const auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), c);
        if (it == alphabet_.end() || *it != c) return 0;
        const auto local = static_cast<std::size_t>(it - alphabet_.begin());
        const std::uint64_t code = codes_[local];
        const unsigned len = code_lengths_[local];
        std::uint64_t q = r;
        std::int32_t v = 0;
        for (unsigned d = 0; d < len; ++d) {
            const unsigned bit = (code >> (len - 1 - d)) & 1u;
            const Backend& bv = bitvectors_[static_cast<std::size_t>(v)];
            q = bit ? bv.rank1(q) : q - bv.rank1(q);
            v = nodes_[static_cast<std::size_t>(v)].child[bit];
        }
        return q;
    }

    symbol_t access(std::size_t i) const {
        if (i >= size_) throw std::out_of_range("access beyond sequence end");
        if (nodes_.empty()) return alphabet_.front();
        std::int32_t v = 0;
        std::uint64_t q = i;
        for (;;) {
            const Backend& bv = bitvectors_[static_cast<std::size_t>(v)];
            const bool bit = bv.access(q);
            q = bit ? bv.rank1(q) : q - bv.rank1(q);
            const std::int32_t next = nodes_[static_cast<std::size_t>(v)].child[bit];
            if (wt_node::is_leaf(next)) return alphabet_[wt_node::leaf_symbol(next)];
            v = next;
        }
    }

    /// Sum of bitvector lengths, i.e. the size of the tree's code of x in bits.
    std::size_t bitvector_length() const noexcept {
        std::size_t total = 0;
        for (const auto& bv : bitvectors_) total += bv.size();
        return total;
    }

    size_breakdown size_report() const noexcept {
        size_breakdown s;
        for (const auto& bv : bitvectors_) {
            s.payload += bv.payload_bits();
            s.directories += bv.size_in_bits() - bv.payload_bits();
        }
        // length, shape, alphabet size, node count; per symbol: code, length, symbol;
        // per node two 32-bit links
        s.topology = 64 + 8 + 16 + 32 + alphabet_.size() * (64 + 8 + 16) + nodes_.size() * 64;
        return s;
    }

    std::size_t size_in_bits() const noexcept { return size_report().total(); }

   private:
    wavelet_tree() = default;

    std::size_t local_index(symbol_t c) const {
        return static_cast<std::size_t>(std::lower_bound(alphabet_.begin(), alphabet_.end(), c) - alphabet_.begin());
    }

    void build_balanced_topology() {
        const unsigned width = bits::ceil_log2(alphabet_.size());
        for (std::size_t i = 0; i < alphabet_.size(); ++i) {
            codes_[i] = i;
            code_lengths_[i] = static_cast<std::uint8_t>(width);
        }
        // node covering every local symbol whose code starts with `prefix` (depth bits)
        auto build = [&](auto&& self, std::uint64_t prefix, unsigned depth) -> std::int32_t {
            const std::uint64_t lo = prefix << (width - depth);
            if (lo >= alphabet_.size()) return wt_node::absent;
            if (depth == width) return wt_node::leaf(lo);
            const auto id = static_cast<std::int32_t>(nodes_.size());
            nodes_.push_back({{wt_node::absent, wt_node::absent}});
            const std::int32_t left = self(self, prefix << 1, depth + 1);
            const std::int32_t right = self(self, (prefix << 1) | 1u, depth + 1);
            nodes_[static_cast<std::size_t>(id)] = {{left, right}};
            return id;
        };
        build(build, 0, 0);
    }

    // Repeatedly merges the two lightest subtrees; ties pick the smaller minimum
    // symbol, then the earlier creation. The lighter subtree becomes the left
    // child; on equal weight the later-popped subtree goes left.
    void build_huffman_topology(const std::vector<std::uint64_t>& freq) {
        struct item {
            std::uint64_t weight;
            std::size_t min_symbol;
            std::size_t order;
            std::int32_t link;  // temporary node id or leaf
        };
        auto heavier = [](const item& a, const item& b) {
            return std::tie(a.weight, a.min_symbol, a.order) > std::tie(b.weight, b.min_symbol, b.order);
        };
        std::priority_queue<item, std::vector<item>, decltype(heavier)> heap(heavier);
        std::size_t order = 0;
        for (std::size_t i = 0; i < freq.size(); ++i) heap.push({freq[i], i, order++, wt_node::leaf(i)});

        std::vector<wt_node> tmp;
        while (heap.size() > 1) {
            const item first = heap.top();
            heap.pop();
            const item second = heap.top();
            heap.pop();
            const bool first_left = first.weight < second.weight;
            const item& l = first_left ? first : second;
            const item& r = first_left ? second : first;
            tmp.push_back({{l.link, r.link}});
            heap.push({first.weight + second.weight, std::min(first.min_symbol, second.min_symbol), order++,
                       static_cast<std::int32_t>(tmp.size() - 1)});
        }

        // renumber in preorder so the root is node 0, assigning codes on the way
        nodes_.reserve(tmp.size());
        auto visit = [&](auto&& self, std::int32_t link, std::uint64_t code, unsigned depth) -> std::int32_t {
            if (wt_node::is_leaf(link)) {
                if (depth > 64) throw std::length_error("huffman code longer than 64 bits");
                codes_[wt_node::leaf_symbol(link)] = code;
                code_lengths_[wt_node::leaf_symbol(link)] = static_cast<std::uint8_t>(depth);
                return link;
            }
            const auto id = static_cast<std::int32_t>(nodes_.size());
            nodes_.push_back({{wt_node::absent, wt_node::absent}});
            const wt_node old = tmp[static_cast<std::size_t>(link)];
            const std::int32_t left = self(self, old.child[0], code << 1, depth + 1);
            const std::int32_t right = self(self, old.child[1], (code << 1) | 1u, depth + 1);
            nodes_[static_cast<std::size_t>(id)] = {{left, right}};
            return id;
        };
        visit(visit, static_cast<std::int32_t>(tmp.size() - 1), 0, 0);
    }

    void fill_bitvectors(std::int32_t v, unsigned depth, std::vector<std::uint16_t> seq, const params_type& params) {
        bit_buffer bits;
        bits.reserve(seq.size());
        std::vector<std::uint16_t> part[2];
        for (std::uint16_t s : seq) {
            const unsigned bit = (codes_[s] >> (code_lengths_[s] - 1 - depth)) & 1u;
            bits.push_back(bit != 0);
            part[bit].push_back(s);
        }
        seq = {};
        bitvectors_[static_cast<std::size_t>(v)] = Backend(bits, params);
        for (unsigned side = 0; side < 2; ++side) {
            const std::int32_t child = nodes_[static_cast<std::size_t>(v)].child[side];
            if (child >= 0) fill_bitvectors(child, depth + 1, std::move(part[side]), params);
        }
    }

    void validate() const {
        auto fail = [](const char* what) { throw std::invalid_argument(what); };
        if (size_ == 0) fail("wavelet tree: empty sequence");
        if (alphabet_.empty()) fail("wavelet tree: empty alphabet");
        for (std::size_t i = 0; i < alphabet_.size(); ++i) {
            if (alphabet_[i] >= max_sigma) fail("wavelet tree: symbol out of range");
            if (i > 0 && alphabet_[i] <= alphabet_[i - 1]) fail("wavelet tree: alphabet not strictly increasing");
        }
        if (codes_.size() != alphabet_.size() || code_lengths_.size() != alphabet_.size())
            fail("wavelet tree: codebook size mismatch");
        if (bitvectors_.size() != nodes_.size()) fail("wavelet tree: bitvector count mismatch");
        if (alphabet_.size() == 1) {
            if (!nodes_.empty() || code_lengths_[0] != 0) fail("wavelet tree: unary tree must have no nodes");
            return;
        }
        if (nodes_.size() + 1 < alphabet_.size() || nodes_.size() > 64 * alphabet_.size())
            fail("wavelet tree: node count inconsistent with alphabet");

        // Walk the topology: every node reached once, in preorder; every leaf's
        // path equals its stored code; bitvector lengths split exactly.
        std::vector<bool> leaf_seen(alphabet_.size(), false);
        std::size_t next_node = 0;
        std::uint64_t leaf_total = 0;
        auto walk = [&](auto&& self, std::int32_t link, std::uint64_t code, unsigned depth,
                        std::uint64_t expected_len) -> void {
            if (link == wt_node::absent) {
                if (expected_len != 0) fail("wavelet tree: symbols routed to an absent child");
                return;
            }
            if (wt_node::is_leaf(link)) {
                const std::size_t s = wt_node::leaf_symbol(link);
                if (s >= alphabet_.size() || leaf_seen[s]) fail("wavelet tree: bad leaf link");
                if (codes_[s] != code || code_lengths_[s] != depth) fail("wavelet tree: codebook disagrees with topology");
                if (expected_len == 0) fail("wavelet tree: leaf symbol with no occurrences");
                leaf_seen[s] = true;
                leaf_total += expected_len;
                return;
            }
            if (depth >= 64) fail("wavelet tree: path longer than 64");
            if (static_cast<std::size_t>(link) != next_node) fail("wavelet tree: nodes not in preorder");
            ++next_node;
            const Backend& bv = bitvectors_[static_cast<std::size_t>(link)];
            if (bv.size() != expected_len) fail("wavelet tree: bitvector length mismatch");
            const std::uint64_t ones = bv.rank1(bv.size());
            const wt_node node = nodes_[static_cast<std::size_t>(link)];
            self(self, node.child[0], code << 1, depth + 1, expected_len - ones);
            self(self, node.child[1], (code << 1) | 1u, depth + 1, ones);
        };
        walk(walk, 0, 0, 0, size_);
        if (next_node != nodes_.size()) fail("wavelet tree: unreachable nodes");
        if (leaf_total != size_ || std::find(leaf_seen.begin(), leaf_seen.end(), false) != leaf_seen.end())
            fail("wavelet tree: leaves do not cover the alphabet");
        if (shape_ == wt_shape::balanced) {
            const unsigned width = bits::ceil_log2(alphabet_.size());
            for (std::size_t i = 0; i < alphabet_.size(); ++i)
                if (codes_[i] != i || code_lengths_[i] != width) fail("wavelet tree: balanced codebook malformed");
        }
    }

    std::size_t size_ = 0;
    wt_shape shape_ = wt_shape::huffman;
    std::vector<symbol_t> alphabet_;
    std::vector<std::uint64_t> codes_;
    std::vector<std::uint8_t> code_lengths_;
    std::vector<wt_node> nodes_;
    std::vector<Backend> bitvectors_;
};

}  // namespace fbfm
