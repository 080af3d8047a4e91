#pragma once

// Binary index container. Layout (all integers little-endian):
//
//   magic "FBFMIDX1" | u16 version
//   u8 variant | u8 rrr block bits (0 for plain backends)
//   u64 n | u64 sigma | u64 block size | u64 block count
//   u16[256] remap | u64[sigma + 1] C array
//   u64 section bytes | boundary table: u64 count, u8 width, u64 words
//   per block: u64 section bytes | wavelet tree
//   u64 FNV-1a checksum of every preceding byte
//
// See docs/index_format.md for the wavelet tree and bitvector records.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "fbfm/fm_index.hpp"

namespace fbfm {

namespace storage {

inline constexpr std::array<char, 8> magic = {'F', 'B', 'F', 'M', 'I', 'D', 'X', '1'};
inline constexpr std::uint16_t version = 1;

inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

class byte_writer {
   public:
    template <class T>
    void put(T value) {
        static_assert(std::is_integral_v<T>);
        using U = std::make_unsigned_t<T>;
        auto u = static_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(u & 0xffu));
            if constexpr (sizeof(T) > 1) u = static_cast<U>(u >> 8);
        }
    }
    void put_words(std::span<const std::uint64_t> words) {
        for (auto w : words) put<std::uint64_t>(w);
    }
    void put_packed(const packed_ints& p) {
        put<std::uint64_t>(p.size());
        put<std::uint8_t>(static_cast<std::uint8_t>(p.width()));
        put_words(p.words());
    }
    /// Appends `section` prefixed by its byte length.
    void put_section(const byte_writer& section) {
        put<std::uint64_t>(section.bytes_.size());
        bytes_.insert(bytes_.end(), section.bytes_.begin(), section.bytes_.end());
    }
    void put_raw(std::span<const char> raw) { bytes_.insert(bytes_.end(), raw.begin(), raw.end()); }

    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

   private:
    std::vector<std::uint8_t> bytes_;
};

class byte_reader {
   public:
    explicit byte_reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        static_assert(std::is_integral_v<T>);
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            u = static_cast<std::make_unsigned_t<T>>(u | (static_cast<std::make_unsigned_t<T>>(bytes_[pos_ + i]) << (8 * i)));
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    std::vector<std::uint64_t> get_words(std::uint64_t count) {
        if (count > remaining() / 8) truncated();
        std::vector<std::uint64_t> w(static_cast<std::size_t>(count));
        for (auto& x : w) x = get<std::uint64_t>();
        return w;
    }
    packed_ints get_packed(const char* what) {
        const auto count = get<std::uint64_t>();
        const unsigned width = get<std::uint8_t>();
        if (width == 0 || width > 64) corrupt(what);
        if (count > remaining() * 8 / width + 1) truncated();
        auto words = get_words(bits::words_for(static_cast<std::size_t>(count) * width));
        return packed_ints(static_cast<std::size_t>(count), width, std::move(words));
    }
    /// Reader over the next length-prefixed section.
    byte_reader section() {
        const auto len = get<std::uint64_t>();
        if (len > remaining()) truncated();
        byte_reader sub(bytes_.subspan(pos_, static_cast<std::size_t>(len)));
        pos_ += static_cast<std::size_t>(len);
        return sub;
    }
    void get_raw(std::span<char> out) {
        need(out.size());
        std::memcpy(out.data(), bytes_.data() + pos_, out.size());
        pos_ += out.size();
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    std::size_t position() const noexcept { return pos_; }

    [[noreturn]] static void truncated() { throw format_error("corrupt index: truncated"); }
    [[noreturn]] static void corrupt(const std::string& what) { throw format_error("corrupt index: " + what); }

   private:
    void need(std::size_t k) const {
        if (k > remaining()) truncated();
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

inline void write_bitvector(byte_writer& w, const plain_rank_bitvector& bv) {
    w.put<std::uint64_t>(bv.size());
    w.put_words(bv.words());
    w.put_words(bv.superblocks());
    for (auto b : bv.blocks()) w.put<std::uint16_t>(b);
}

inline void write_bitvector(byte_writer& w, const rrr_rank_bitvector& bv) {
    w.put<std::uint64_t>(bv.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(bv.block_bits()));
    w.put_packed(bv.classes());
    w.put<std::uint64_t>(bv.offset_bits());
    w.put_words(bv.offsets());
    w.put_packed(bv.sample_positions());
    w.put_packed(bv.sample_ranks());
}

inline plain_rank_bitvector read_bitvector(byte_reader& r, const plain_rank_bitvector*, unsigned) {
    const auto size = r.get<std::uint64_t>();
    if (size > r.remaining() * 8) byte_reader::truncated();
    auto words = r.get_words(bits::words_for(static_cast<std::size_t>(size)));
    const std::size_t sz = static_cast<std::size_t>(size);
    auto supers = r.get_words(sz / plain_rank_bitvector::superblock_bits + 1);
    std::vector<std::uint16_t> blocks(sz / plain_rank_bitvector::block_bits + 1);
    if (blocks.size() > r.remaining() / 2) byte_reader::truncated();
    for (auto& b : blocks) b = r.get<std::uint16_t>();
    try {
        auto bv = plain_rank_bitvector::from_words(sz, std::move(words));
        if (bv.superblocks() != supers || bv.blocks() != blocks) byte_reader::corrupt("rank directory");
        return bv;
    } catch (const std::invalid_argument& e) {
        byte_reader::corrupt(std::string("bitvector: ") + e.what());
    }
}

inline rrr_rank_bitvector read_bitvector(byte_reader& r, const rrr_rank_bitvector*, unsigned expected_t) {
    const auto size = r.get<std::uint64_t>();
    const unsigned t = r.get<std::uint8_t>();
    if (t != expected_t) byte_reader::corrupt("rrr block size");
    auto classes = r.get_packed("rrr classes");
    const auto offset_bits = r.get<std::uint64_t>();
    if (offset_bits > r.remaining() * 8) byte_reader::truncated();
    auto offsets = r.get_words(bits::words_for(static_cast<std::size_t>(offset_bits)));
    auto sample_pos = r.get_packed("rrr samples");
    auto sample_rank = r.get_packed("rrr samples");
    try {
        auto bv = rrr_rank_bitvector::from_parts(static_cast<std::size_t>(size), t, std::move(classes),
                                                 std::move(offsets), static_cast<std::size_t>(offset_bits));
        if (!(bv.sample_positions() == sample_pos) || !(bv.sample_ranks() == sample_rank))
            byte_reader::corrupt("rrr samples");
        return bv;
    } catch (const std::invalid_argument& e) {
        byte_reader::corrupt(std::string("bitvector: ") + e.what());
    }
}

template <class Backend>
void write_tree(byte_writer& w, const wavelet_tree<Backend>& t) {
    w.put<std::uint64_t>(t.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.shape()));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(t.alphabet().size()));
    for (auto s : t.alphabet()) w.put<std::uint16_t>(s);
    for (auto len : t.code_lengths()) w.put<std::uint8_t>(len);
    for (auto code : t.codes()) w.put<std::uint64_t>(code);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.nodes().size()));
    for (const auto& node : t.nodes()) {
        w.put<std::int32_t>(node.child[0]);
        w.put<std::int32_t>(node.child[1]);
    }
    for (const auto& bv : t.bitvectors()) write_bitvector(w, bv);
}

template <class Backend>
wavelet_tree<Backend> read_tree(byte_reader& r, unsigned rrr_bits) {
    const auto size = r.get<std::uint64_t>();
    const auto shape_code = r.get<std::uint8_t>();
    if (shape_code > 1) byte_reader::corrupt("wavelet tree shape");
    const std::size_t sigma_local = r.get<std::uint16_t>();
    if (sigma_local == 0 || sigma_local > max_sigma) byte_reader::corrupt("wavelet tree alphabet");
    std::vector<symbol_t> alphabet(sigma_local);
    for (auto& s : alphabet) s = r.get<std::uint16_t>();
    std::vector<std::uint8_t> lengths(sigma_local);
    for (auto& len : lengths) len = r.get<std::uint8_t>();
    std::vector<std::uint64_t> codes(sigma_local);
    for (auto& code : codes) code = r.get<std::uint64_t>();
    const std::size_t node_count = r.get<std::uint32_t>();
    if (node_count > r.remaining() / 8) byte_reader::truncated();
    std::vector<wt_node> nodes(node_count);
    for (auto& node : nodes) {
        node.child[0] = r.get<std::int32_t>();
        node.child[1] = r.get<std::int32_t>();
    }
    std::vector<Backend> bvs;
    bvs.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) bvs.push_back(read_bitvector(r, static_cast<const Backend*>(nullptr), rrr_bits));
    try {
        return wavelet_tree<Backend>::from_parts(static_cast<std::size_t>(size), static_cast<wt_shape>(shape_code),
                                                 std::move(alphabet), std::move(codes), std::move(lengths),
                                                 std::move(nodes), std::move(bvs));
    } catch (const std::invalid_argument& e) {
        byte_reader::corrupt(e.what());
    }
}

template <class Backend>
std::vector<std::uint8_t> encode(const blocked_fm_index<Backend>& ix, unsigned rrr_bits) {
    byte_writer w;
    w.put_raw(magic);
    w.put<std::uint16_t>(version);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(ix.variant()));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(rrr_bits));
    w.put<std::uint64_t>(ix.size());
    w.put<std::uint64_t>(ix.sigma());
    w.put<std::uint64_t>(ix.block_size());
    w.put<std::uint64_t>(ix.block_count());
    for (auto code : ix.remap()) w.put<std::uint16_t>(code);
    w.put_words(ix.c_array());

    byte_writer boundary;
    boundary.put_packed(ix.boundary_occ());
    w.put_section(boundary);
    for (const auto& tree : ix.blocks()) {
        byte_writer section;
        write_tree(section, tree);
        w.put_section(section);
    }
    w.put<std::uint64_t>(fnv1a(w.bytes()));
    return w.bytes();
}

template <class Backend>
typename Backend::params_type params_for(unsigned rrr_bits) {
    if constexpr (std::is_same_v<Backend, rrr_rank_bitvector>)
        return {rrr_bits};
    else
        return {};
}

template <class Backend>
blocked_fm_index<Backend> decode_index(byte_reader& r, index_variant variant, unsigned rrr_bits) {
    const auto n = r.get<std::uint64_t>();
    const auto sigma = r.get<std::uint64_t>();
    const auto block_size = r.get<std::uint64_t>();
    const auto block_count = r.get<std::uint64_t>();
    if (sigma < 2 || sigma > max_sigma) byte_reader::corrupt("sigma");
    if (n == 0 || block_size == 0) byte_reader::corrupt("header");
    if (block_count == 0 || block_count > r.remaining() / 8) byte_reader::corrupt("block count");
    remap_table remap{};
    for (auto& code : remap) code = r.get<std::uint16_t>();
    auto c = r.get_words(sigma + 1);

    byte_reader boundary_section = r.section();
    auto boundary = boundary_section.get_packed("boundary_occ");
    if (boundary_section.remaining() != 0) byte_reader::corrupt("section length");

    std::vector<wavelet_tree<Backend>> blocks;
    blocks.reserve(static_cast<std::size_t>(block_count));
    for (std::uint64_t i = 0; i < block_count; ++i) {
        byte_reader section = r.section();
        try {
            blocks.push_back(read_tree<Backend>(section, rrr_bits));
        } catch (const format_error& e) {
            throw format_error(std::string(e.what()) + " (block " + std::to_string(i) + ")");
        }
        if (section.remaining() != 0) byte_reader::corrupt("section length");
    }
    if (r.remaining() != 0) byte_reader::corrupt("trailing bytes");
    try {
        return blocked_fm_index<Backend>::from_parts(variant, static_cast<std::size_t>(n), static_cast<std::size_t>(sigma),
                                                     static_cast<std::size_t>(block_size), std::move(c), remap,
                                                     std::move(blocks), std::move(boundary), params_for<Backend>(rrr_bits));
    } catch (const std::invalid_argument& e) {
        byte_reader::corrupt(e.what());
    }
}

}  // namespace storage

/// Encodes the index; identical indexes produce identical bytes.
inline std::vector<std::uint8_t> serialize_bytes(const fm_index& ix) {
    return ix.visit([](const auto& impl) {
        using impl_t = std::decay_t<decltype(impl)>;
        unsigned rrr_bits = 0;
        if constexpr (std::is_same_v<impl_t, rrr_fm_index>) rrr_bits = impl.params().block_bits;
        return storage::encode(impl, rrr_bits);
    });
}

/// Writes the index to `out` and returns the number of bytes written.
inline std::size_t serialize(const fm_index& ix, std::ostream& out) {
    const auto bytes = serialize_bytes(ix);
    const auto before = out.tellp();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
        const auto now = out.tellp();
        const long long written = (before >= 0 && now >= 0) ? static_cast<long long>(now - before) : -1;
        throw std::runtime_error("index write failed after " + std::to_string(written < 0 ? 0 : written) + " of " +
                                 std::to_string(bytes.size()) + " bytes");
    }
    return bytes.size();
}

/// Structural checks run first so a damaged field is named; the checksum then
/// catches damage that still parses.
inline fm_index deserialize_bytes(std::span<const std::uint8_t> bytes) {
    storage::byte_reader head(bytes);
    std::array<char, 8> tag{};
    if (head.remaining() < tag.size()) throw format_error("unsupported format: file too short for magic");
    head.get_raw(tag);
    if (tag != storage::magic) throw format_error("unsupported format: bad magic");
    const auto ver = head.get<std::uint16_t>();
    if (ver != storage::version) throw format_error("unsupported format: version " + std::to_string(ver));
    if (bytes.size() < head.position() + 2 + 8) storage::byte_reader::truncated();

    const auto body = bytes.first(bytes.size() - 8);
    storage::byte_reader r(body);
    r.get_raw(tag);
    (void)r.get<std::uint16_t>();
    const auto variant_code = r.get<std::uint8_t>();
    if (variant_code > 3) storage::byte_reader::corrupt("variant");
    const auto variant = static_cast<index_variant>(variant_code);
    const unsigned rrr_bits = r.get<std::uint8_t>();
    auto ix = [&] {
        if (uses_rrr(variant)) {
            if (rrr_bits < 1 || rrr_bits > rrr::max_block_bits) storage::byte_reader::corrupt("rrr block size");
            return fm_index(storage::decode_index<rrr_rank_bitvector>(r, variant, rrr_bits));
        }
        if (rrr_bits != 0) storage::byte_reader::corrupt("rrr block size");
        return fm_index(storage::decode_index<plain_rank_bitvector>(r, variant, 0));
    }();
    storage::byte_reader tail(bytes.subspan(body.size()));
    if (tail.get<std::uint64_t>() != storage::fnv1a(body)) storage::byte_reader::corrupt("checksum");
    return ix;
}

inline fm_index deserialize(std::istream& in) {
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_bytes(bytes);
}

inline std::size_t save_index(const fm_index& ix, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return serialize(ix, out);
}

inline fm_index load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return deserialize(in);
}

}  // namespace fbfm
