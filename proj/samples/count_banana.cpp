// Builds each index variant over a small text and counts a few patterns.
#include <iostream>

#include "fbfm/fbfm.hpp"

int main() {
    const auto text = fbfm::Text::from_bytes("BANANA");
    for (auto v : {fbfm::index_variant::ssa, fbfm::index_variant::ssa_rrr, fbfm::index_variant::fixed_block,
                   fbfm::index_variant::fixed_block_rrr}) {
        fbfm::index_config cfg;
        cfg.variant = v;
        cfg.block_size = 3;
        const auto ix = fbfm::fm_index::build(text, cfg);
        std::cout << fbfm::variant_name(v) << ":";
        for (const char* p : {"A", "ANA", "BANANA", "NAB"}) std::cout << ' ' << p << '=' << ix.count(p);
        std::cout << "  (" << ix.size_report().bits_per_symbol() << " bits/symbol)\n";
    }
}
