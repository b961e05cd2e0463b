#include "ibias/windowing.hpp"

#include <algorithm>

namespace ibias {

std::size_t WindowSequence::core_size() const {
    return static_cast<std::size_t>(
        std::count_if(positions.begin(), positions.end(), [](const WindowPosition& p) { return !p.is_bookend; }));
}

std::vector<WindowSequence> segment_article(std::size_t n, std::size_t max_core, std::string article_ref) {
    if (n == 0) throw ValidationError("segment_article: article has no sentences");
    if (max_core == 0) throw ValidationError("segment_article: window length must be positive");
    const std::size_t chunks = (n + max_core - 1) / max_core;
    std::vector<WindowSequence> seqs;
    seqs.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t lo = c * max_core;
        const std::size_t hi = std::min(n, lo + max_core);
        WindowSequence seq;
        seq.article_ref = article_ref;
        if (c > 0) seq.positions.push_back({lo - 1, true});
        for (std::size_t s = lo; s < hi; ++s) seq.positions.push_back({s, false});
        if (c + 1 < chunks) seq.positions.push_back({hi, true});
        seqs.push_back(std::move(seq));
    }
    return seqs;
}

}  // namespace ibias
