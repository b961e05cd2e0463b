#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibias/error.hpp"

namespace ibias {

struct WindowPosition {
    std::size_t sentence = 0;
    bool is_bookend = false;

    friend bool operator==(const WindowPosition&, const WindowPosition&) = default;
};

/// One fixed-length slice of an article: a contiguous core of sentences with
/// an optional leading book-end (previous core's last sentence) and trailing
/// book-end (next core's first sentence).
struct WindowSequence {
    std::string article_ref;
    std::vector<WindowPosition> positions;

    std::size_t core_size() const;

    friend bool operator==(const WindowSequence&, const WindowSequence&) = default;
};

/// Splits sentences 0..n-1 into ceil(n / max_core) cores of at most max_core
/// sentences and adds book-ends between neighbouring cores. The outer edges of
/// the article get no book-end. Throws ValidationError for n == 0 or max_core == 0.
std::vector<WindowSequence> segment_article(std::size_t n, std::size_t max_core, std::string article_ref = {});

/// Maps per-position values back to one value per sentence, taken from each
/// sentence's core occurrence. Book-end positions are discarded.
template <typename T>
std::vector<T> reassemble_predictions(const std::vector<WindowSequence>& seqs,
                                      const std::vector<std::vector<T>>& preds) {
    if (preds.size() != seqs.size()) {
        throw ValidationError("reassemble: " + std::to_string(preds.size()) + " prediction rows for " +
                              std::to_string(seqs.size()) + " sequences");
    }
    std::size_t n = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        if (preds[i].size() != seqs[i].positions.size()) {
            throw ValidationError("reassemble: sequence " + std::to_string(i) + " has " +
                                  std::to_string(seqs[i].positions.size()) + " positions but " +
                                  std::to_string(preds[i].size()) + " predictions");
        }
        n += seqs[i].core_size();
    }
    std::vector<T> out(n);
    std::vector<int> seen(n, 0);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        for (std::size_t p = 0; p < seqs[i].positions.size(); ++p) {
            const WindowPosition& pos = seqs[i].positions[p];
            if (pos.is_bookend) continue;
            if (pos.sentence >= n) throw std::logic_error("reassemble: core sentence index out of range");
            out[pos.sentence] = preds[i][p];
            ++seen[pos.sentence];
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s] != 1) {
            throw std::logic_error("reassemble: sentence " + std::to_string(s) + " has " + std::to_string(seen[s]) +
                                   " core occurrences");
        }
    }
    return out;
}

}  // namespace ibias
