#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_set>

#include "ibias/corpus.hpp"
#include "ibias/embeddings.hpp"

namespace ibias {

struct RandomCorpusOptions {
    std::size_t stories = 10;
    std::size_t min_sentences = 1;
    std::size_t max_sentences = 12;
    double bias_rate = 0.15;
    std::uint64_t seed = 1;
};

/// Well-formed random corpus (ids follow `<story><source><index>`).
Corpus make_random_corpus(const RandomCorpusOptions& opts);

/// Independent N(0, 1) vectors for every corpus sentence.
EmbeddingTable make_random_embeddings(const Corpus& c, std::size_t dim, std::uint64_t seed);

struct ContextSynthOptions {
    std::size_t stories = 200;
    std::size_t dim = 16;
    std::size_t min_sentences = 4;
    std::size_t max_sentences = 8;
    /// Probability that a story's hidden threshold is low (ambiguous targets become biased).
    double low_threshold_share = 1.0 / 3.0;
    std::uint64_t seed = 1;
};

/// Corpus whose labels need event context.
///
/// Every story draws a hidden threshold theta in {-1, +1}. A sentence is biased
/// iff component 0 of its vector exceeds theta. Component 0 is drawn from
/// (-2, -1.2) (always neutral), (1.2, 2) (always biased) or (-0.8, 0.8)
/// (label decided by theta) with probabilities 1/4, 1/4, 1/2. Theta is only
/// observable as component 1 of the first HPO sentence of the story.
struct ContextSynth {
    Corpus corpus;
    EmbeddingTable embeddings;
    /// Sentences whose label is decided by the story threshold.
    std::unordered_set<std::string> context_dependent;
};

ContextSynth make_context_synthetic(const ContextSynthOptions& opts);

}  // namespace ibias
