#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ibias/corpus.hpp"

namespace ibias {

struct Prediction {
    std::string id;
    double p_biased = 0.0;
    Label pred = Label::kNeutral;
    Label gold = Label::kNeutral;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Per-sentence predictions of one run (variant, fold, seed). fold is -1 for
/// predictions pooled across folds.
struct PredictionSet {
    std::string variant;
    long fold = -1;
    std::uint64_t seed = 0;
    std::vector<Prediction> items;

    friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

/// JSON lines, one object per item: {id, p_biased, pred, gold, variant, fold, seed}.
/// Labels are written as 0 (neutral) / 1 (biased).
std::string to_jsonl(const PredictionSet& p);
PredictionSet from_jsonl(std::string_view text);
void write_predictions(const PredictionSet& p, const std::filesystem::path& path);
PredictionSet read_predictions(const std::filesystem::path& path);

/// Concatenates per-fold sets of one seed into a corpus-wide set, ordered by id.
/// Throws ValidationError when an id occurs twice or seeds/variants disagree.
PredictionSet pool_predictions(const std::vector<PredictionSet>& parts);

}  // namespace ibias
