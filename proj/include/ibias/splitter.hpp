#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ibias/corpus.hpp"

namespace ibias {

/// Sentence-level train/dev/test assignment. Each list is in corpus order.
struct SentenceSplitPlan {
    std::uint64_t seed = 0;
    std::vector<std::string> train;
    std::vector<std::string> dev;
    std::vector<std::string> test;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t dev = 0;
    std::size_t test = 0;
};

struct Fold {
    std::vector<std::string> test_story_ids;
    std::vector<std::string> dev_story_ids;
    std::vector<std::string> train_story_ids;

    friend bool operator==(const Fold&, const Fold&) = default;
};

/// Story-grouped k-fold plan. `story_ids` is the universe every fold must cover.
struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> story_ids;
    std::vector<Fold> folds;

    friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

/// Uniformly random assignment of sentences to sections of exactly the given
/// sizes. Throws ValidationError when the sizes do not sum to the corpus size.
SentenceSplitPlan make_sentence_split(const Corpus& c, SplitSizes sizes, std::uint64_t seed);

/// Shuffles stories by seed and deals them into k near-equal test groups
/// (the first `stories % k` groups get one extra story). Fold i tests group i,
/// develops on group (i + 1) mod k and trains on the rest. Requires 3 <= k <= stories.
FoldPlan make_story_folds(const Corpus& c, std::size_t k, std::uint64_t seed);

struct LeakageViolation {
    std::string story_id;
    /// Fold index, or -1 for plan-wide violations (test-set coverage).
    long fold = -1;
    std::string reason;

    friend bool operator==(const LeakageViolation&, const LeakageViolation&) = default;
};

struct LeakageReport {
    bool ok = true;
    std::vector<LeakageViolation> violations;
};

/// Checks that every fold assigns each story to exactly one section and that
/// each story is tested in exactly one fold.
LeakageReport verify_no_story_leakage(const FoldPlan& p);

/// Sentence ids of the given stories, in corpus order.
std::vector<std::string> sentences_of_stories(const Corpus& c, const std::vector<std::string>& story_ids);

nlohmann::json fold_plan_to_json(const FoldPlan& p, const Corpus* c = nullptr);
FoldPlan fold_plan_from_json(const nlohmann::json& j);
nlohmann::json sentence_split_to_json(const SentenceSplitPlan& p);
SentenceSplitPlan sentence_split_from_json(const nlohmann::json& j);

/// Canonical serialized form, used for digests and byte-exact comparisons.
std::string serialize_fold_plan(const FoldPlan& p, const Corpus* c = nullptr);

}  // namespace ibias
