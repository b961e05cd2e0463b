#include <doctest.h>

#include "common.hpp"
#include "ibias/error.hpp"
#include "ibias/prediction.hpp"

using namespace ibias;

namespace {

PredictionSet sample(long fold, std::vector<std::string> ids) {
    PredictionSet p;
    p.variant = "evcim";
    p.fold = fold;
    p.seed = 3;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        p.items.push_back({ids[i], 0.125 * static_cast<double>(i), i % 2 ? Label::kBiased : Label::kNeutral,
                           i % 3 ? Label::kBiased : Label::kNeutral});
    }
    return p;
}

}  // namespace

TEST_CASE("jsonl round trip") {
    const PredictionSet p = sample(2, {"1fox00", "1fox01", "2hpo03"});
    const std::string text = to_jsonl(p);
    CHECK(from_jsonl(text) == p);
    const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
    CHECK(first.at("pred") == 0);
    CHECK(first.at("gold") == 0);
    CHECK(first.at("variant") == "evcim");
    CHECK(first.at("fold") == 2);
    const auto dir = test::temp_dir("predictions");
    write_predictions(p, dir / "p.jsonl");
    CHECK(read_predictions(dir / "p.jsonl") == p);
}

TEST_CASE("p_biased survives exactly") {
    PredictionSet p = sample(0, {"a"});
    p.items[0].p_biased = 0.1 + 0.2;
    CHECK(from_jsonl(to_jsonl(p)).items[0].p_biased == p.items[0].p_biased);
}

TEST_CASE("malformed jsonl") {
    CHECK_THROWS_AS(from_jsonl("{\"id\": 1}\n"), ValidationError);
    CHECK_THROWS_AS(from_jsonl("nope\n"), ValidationError);
    CHECK(from_jsonl("").items.empty());
}

TEST_CASE("pooling folds of one seed") {
    const PredictionSet a = sample(0, {"3nyt01", "1fox00"});
    const PredictionSet b = sample(1, {"2hpo00"});
    const PredictionSet pooled = pool_predictions({a, b});
    CHECK(pooled.fold == -1);
    CHECK(pooled.seed == 3);
    REQUIRE(pooled.items.size() == 3);
    CHECK(pooled.items[0].id == "1fox00");
    CHECK(pooled.items[2].id == "3nyt01");
    CHECK_THROWS_AS(pool_predictions({a, a}), ValidationError);
    PredictionSet other = b;
    other.seed = 4;
    CHECK_THROWS_AS(pool_predictions({a, other}), ValidationError);
}
