#include <doctest.h>

#include "common.hpp"
#include "ibias/analysis.hpp"
#include "ibias/error.hpp"
#include "ibias/rng.hpp"
#include "ibias/synth.hpp"

using namespace ibias;

namespace {

Corpus random_corpus(std::uint64_t seed, std::size_t stories = 15) {
    RandomCorpusOptions o;
    o.stories = stories;
    o.seed = seed;
    o.bias_rate = 0.4;
    return make_random_corpus(o);
}

PredictionSet predictions(const Corpus& c, std::uint64_t seed, double flip) {
    Rng rng(seed);
    PredictionSet p;
    p.variant = "x";
    p.seed = seed;
    for (const auto& id : c.sentence_ids()) {
        const Label gold = sentence_label(*c.find(id));
        Label pred = gold;
        if (rng.uniform() < flip) pred = gold == Label::kBiased ? Label::kNeutral : Label::kBiased;
        p.items.push_back({id, pred == Label::kBiased ? 0.9 : 0.1, pred, gold});
    }
    return p;
}

}  // namespace

TEST_CASE("token counts") {
    CHECK(token_count("Hello, world!") == 2);
    CHECK(token_count("  -- ... ") == 0);
    CHECK(token_count("It's a \xE2\x80\x9Ctest\xE2\x80\x9D.") == 3);
}

TEST_CASE("quartiles of one to four") {
    const LengthQuartiles q = length_quartiles(std::vector<std::size_t>{4, 2, 1, 3});
    CHECK(q.bounds == std::array<std::size_t, 3>{1, 2, 3});
    CHECK(q.max_length == 4);
    for (std::size_t n = 1; n <= 4; ++n) CHECK(assign_length_bin(q, n) == n);
    CHECK_THROWS_AS(length_quartiles(std::vector<std::size_t>{}), ValidationError);
}

TEST_CASE("boundary counts go to the lower bin") {
    const LengthQuartiles q{{18, 27, 36}, 90};
    CHECK(assign_length_bin(q, 0) == 1);
    CHECK(assign_length_bin(q, 18) == 1);
    CHECK(assign_length_bin(q, 19) == 2);
    CHECK(assign_length_bin(q, 27) == 2);
    CHECK(assign_length_bin(q, 28) == 3);
    CHECK(assign_length_bin(q, 36) == 3);
    CHECK(assign_length_bin(q, 37) == 4);
}

TEST_CASE("nearest-rank quartiles on a larger sample") {
    std::vector<std::size_t> v;
    for (std::size_t i = 1; i <= 10; ++i) v.push_back(i * 3);
    // ranks ceil(2.5)=3, 5, ceil(7.5)=8 -> 9, 15, 24
    CHECK(length_quartiles(v).bounds == std::array<std::size_t, 3>{9, 15, 24});
}

TEST_CASE("schemes parse by name") {
    for (Scheme s : kAllSchemes) CHECK(parse_scheme(to_string(s)) == s);
    CHECK_THROWS_AS(parse_scheme("color"), ValidationError);
}

TEST_CASE("strata partition the predictions") {
    const Corpus c = random_corpus(3);
    const PredictionSet p = predictions(c, 1, 0.3);
    const SubjectivityLexicon lex =
        parse_mpqa_lexicon("type=strongsubj len=1 word1=critics pos1=noun stemmed1=n priorpolarity=negative\n");
    const StratifyContext ctx{&lex, std::nullopt};
    for (Scheme s : kAllSchemes) {
        const StratifiedReport r = stratify(p, c, s, ctx);
        std::size_t size = 0, biased = 0, tp = 0;
        for (const Stratum& st : r.strata) {
            size += st.size;
            biased += st.biased;
            tp += st.metrics.tp;
        }
        CHECK(size == r.all.size);
        CHECK(biased == r.all.biased);
        CHECK(tp == r.all.metrics.tp);
        if (s != Scheme::kQuote) CHECK(r.all.size == p.items.size());
    }
    CHECK_THROWS_AS(stratify(p, c, Scheme::kSubjectivity), ValidationError);
}

TEST_CASE("gold predictions score 100 everywhere") {
    const Corpus c = random_corpus(5, 30);
    const PredictionSet p = predictions(c, 1, 0.0);
    for (Scheme s : {Scheme::kLength, Scheme::kPublisher, Scheme::kLeaning, Scheme::kQuote}) {
        const StratifiedReport r = stratify(p, c, s);
        for (const Stratum& st : r.strata) {
            REQUIRE(st.biased > 0);
            CHECK(st.metrics.recall == 100.0);
            if (!r.recall_only) CHECK(st.metrics.f1 == 100.0);
        }
    }
}

TEST_CASE("quote scheme scores recall on biased sentences only") {
    const Corpus c = random_corpus(7, 20);
    const PredictionSet p = predictions(c, 2, 0.4);
    const StratifiedReport r = stratify(p, c, Scheme::kQuote);
    CHECK(r.recall_only);
    REQUIRE(r.strata.size() == 2);
    CHECK(r.strata[0].name == "no");
    CHECK(r.strata[1].name == "yes");
    CHECK(r.all.name == "all biased");
    std::size_t biased = 0, found = 0;
    for (const Prediction& x : p.items) {
        if (x.gold == Label::kBiased) {
            ++biased;
            found += x.pred == Label::kBiased;
        }
    }
    CHECK(r.all.size == biased);
    CHECK(r.all.bias_rate() == 100.0);
    CHECK(r.all.metrics.recall == doctest::Approx(100.0 * found / biased));
    // The overall recall is the size-weighted mean of the stratum recalls.
    const double weighted = (r.strata[0].metrics.recall * r.strata[0].size +
                             r.strata[1].metrics.recall * r.strata[1].size) / biased;
    CHECK(r.all.metrics.recall == doctest::Approx(weighted));
}

TEST_CASE("unknown ids are rejected") {
    const Corpus c = random_corpus(1, 4);
    PredictionSet p;
    p.items.push_back({"nope", 0.5, Label::kBiased, Label::kBiased});
    CHECK_THROWS_AS(stratify(p, c, Scheme::kPublisher), ValidationError);
}

TEST_CASE("strata comparisons mark significant differences") {
    const Corpus c = random_corpus(9, 20);
    std::vector<PredictionSet> base, sys;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        base.push_back(predictions(c, s, 0.45));
        sys.push_back(predictions(c, 100 + s, 0.02));
    }
    const SchemeComparison cmp = compare_strata(base, sys, c, Scheme::kPublisher, {});
    CHECK(cmp.metric == "f1");
    REQUIRE(cmp.rows.size() == 3);
    CHECK(cmp.all.marker == "+");
    CHECK(cmp.all.test->p < 0.05);
    const std::string table = render_table(cmp, "base", "sys");
    CHECK(table.find("†") != std::string::npos);
    CHECK(table.find("FOX") != std::string::npos);

    const SchemeComparison worse = compare_strata(sys, base, c, Scheme::kPublisher, {});
    CHECK(worse.all.marker == "-");
    CHECK(render_table(worse, "a", "b").find("‡") != std::string::npos);

    const SchemeComparison self = compare_strata(sys, sys, c, Scheme::kPublisher, {});
    CHECK(self.all.test->p == 1.0);
    CHECK(self.all.marker.empty());

    const SchemeComparison alone = compare_strata({}, sys, c, Scheme::kLeaning, {});
    CHECK_FALSE(alone.all.baseline);
    CHECK_FALSE(alone.all.test);
    CHECK(to_json(alone).at("all").at("baseline").is_null());
}

TEST_CASE("publisher by leaning table") {
    const Corpus c = random_corpus(2, 6);
    const std::string t = render_publisher_leaning(corpus_stats(c));
    CHECK(t.find("HPO") != std::string::npos);
    CHECK(t.find("center") != std::string::npos);
}
