#include "ibias/splitter.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ibias/error.hpp"
#include "ibias/rng.hpp"

namespace ibias {

using nlohmann::json;

SentenceSplitPlan make_sentence_split(const Corpus& c, SplitSizes sizes, std::uint64_t seed) {
    const std::size_t n = c.sentence_count();
    if (sizes.train + sizes.dev + sizes.test != n) {
        throw ValidationError("split sizes " + std::to_string(sizes.train) + "/" + std::to_string(sizes.dev) + "/" +
                              std::to_string(sizes.test) + " sum to " +
                              std::to_string(sizes.train + sizes.dev + sizes.test) + ", corpus has " +
                              std::to_string(n) + " sentences");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span(order));

    // 0 = train, 1 = dev, 2 = test, indexed by corpus position.
    std::vector<int> section(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= sizes.train + sizes.dev) {
            section[order[i]] = 2;
        } else if (i >= sizes.train) {
            section[order[i]] = 1;
        }
    }
    SentenceSplitPlan plan;
    plan.seed = seed;
    const std::vector<std::string> ids = c.sentence_ids();
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = section[i] == 0 ? plan.train : section[i] == 1 ? plan.dev : plan.test;
        dst.push_back(ids[i]);
    }
    return plan;
}

FoldPlan make_story_folds(const Corpus& c, std::size_t k, std::uint64_t seed) {
    const std::vector<std::string> all = c.story_ids();
    if (k < 3) throw ValidationError("story folds need k >= 3 (test, dev and train groups), got " + std::to_string(k));
    if (k > all.size()) {
        throw ValidationError("k=" + std::to_string(k) + " exceeds story count " + std::to_string(all.size()));
    }
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span(order));

    std::vector<std::vector<std::size_t>> groups(k);
    const std::size_t base = all.size() / k;
    const std::size_t extra = all.size() % k;
    std::size_t pos = 0;
    for (std::size_t g = 0; g < k; ++g) {
        const std::size_t len = base + (g < extra ? 1 : 0);
        groups[g].assign(order.begin() + static_cast<long>(pos), order.begin() + static_cast<long>(pos + len));
        std::sort(groups[g].begin(), groups[g].end());
        pos += len;
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.story_ids = all;
    std::vector<int> role(all.size());
    for (std::size_t i = 0; i < k; ++i) {
        std::fill(role.begin(), role.end(), 0);
        for (std::size_t s : groups[i]) role[s] = 2;
        for (std::size_t s : groups[(i + 1) % k]) role[s] = 1;
        Fold f;
        for (std::size_t s = 0; s < all.size(); ++s) {
            (role[s] == 2 ? f.test_story_ids : role[s] == 1 ? f.dev_story_ids : f.train_story_ids).push_back(all[s]);
        }
        plan.folds.push_back(std::move(f));
    }
    return plan;
}

LeakageReport verify_no_story_leakage(const FoldPlan& p) {
    LeakageReport report;
    auto flag = [&](std::string story, long fold, std::string reason) {
        report.ok = false;
        report.violations.push_back({std::move(story), fold, std::move(reason)});
    };
    std::unordered_set<std::string> universe;
    for (const std::string& s : p.story_ids) {
        if (!universe.insert(s).second) flag(s, -1, "duplicate story in plan universe");
    }
    if (p.folds.size() != p.k) {
        flag("", -1, "plan declares k=" + std::to_string(p.k) + " but has " + std::to_string(p.folds.size()) +
                         " folds");
    }
    std::map<std::string, std::size_t> test_count;
    for (std::size_t fi = 0; fi < p.folds.size(); ++fi) {
        const Fold& f = p.folds[fi];
        const long fold = static_cast<long>(fi);
        std::map<std::string, int> occurrences;
        for (const auto* section : {&f.train_story_ids, &f.dev_story_ids, &f.test_story_ids}) {
            for (const std::string& s : *section) {
                ++occurrences[s];
                if (!universe.contains(s)) flag(s, fold, "story not in plan universe");
            }
        }
        for (const auto& [s, n] : occurrences) {
            if (n > 1) flag(s, fold, "story appears in more than one section");
        }
        for (const std::string& s : p.story_ids) {
            if (!occurrences.contains(s)) flag(s, fold, "story missing from fold");
        }
        for (const std::string& s : f.test_story_ids) ++test_count[s];
    }
    for (const std::string& s : p.story_ids) {
        const auto it = test_count.find(s);
        const std::size_t n = it == test_count.end() ? 0 : it->second;
        if (n != 1) flag(s, -1, "story tested in " + std::to_string(n) + " folds");
    }
    return report;
}

std::vector<std::string> sentences_of_stories(const Corpus& c, const std::vector<std::string>& story_ids) {
    std::unordered_set<std::string> wanted(story_ids.begin(), story_ids.end());
    std::vector<std::string> ids;
    for (const Story& st : c.stories()) {
        if (!wanted.contains(st.story_id)) continue;
        for (const ArticleRecord& a : st.articles)
            for (const SentenceRecord& s : a.sentences) ids.push_back(s.id);
    }
    return ids;
}

json fold_plan_to_json(const FoldPlan& p, const Corpus* c) {
    json folds = json::array();
    for (const Fold& f : p.folds) {
        json jf = {{"test_stories", f.test_story_ids},
                   {"dev_stories", f.dev_story_ids},
                   {"train_stories", f.train_story_ids}};
        if (c != nullptr) {
            const auto test = sentences_of_stories(*c, f.test_story_ids);
            const auto dev = sentences_of_stories(*c, f.dev_story_ids);
            const auto train = sentences_of_stories(*c, f.train_story_ids);
            jf["sizes"] = {{"train", train.size()}, {"dev", dev.size()}, {"test", test.size()}};
            jf["test_sentences"] = test;
            jf["dev_sentences"] = dev;
            jf["train_sentences"] = train;
        }
        folds.push_back(std::move(jf));
    }
    json j = {{"kind", "story_folds"},
              {"k", p.k},
              {"seed", p.seed},
              {"stories", p.story_ids},
              {"metadata", {{"dev_rule", "next_fold_test_group"}, {"balance", "story_count"}}},
              {"folds", folds}};
    if (c != nullptr) j["corpus_digest"] = c->provenance();
    return j;
}

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_array()) throw ValidationError(std::string("fold plan: missing array '") + key + "'");
    std::vector<std::string> out;
    for (const json& v : *it) {
        if (!v.is_string()) throw ValidationError(std::string("fold plan: non-string entry in '") + key + "'");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

FoldPlan fold_plan_from_json(const json& j) {
    if (!j.is_object() || j.value("kind", "") != "story_folds") throw ValidationError("not a story fold plan");
    FoldPlan p;
    try {
        p.k = j.at("k").get<std::size_t>();
        p.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("fold plan: ") + e.what());
    }
    p.story_ids = string_list(j, "stories");
    const auto it = j.find("folds");
    if (it == j.end() || !it->is_array()) throw ValidationError("fold plan: missing 'folds'");
    for (const json& jf : *it) {
        p.folds.push_back(
            {string_list(jf, "test_stories"), string_list(jf, "dev_stories"), string_list(jf, "train_stories")});
    }
    return p;
}

json sentence_split_to_json(const SentenceSplitPlan& p) {
    return {{"kind", "sentence_split"},
            {"seed", p.seed},
            {"sizes", {{"train", p.train.size()}, {"dev", p.dev.size()}, {"test", p.test.size()}}},
            {"train", p.train},
            {"dev", p.dev},
            {"test", p.test}};
}

SentenceSplitPlan sentence_split_from_json(const json& j) {
    if (!j.is_object() || j.value("kind", "") != "sentence_split") throw ValidationError("not a sentence split plan");
    SentenceSplitPlan p;
    p.seed = j.value("seed", std::uint64_t{0});
    p.train = string_list(j, "train");
    p.dev = string_list(j, "dev");
    p.test = string_list(j, "test");
    return p;
}

std::string serialize_fold_plan(const FoldPlan& p, const Corpus* c) { return fold_plan_to_json(p, c).dump(1) + "\n"; }

}  // namespace ibias
