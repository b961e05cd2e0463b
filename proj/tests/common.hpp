#pragma once

#include <array>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ibias/corpus.hpp"

namespace ibias::test {

inline std::filesystem::path temp_dir(const std::string& name) {
    const char* root = std::getenv("IBIAS_TEST_TMP");
    const std::filesystem::path base = root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "ibias_tests";
    const std::filesystem::path dir = base / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline nlohmann::json sentence_json(const std::string& id, std::size_t index, const std::string& text,
                                    nlohmann::json spans = nlohmann::json::array()) {
    return {{"id", id}, {"index", index}, {"text", text}, {"spans", std::move(spans)}};
}

inline nlohmann::json article_json(const std::string& story, const std::string& source, const std::string& leaning,
                                   nlohmann::json sentences) {
    return {{"story_id", story}, {"source", source}, {"leaning", leaning}, {"sentences", std::move(sentences)}};
}

inline nlohmann::json informational(std::size_t start, std::size_t end, bool quote = false) {
    return {{"start", start}, {"end", end}, {"kind", "informational"}, {"in_quote", quote}};
}

inline nlohmann::json lexical(std::size_t start, std::size_t end) {
    return {{"start", start}, {"end", end}, {"kind", "lexical"}, {"in_quote", false}};
}

/// One story of three single-sentence articles.
inline nlohmann::json minimal_corpus_json() {
    using nlohmann::json;
    json story = {{"story_id", "1"},
                  {"articles",
                   json::array({article_json("1", "FOX", "right", json::array({sentence_json("1fox00", 0, "Tax cuts pass.")})),
                                article_json("1", "NYT", "center", json::array({sentence_json("1nyt00", 0, "Senate votes.", json::array({informational(0, 6)}))})),
                                article_json("1", "HPO", "left", json::array({sentence_json("1hpo00", 0, "Critics object.")}))})}};
    return {{"stories", json::array({story})}};
}

/// Corpus built from stories whose articles hold the given sentence counts.
/// Sentence i of an article is biased when `biased(story, source, i)` holds.
template <typename Pred>
Corpus counted_corpus(const std::vector<std::array<std::size_t, 3>>& counts, Pred biased) {
    std::vector<Story> stories;
    for (std::size_t s = 0; s < counts.size(); ++s) {
        Story st;
        st.story_id = std::to_string(s + 1);
        for (std::size_t a = 0; a < 3; ++a) {
            ArticleRecord art;
            art.source = kSources[a];
            art.leaning = kLeanings[a];
            art.story_id = st.story_id;
            for (std::size_t i = 0; i < counts[s][a]; ++i) {
                SentenceRecord r;
                r.id = st.story_id + std::string(to_string(art.source)) + std::to_string(i);
                r.index = i;
                r.text = "word number " + std::to_string(i) + " here";
                if (biased(s, a, i)) r.spans.push_back({0, 4, SpanKind::kInformational, false});
                art.sentences.push_back(std::move(r));
            }
            st.articles.push_back(std::move(art));
        }
        stories.push_back(std::move(st));
    }
    return Corpus::from_stories(std::move(stories), "test");
}

}  // namespace ibias::test
