#include "ibias/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ibias/digest.hpp"
#include "ibias/error.hpp"
#include "ibias/text.hpp"

namespace ibias {

using nlohmann::json;

std::string_view to_string(Source s) {
    switch (s) {
        case Source::kFox: return "FOX";
        case Source::kNyt: return "NYT";
        case Source::kHpo: return "HPO";
    }
    return "?";
}

std::string_view to_string(Leaning l) {
    switch (l) {
        case Leaning::kRight: return "right";
        case Leaning::kCenter: return "center";
        case Leaning::kLeft: return "left";
    }
    return "?";
}

std::string_view to_string(SpanKind k) {
    return k == SpanKind::kInformational ? "informational" : "lexical";
}

std::string_view to_string(Label l) { return l == Label::kBiased ? "biased" : "neutral"; }

std::optional<Source> parse_source(std::string_view s) {
    const std::string up = [&] {
        std::string u(s);
        for (char& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return u;
    }();
    for (Source src : kSources) {
        if (up == to_string(src)) return src;
    }
    return std::nullopt;
}

std::optional<Leaning> parse_leaning(std::string_view s) {
    const std::string low = text::ascii_lower(s);
    for (Leaning l : kLeanings) {
        if (low == to_string(l)) return l;
    }
    return std::nullopt;
}

Corpus Corpus::from_stories(std::vector<Story> stories, std::string provenance) {
    Corpus c;
    c.provenance_ = std::move(provenance);
    for (std::size_t si = 0; si < stories.size(); ++si) {
        Story& story = stories[si];
        const std::string where = "story '" + story.story_id + "'";
        if (story.story_id.empty()) throw ValidationError("story #" + std::to_string(si) + ": empty story_id");
        if (c.story_index_.contains(story.story_id)) throw ValidationError(where + ": duplicate story_id");
        if (story.articles.size() != 3) {
            throw ValidationError(where + ": incomplete triple (" + std::to_string(story.articles.size()) +
                                  " articles, expected one each from FOX, NYT, HPO)");
        }
        std::array<bool, 3> seen{};
        for (const ArticleRecord& a : story.articles) {
            const auto k = static_cast<std::size_t>(a.source);
            if (seen[k]) throw ValidationError(where + ": duplicate source " + std::string(to_string(a.source)));
            seen[k] = true;
            if (a.story_id != story.story_id) {
                throw ValidationError(where + ": article story_id '" + a.story_id + "' does not match");
            }
        }
        std::sort(story.articles.begin(), story.articles.end(),
                  [](const ArticleRecord& a, const ArticleRecord& b) { return a.source < b.source; });
        for (std::size_t ai = 0; ai < 3; ++ai) {
            const ArticleRecord& a = story.articles[ai];
            const std::string awhere = where + " " + std::string(to_string(a.source));
            if (a.sentences.empty()) throw ValidationError(awhere + ": article has no sentences");
            for (std::size_t k = 0; k < a.sentences.size(); ++k) {
                const SentenceRecord& s = a.sentences[k];
                const std::string swhere = awhere + " sentence '" + s.id + "'";
                if (s.id.empty()) throw ValidationError(awhere + ": sentence with empty id");
                if (s.index != k) {
                    throw ValidationError(swhere + ": sentence indices not contiguous (expected " +
                                          std::to_string(k) + ", found " + std::to_string(s.index) + ")");
                }
                if (text::is_blank(s.text)) throw ValidationError(swhere + ": empty text");
                const std::size_t len = text::scalar_length(s.text);
                for (const Span& sp : s.spans) {
                    if (!(sp.start < sp.end && sp.end <= len)) {
                        throw ValidationError(swhere + ": span [" + std::to_string(sp.start) + ", " +
                                              std::to_string(sp.end) + ") outside text of length " +
                                              std::to_string(len));
                    }
                }
                if (!c.index_.emplace(s.id, SentenceLocation{si, ai, k}).second) {
                    throw ValidationError(swhere + ": duplicate sentence id");
                }
            }
        }
        c.story_index_.emplace(story.story_id, si);
    }
    c.stories_ = std::move(stories);
    return c;
}

const SentenceRecord* Corpus::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &at(it->second);
}

std::optional<SentenceLocation> Corpus::locate(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const SentenceRecord& Corpus::at(const SentenceLocation& loc) const {
    return stories_[loc.story].articles[loc.article].sentences[loc.sentence];
}

const ArticleRecord& Corpus::article_of(const SentenceLocation& loc) const {
    return stories_[loc.story].articles[loc.article];
}

const Story* Corpus::find_story(std::string_view story_id) const {
    const auto it = story_index_.find(std::string(story_id));
    return it == story_index_.end() ? nullptr : &stories_[it->second];
}

std::vector<std::string> Corpus::sentence_ids() const {
    std::vector<std::string> ids;
    ids.reserve(index_.size());
    for (const Story& st : stories_)
        for (const ArticleRecord& a : st.articles)
            for (const SentenceRecord& s : a.sentences) ids.push_back(s.id);
    return ids;
}

std::vector<std::string> Corpus::story_ids() const {
    std::vector<std::string> ids;
    ids.reserve(stories_.size());
    for (const Story& st : stories_) ids.push_back(st.story_id);
    return ids;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + ": expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) throw ValidationError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::size_t require_index(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_unsigned()) throw ValidationError(where + "." + key + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

const json& require_array(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_array()) throw ValidationError(where + "." + key + ": expected an array");
    return v;
}

Span parse_span(const json& j, const std::string& where) {
    Span sp;
    sp.start = require_index(j, "start", where);
    sp.end = require_index(j, "end", where);
    const std::string kind = require_string(j, "kind", where);
    if (kind == "informational") {
        sp.kind = SpanKind::kInformational;
    } else if (kind == "lexical") {
        sp.kind = SpanKind::kLexical;
    } else {
        throw ValidationError(where + ".kind: unknown span kind '" + kind + "'");
    }
    if (const auto it = j.find("in_quote"); it != j.end() && !it->is_null()) {
        if (!it->is_boolean()) throw ValidationError(where + ".in_quote: expected a boolean");
        sp.in_quote = it->get<bool>();
    }
    return sp;
}

}  // namespace

Corpus parse_corpus_text(std::string_view json_text, std::string provenance) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("corpus JSON parse error at byte ") + std::to_string(e.byte) + ": " +
                          e.what());
    }
    const json& jstories = require_array(doc, "stories", "$");
    std::vector<Story> stories;
    stories.reserve(jstories.size());
    std::size_t dropped = 0;
    std::set<std::string> raw_ids;
    for (std::size_t si = 0; si < jstories.size(); ++si) {
        const std::string swhere = "$.stories[" + std::to_string(si) + "]";
        const json& js = jstories[si];
        Story story;
        story.story_id = require_string(js, "story_id", swhere);
        const json& jarts = require_array(js, "articles", swhere);
        for (std::size_t ai = 0; ai < jarts.size(); ++ai) {
            const std::string awhere = swhere + ".articles[" + std::to_string(ai) + "]";
            const json& ja = jarts[ai];
            ArticleRecord art;
            art.story_id = story.story_id;
            if (const auto it = ja.find("story_id"); it != ja.end()) {
                if (!it->is_string()) throw ValidationError(awhere + ".story_id: expected a string");
                art.story_id = it->get<std::string>();
            }
            const std::string src = require_string(ja, "source", awhere);
            const auto source = parse_source(src);
            if (!source) throw ValidationError(awhere + ".source: unknown source '" + src + "'");
            art.source = *source;
            const std::string lean = require_string(ja, "leaning", awhere);
            const auto leaning = parse_leaning(lean);
            if (!leaning) throw ValidationError(awhere + ".leaning: unknown leaning '" + lean + "'");
            art.leaning = *leaning;
            const json& jsents = require_array(ja, "sentences", awhere);
            for (std::size_t k = 0; k < jsents.size(); ++k) {
                const std::string where = awhere + ".sentences[" + std::to_string(k) + "]";
                const json& jsent = jsents[k];
                SentenceRecord s;
                s.id = require_string(jsent, "id", where);
                s.index = require_index(jsent, "index", where);
                s.text = require_string(jsent, "text", where);
                if (!raw_ids.insert(s.id).second) {
                    throw ValidationError(where + ": duplicate sentence id '" + s.id + "'");
                }
                if (s.index != k) {
                    throw ValidationError(where + ": sentence indices not contiguous (expected " +
                                          std::to_string(k) + ", found " + std::to_string(s.index) + ")");
                }
                const json& jspans = require_array(jsent, "spans", where);
                for (std::size_t p = 0; p < jspans.size(); ++p) {
                    s.spans.push_back(parse_span(jspans[p], where + ".spans[" + std::to_string(p) + "]"));
                }
                if (text::is_blank(s.text)) {
                    ++dropped;
                    continue;
                }
                s.index = art.sentences.size();
                art.sentences.push_back(std::move(s));
            }
            story.articles.push_back(std::move(art));
        }
        stories.push_back(std::move(story));
    }
    Corpus c = Corpus::from_stories(std::move(stories), std::move(provenance));
    c.dropped_empty_ = dropped;
    if (dropped > 0) {
        spdlog::info("corpus: removed {} empty sentence(s); they are treated as neutral", dropped);
    }
    return c;
}

Corpus parse_corpus(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    return parse_corpus_text(bytes, sha256_hex(bytes));
}

json corpus_to_json(const Corpus& c) {
    json jstories = json::array();
    for (const Story& st : c.stories()) {
        json jarts = json::array();
        for (const ArticleRecord& a : st.articles) {
            json jsents = json::array();
            for (const SentenceRecord& s : a.sentences) {
                json jspans = json::array();
                for (const Span& sp : s.spans) {
                    jspans.push_back({{"start", sp.start},
                                      {"end", sp.end},
                                      {"kind", to_string(sp.kind)},
                                      {"in_quote", sp.in_quote}});
                }
                jsents.push_back({{"id", s.id}, {"index", s.index}, {"text", s.text}, {"spans", jspans}});
            }
            jarts.push_back({{"source", to_string(a.source)},
                             {"leaning", to_string(a.leaning)},
                             {"story_id", a.story_id},
                             {"sentences", jsents}});
        }
        jstories.push_back({{"story_id", st.story_id}, {"articles", jarts}});
    }
    return json{{"stories", jstories}};
}

std::string serialize_corpus(const Corpus& c) { return corpus_to_json(c).dump(1) + "\n"; }

void write_corpus(const Corpus& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInputError("cannot write " + path.string());
    out << serialize_corpus(c);
}

Label sentence_label(const SentenceRecord& s) {
    const bool biased = std::any_of(s.spans.begin(), s.spans.end(),
                                    [](const Span& sp) { return sp.kind == SpanKind::kInformational; });
    return biased ? Label::kBiased : Label::kNeutral;
}

bool in_quote(const SentenceRecord& s) {
    return std::any_of(s.spans.begin(), s.spans.end(), [](const Span& sp) {
        return sp.kind == SpanKind::kInformational && sp.in_quote;
    });
}

bool has_lexical_bias(const SentenceRecord& s) {
    return std::any_of(s.spans.begin(), s.spans.end(),
                       [](const Span& sp) { return sp.kind == SpanKind::kLexical; });
}

CorpusStats corpus_stats(const Corpus& c) {
    CorpusStats st;
    for (const Story& story : c.stories()) {
        for (const ArticleRecord& a : story.articles) {
            const auto pub = static_cast<std::size_t>(a.source);
            const auto lean = static_cast<std::size_t>(a.leaning);
            ++st.articles[pub][lean];
            for (const SentenceRecord& s : a.sentences) {
                const bool biased = sentence_label(s) == Label::kBiased;
                ++st.sentences;
                ++st.publisher_sentences[pub];
                ++st.leaning_sentences[lean];
                if (has_lexical_bias(s)) {
                    ++st.lexical_sentences;
                    if (biased) ++st.lexical_biased;
                }
                if (!biased) continue;
                ++st.biased;
                ++st.publisher_biased[pub];
                ++st.leaning_biased[lean];
                if (in_quote(s)) {
                    ++st.biased_in_quote;
                } else {
                    ++st.biased_out_of_quote;
                }
            }
        }
    }
    return st;
}

json stats_to_json(const CorpusStats& s) {
    json pubs = json::object();
    for (Source src : kSources) {
        const auto i = static_cast<std::size_t>(src);
        json leans = json::object();
        for (Leaning l : kLeanings) leans[std::string(to_string(l))] = s.articles[i][static_cast<std::size_t>(l)];
        pubs[std::string(to_string(src))] = {{"sentences", s.publisher_sentences[i]},
                                             {"biased", s.publisher_biased[i]},
                                             {"articles_by_leaning", leans}};
    }
    json leanings = json::object();
    for (Leaning l : kLeanings) {
        const auto i = static_cast<std::size_t>(l);
        leanings[std::string(to_string(l))] = {{"sentences", s.leaning_sentences[i]},
                                               {"biased", s.leaning_biased[i]}};
    }
    return {{"sentences", s.sentences},
            {"biased", s.biased},
            {"bias_rate", s.bias_rate()},
            {"publishers", pubs},
            {"leanings", leanings},
            {"biased_in_quote", s.biased_in_quote},
            {"biased_out_of_quote", s.biased_out_of_quote},
            {"lexical_sentences", s.lexical_sentences},
            {"lexical_biased", s.lexical_biased}};
}

}  // namespace ibias
