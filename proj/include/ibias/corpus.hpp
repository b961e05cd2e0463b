#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace ibias {

enum class Source { kFox = 0, kNyt = 1, kHpo = 2 };
enum class Leaning { kRight = 0, kCenter = 1, kLeft = 2 };
enum class SpanKind { kInformational, kLexical };
enum class Label { kNeutral = 0, kBiased = 1 };

inline constexpr std::array<Source, 3> kSources = {Source::kFox, Source::kNyt, Source::kHpo};
inline constexpr std::array<Leaning, 3> kLeanings = {Leaning::kRight, Leaning::kCenter, Leaning::kLeft};

std::string_view to_string(Source s);
std::string_view to_string(Leaning l);
std::string_view to_string(SpanKind k);
std::string_view to_string(Label l);
std::optional<Source> parse_source(std::string_view s);
std::optional<Leaning> parse_leaning(std::string_view s);

/// Annotated character range. Offsets count Unicode scalar values.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;
    SpanKind kind = SpanKind::kInformational;
    bool in_quote = false;

    friend bool operator==(const Span&, const Span&) = default;
};

struct SentenceRecord {
    std::string id;
    std::size_t index = 0;
    std::string text;
    std::vector<Span> spans;

    friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

struct ArticleRecord {
    Source source = Source::kFox;
    Leaning leaning = Leaning::kCenter;
    std::string story_id;
    std::vector<SentenceRecord> sentences;

    friend bool operator==(const ArticleRecord&, const ArticleRecord&) = default;
};

/// A triple of articles on one event. Articles are kept in FOX, NYT, HPO order.
struct Story {
    std::string story_id;
    std::vector<ArticleRecord> articles;

    const ArticleRecord& article(Source s) const { return articles[static_cast<std::size_t>(s)]; }

    friend bool operator==(const Story&, const Story&) = default;
};

/// Position of a sentence inside a corpus.
struct SentenceLocation {
    std::size_t story = 0;
    std::size_t article = 0;
    std::size_t sentence = 0;
};

/// Immutable, validated collection of stories.
class Corpus {
public:
    Corpus() = default;

    /// Validates and indexes the stories. Articles are reordered to FOX, NYT, HPO.
    /// Throws ValidationError on any invariant violation.
    static Corpus from_stories(std::vector<Story> stories, std::string provenance);

    const std::vector<Story>& stories() const { return stories_; }
    const std::string& provenance() const { return provenance_; }
    std::size_t sentence_count() const { return index_.size(); }
    std::size_t dropped_empty() const { return dropped_empty_; }

    const SentenceRecord* find(std::string_view id) const;
    std::optional<SentenceLocation> locate(std::string_view id) const;
    const SentenceRecord& at(const SentenceLocation& loc) const;
    const ArticleRecord& article_of(const SentenceLocation& loc) const;
    const Story* find_story(std::string_view story_id) const;

    /// All sentence ids in corpus order (story, source, index).
    std::vector<std::string> sentence_ids() const;
    std::vector<std::string> story_ids() const;

    friend bool operator==(const Corpus& a, const Corpus& b) { return a.stories_ == b.stories_; }

private:
    friend Corpus parse_corpus_text(std::string_view json_text, std::string provenance);

    std::vector<Story> stories_;
    std::string provenance_;
    std::size_t dropped_empty_ = 0;
    std::unordered_map<std::string, SentenceLocation> index_;
    std::unordered_map<std::string, std::size_t> story_index_;
};

/// Parses a corpus document in the canonical JSON schema. Blank sentences are
/// removed (and the remaining sentences renumbered) after index contiguity has
/// been checked on the file as written.
Corpus parse_corpus_text(std::string_view json_text, std::string provenance);

/// Reads and parses a corpus file; provenance is the SHA-256 of the file.
Corpus parse_corpus(const std::filesystem::path& path);

nlohmann::json corpus_to_json(const Corpus& c);
std::string serialize_corpus(const Corpus& c);
void write_corpus(const Corpus& c, const std::filesystem::path& path);

/// Biased iff the sentence carries at least one informational span.
Label sentence_label(const SentenceRecord& s);

/// Any informational span of the sentence lies inside a quote.
bool in_quote(const SentenceRecord& s);

/// The sentence carries at least one lexical-bias span.
bool has_lexical_bias(const SentenceRecord& s);

struct CorpusStats {
    std::size_t sentences = 0;
    std::size_t biased = 0;
    std::array<std::size_t, 3> publisher_sentences{};
    std::array<std::size_t, 3> publisher_biased{};
    std::array<std::size_t, 3> leaning_sentences{};
    std::array<std::size_t, 3> leaning_biased{};
    /// [publisher][leaning] article counts.
    std::array<std::array<std::size_t, 3>, 3> articles{};
    std::size_t biased_in_quote = 0;
    std::size_t biased_out_of_quote = 0;
    std::size_t lexical_sentences = 0;
    std::size_t lexical_biased = 0;

    double bias_rate() const { return sentences ? 100.0 * biased / sentences : 0.0; }
};

CorpusStats corpus_stats(const Corpus& c);
nlohmann::json stats_to_json(const CorpusStats& s);

}  // namespace ibias
