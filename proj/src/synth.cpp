#include "ibias/synth.hpp"

#include <cctype>
#include <vector>

#include <fmt/format.h>

#include "ibias/error.hpp"
#include "ibias/rng.hpp"

namespace ibias {

namespace {

const char* const kWords[] = {"the",      "senator",  "said",     "on",      "tuesday",  "that",    "bill",
                              "would",    "cut",      "taxes",    "for",     "families", "critics", "argue",
                              "plan",     "reckless", "officials", "report", "vote",     "house",   "according",
                              "sources",  "claimed",  "president", "policy", "budget",   "spokesman", "again"};

std::string source_tag(Source s) {
    std::string t(to_string(s));
    for (char& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return t;
}

std::string random_text(Rng& rng, std::size_t words, bool quote) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) out += ' ';
        out += kWords[rng.below(std::size(kWords))];
    }
    out += '.';
    if (quote) out = "\"" + out + "\"";
    return out;
}

SentenceRecord make_sentence(Rng& rng, const std::string& id, std::size_t index, bool biased) {
    SentenceRecord s;
    s.id = id;
    s.index = index;
    const bool quote = rng.below(2) == 0;
    s.text = random_text(rng, 3 + rng.below(30), quote);
    const std::size_t len = s.text.size();  // ASCII text: bytes == scalar values
    if (biased) s.spans.push_back({0, 1 + rng.below(len), SpanKind::kInformational, quote});
    if (rng.below(16) == 0) s.spans.push_back({0, 1 + rng.below(len), SpanKind::kLexical, false});
    return s;
}

}  // namespace

Corpus make_random_corpus(const RandomCorpusOptions& opts) {
    if (opts.min_sentences == 0 || opts.max_sentences < opts.min_sentences) {
        throw ValidationError("random corpus: need 1 <= min_sentences <= max_sentences");
    }
    Rng rng(opts.seed);
    std::vector<Story> stories;
    for (std::size_t i = 0; i < opts.stories; ++i) {
        Story st;
        st.story_id = std::to_string(i + 1);
        for (Source src : kSources) {
            ArticleRecord a;
            a.source = src;
            a.leaning = kLeanings[rng.below(3)];
            a.story_id = st.story_id;
            const std::size_t n = opts.min_sentences + rng.below(opts.max_sentences - opts.min_sentences + 1);
            for (std::size_t k = 0; k < n; ++k) {
                const std::string id = fmt::format("{}{}{:02}", st.story_id, source_tag(src), k);
                a.sentences.push_back(make_sentence(rng, id, k, rng.uniform() < opts.bias_rate));
            }
            st.articles.push_back(std::move(a));
        }
        stories.push_back(std::move(st));
    }
    return Corpus::from_stories(std::move(stories), fmt::format("random:{}:{}", opts.seed, opts.stories));
}

EmbeddingTable make_random_embeddings(const Corpus& c, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    EmbeddingTable t(dim);
    std::vector<float> v(dim);
    for (const std::string& id : c.sentence_ids()) {
        for (float& x : v) x = static_cast<float>(rng.normal());
        t.add(id, v);
    }
    return t;
}

ContextSynth make_context_synthetic(const ContextSynthOptions& opts) {
    if (opts.dim < 2) throw ValidationError("context synthetic: dim must be >= 2");
    if (opts.min_sentences == 0 || opts.max_sentences < opts.min_sentences) {
        throw ValidationError("context synthetic: need 1 <= min_sentences <= max_sentences");
    }
    Rng rng(opts.seed);
    ContextSynth out;
    out.embeddings = EmbeddingTable(opts.dim);
    out.embeddings.encoder_tag = fmt::format("context-synthetic seed={} dim={}", opts.seed, opts.dim);
    std::vector<Story> stories;
    std::vector<float> v(opts.dim);
    for (std::size_t i = 0; i < opts.stories; ++i) {
        Story st;
        st.story_id = std::to_string(i + 1);
        const double theta = rng.uniform() < opts.low_threshold_share ? -1.0 : 1.0;
        for (Source src : kSources) {
            ArticleRecord a;
            a.source = src;
            a.leaning = kLeanings[rng.below(3)];
            a.story_id = st.story_id;
            const std::size_t n = opts.min_sentences + rng.below(opts.max_sentences - opts.min_sentences + 1);
            for (std::size_t k = 0; k < n; ++k) {
                for (float& x : v) x = static_cast<float>(rng.normal());
                const std::uint64_t region = rng.below(4);
                double signal = 0.0;
                if (region == 0) {
                    signal = rng.uniform(-2.0, -1.2);
                } else if (region == 1) {
                    signal = rng.uniform(1.2, 2.0);
                } else {
                    signal = rng.uniform(-0.8, 0.8);
                }
                v[0] = static_cast<float>(signal);
                if (src == Source::kHpo && k == 0) v[1] = static_cast<float>(theta + 0.1 * rng.normal());
                const std::string id = fmt::format("{}{}{:02}", st.story_id, source_tag(src), k);
                const bool biased = signal > theta;
                a.sentences.push_back(make_sentence(rng, id, k, biased));
                out.embeddings.add(id, v);
                if (region >= 2) out.context_dependent.insert(id);
            }
            st.articles.push_back(std::move(a));
        }
        stories.push_back(std::move(st));
    }
    out.corpus = Corpus::from_stories(std::move(stories), fmt::format("context-synthetic:{}:{}", opts.seed, opts.stories));
    return out;
}

}  // namespace ibias
