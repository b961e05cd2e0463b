#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ibias/corpus.hpp"
#include "ibias/lexicon.hpp"
#include "ibias/metrics.hpp"
#include "ibias/prediction.hpp"

namespace ibias {

/// Word tokens: whitespace split, edge punctuation stripped, empties dropped.
std::size_t token_count(std::string_view text);

/// Three integer cut points; bin k holds counts in (bound[k-2], bound[k-1]].
struct LengthQuartiles {
    std::array<std::size_t, 3> bounds{};
    std::size_t max_length = 0;

    friend bool operator==(const LengthQuartiles&, const LengthQuartiles&) = default;
};

/// Nearest-rank quartiles of per-sentence token counts. Throws on an empty corpus.
LengthQuartiles length_quartiles(const Corpus& c);
LengthQuartiles length_quartiles(std::vector<std::size_t> token_counts);

/// 1..4; a count equal to a cut point goes to the lower bin.
std::size_t assign_length_bin(const LengthQuartiles& q, std::size_t tokens);

enum class Scheme { kLength, kQuote, kPublisher, kLeaning, kLexical, kSubjectivity };

std::string_view to_string(Scheme s);
/// Throws ValidationError for an unknown name.
Scheme parse_scheme(std::string_view s);
inline constexpr std::array<Scheme, 6> kAllSchemes = {Scheme::kLength,  Scheme::kQuote,   Scheme::kPublisher,
                                                      Scheme::kLeaning, Scheme::kLexical, Scheme::kSubjectivity};

struct Stratum {
    std::string name;
    std::size_t size = 0;
    std::size_t biased = 0;
    MetricReport metrics;

    double bias_rate() const { return size ? 100.0 * static_cast<double>(biased) / static_cast<double>(size) : 0.0; }
};

struct StratifiedReport {
    Scheme scheme = Scheme::kPublisher;
    /// Quote scheme: strata hold biased instances only and recall is the metric.
    bool recall_only = false;
    std::vector<Stratum> strata;
    Stratum all;
};

struct StratifyContext {
    const SubjectivityLexicon* lexicon = nullptr;
    /// Defaults to quartiles of the whole corpus.
    std::optional<LengthQuartiles> quartiles;
};

/// Splits predictions into the strata of one partition scheme and scores each.
/// Throws ValidationError when a prediction id is not in the corpus, or the
/// subjectivity scheme is requested without a lexicon.
StratifiedReport stratify(const PredictionSet& preds, const Corpus& c, Scheme scheme, const StratifyContext& ctx = {});

/// Per-stratum comparison of a system against a baseline over seeds.
struct StratumComparison {
    std::string name;
    std::size_t size = 0;
    double bias_rate = 0.0;
    std::optional<MeanStd> baseline;
    MeanStd system;
    std::optional<TTestResult> test;
    /// "+" significantly better, "-" significantly worse, "" otherwise.
    std::string marker;
};

struct SchemeComparison {
    Scheme scheme = Scheme::kPublisher;
    std::string metric;
    std::vector<StratumComparison> rows;
    StratumComparison all;
};

/// `baseline_seeds` may be empty, in which case no tests are run.
SchemeComparison compare_strata(const std::vector<PredictionSet>& baseline_seeds,
                                const std::vector<PredictionSet>& system_seeds, const Corpus& c, Scheme scheme,
                                const StratifyContext& ctx, double alpha = 0.05);

nlohmann::json to_json(const StratifiedReport& r);
nlohmann::json to_json(const SchemeComparison& r);

/// Plain-text table: stratum, N, %bias, baseline, system (with a dagger on
/// significant improvements and a double dagger on significant degradations).
std::string render_table(const SchemeComparison& r, std::string_view baseline_name, std::string_view system_name);

/// Publisher x leaning article counts.
std::string render_publisher_leaning(const CorpusStats& s);

}  // namespace ibias
