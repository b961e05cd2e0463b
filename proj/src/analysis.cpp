#include "ibias/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ibias/error.hpp"
#include "ibias/text.hpp"

namespace ibias {

using nlohmann::json;

std::size_t token_count(std::string_view s) { return text::word_tokens(s).size(); }

LengthQuartiles length_quartiles(std::vector<std::size_t> counts) {
    if (counts.empty()) throw ValidationError("length_quartiles: empty corpus");
    std::sort(counts.begin(), counts.end());
    LengthQuartiles q;
    const std::size_t n = counts.size();
    for (std::size_t k = 1; k <= 3; ++k) {
        const std::size_t rank = (k * n + 3) / 4;  // ceil(k n / 4), nearest-rank
        q.bounds[k - 1] = counts[rank - 1];
    }
    q.max_length = counts.back();
    return q;
}

LengthQuartiles length_quartiles(const Corpus& c) {
    std::vector<std::size_t> counts;
    counts.reserve(c.sentence_count());
    for (const Story& st : c.stories())
        for (const ArticleRecord& a : st.articles)
            for (const SentenceRecord& s : a.sentences) counts.push_back(token_count(s.text));
    return length_quartiles(std::move(counts));
}

std::size_t assign_length_bin(const LengthQuartiles& q, std::size_t tokens) {
    for (std::size_t k = 0; k < 3; ++k) {
        if (tokens <= q.bounds[k]) return k + 1;
    }
    return 4;
}

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::kLength: return "length";
        case Scheme::kQuote: return "quote";
        case Scheme::kPublisher: return "publisher";
        case Scheme::kLeaning: return "leaning";
        case Scheme::kLexical: return "lexical";
        case Scheme::kSubjectivity: return "subjectivity";
    }
    return "?";
}

Scheme parse_scheme(std::string_view s) {
    for (Scheme sc : kAllSchemes) {
        if (s == to_string(sc)) return sc;
    }
    throw ValidationError("unknown stratification scheme '" + std::string(s) + "'");
}

namespace {

std::vector<std::string> stratum_names(Scheme scheme, const LengthQuartiles& q) {
    switch (scheme) {
        case Scheme::kLength:
            return {fmt::format("0-{}", q.bounds[0]), fmt::format("{}-{}", q.bounds[0] + 1, q.bounds[1]),
                    fmt::format("{}-{}", q.bounds[1] + 1, q.bounds[2]),
                    fmt::format("{}-{}", q.bounds[2] + 1, q.max_length)};
        case Scheme::kPublisher: return {"FOX", "NYT", "HPO"};
        case Scheme::kLeaning: return {"right", "center", "left"};
        case Scheme::kQuote: return {"no", "yes"};
        case Scheme::kLexical:
        case Scheme::kSubjectivity: return {"yes", "no"};
    }
    return {};
}

/// Stratum index of a sentence, or -1 when the scheme excludes it.
long stratum_of(Scheme scheme, const SentenceRecord& s, const ArticleRecord& a, const LengthQuartiles& q,
                const SubjectivityLexicon* lex) {
    switch (scheme) {
        case Scheme::kLength: return static_cast<long>(assign_length_bin(q, token_count(s.text))) - 1;
        case Scheme::kPublisher: return static_cast<long>(a.source);
        case Scheme::kLeaning: return static_cast<long>(a.leaning);
        case Scheme::kQuote:
            if (sentence_label(s) != Label::kBiased) return -1;
            return in_quote(s) ? 1 : 0;
        case Scheme::kLexical: return has_lexical_bias(s) ? 0 : 1;
        case Scheme::kSubjectivity: return has_strong_subjective_clue(s, *lex) ? 0 : 1;
    }
    return -1;
}

struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    void add(Label gold, Label pred) {
        const bool g = gold == Label::kBiased;
        const bool p = pred == Label::kBiased;
        tp += g && p;
        fp += !g && p;
        fn += g && !p;
        tn += !g && !p;
    }
    std::size_t size() const { return tp + fp + fn + tn; }
};

}  // namespace

StratifiedReport stratify(const PredictionSet& preds, const Corpus& c, Scheme scheme, const StratifyContext& ctx) {
    if (scheme == Scheme::kSubjectivity && ctx.lexicon == nullptr) {
        throw ValidationError("stratify: the subjectivity scheme needs a lexicon");
    }
    const LengthQuartiles q = ctx.quartiles ? *ctx.quartiles
                              : scheme == Scheme::kLength ? length_quartiles(c)
                                                          : LengthQuartiles{};
    StratifiedReport report;
    report.scheme = scheme;
    report.recall_only = scheme == Scheme::kQuote;
    const std::vector<std::string> names = stratum_names(scheme, q);
    std::vector<Counts> counts(names.size());
    Counts all;
    for (const Prediction& p : preds.items) {
        const auto loc = c.locate(p.id);
        if (!loc) throw ValidationError("stratify: prediction for unknown sentence '" + p.id + "'");
        const long k = stratum_of(scheme, c.at(*loc), c.article_of(*loc), q, ctx.lexicon);
        if (k < 0) continue;
        counts[static_cast<std::size_t>(k)].add(p.gold, p.pred);
        all.add(p.gold, p.pred);
    }
    auto make = [](std::string name, const Counts& k) {
        Stratum s;
        s.name = std::move(name);
        s.size = k.size();
        s.biased = k.tp + k.fn;
        s.metrics = metrics_from_counts(k.tp, k.fp, k.fn, k.tn);
        return s;
    };
    for (std::size_t i = 0; i < names.size(); ++i) report.strata.push_back(make(names[i], counts[i]));
    report.all = make(scheme == Scheme::kQuote ? "all biased" : "all", all);
    return report;
}

namespace {

double metric_of(const StratifiedReport& r, const Stratum& s) {
    return r.recall_only ? s.metrics.recall : s.metrics.f1;
}

StratumComparison compare_row(const std::vector<StratifiedReport>& base, const std::vector<StratifiedReport>& sys,
                              long index, double alpha) {
    auto pick = [index](const StratifiedReport& r) -> const Stratum& {
        return index < 0 ? r.all : r.strata[static_cast<std::size_t>(index)];
    };
    StratumComparison row;
    const Stratum& first = pick(sys.front());
    row.name = first.name;
    row.size = first.size;
    row.bias_rate = first.bias_rate();
    std::vector<double> sys_vals;
    for (const StratifiedReport& r : sys) sys_vals.push_back(metric_of(r, pick(r)));
    row.system = mean_std(sys_vals);
    if (base.empty()) return row;
    std::vector<double> base_vals;
    for (const StratifiedReport& r : base) base_vals.push_back(metric_of(r, pick(r)));
    row.baseline = mean_std(base_vals);
    if (sys_vals.size() >= 2 && base_vals.size() >= 2) {
        row.test = independent_t_test(sys_vals, base_vals, alpha);
        if (row.test->significant) row.marker = row.system.mean > row.baseline->mean ? "+" : "-";
    }
    return row;
}

}  // namespace

SchemeComparison compare_strata(const std::vector<PredictionSet>& baseline_seeds,
                                const std::vector<PredictionSet>& system_seeds, const Corpus& c, Scheme scheme,
                                const StratifyContext& ctx, double alpha) {
    if (system_seeds.empty()) throw ValidationError("compare_strata: no system predictions");
    StratifyContext fixed = ctx;
    if (!fixed.quartiles && scheme == Scheme::kLength) fixed.quartiles = length_quartiles(c);
    std::vector<StratifiedReport> base;
    std::vector<StratifiedReport> sys;
    for (const PredictionSet& p : baseline_seeds) base.push_back(stratify(p, c, scheme, fixed));
    for (const PredictionSet& p : system_seeds) sys.push_back(stratify(p, c, scheme, fixed));
    SchemeComparison out;
    out.scheme = scheme;
    out.metric = sys.front().recall_only ? "recall" : "f1";
    for (std::size_t i = 0; i < sys.front().strata.size(); ++i) {
        out.rows.push_back(compare_row(base, sys, static_cast<long>(i), alpha));
    }
    out.all = compare_row(base, sys, -1, alpha);
    return out;
}

json to_json(const StratifiedReport& r) {
    auto stratum = [](const Stratum& s) {
        return json{{"name", s.name}, {"size", s.size}, {"biased", s.biased}, {"bias_rate", s.bias_rate()},
                    {"metrics", to_json(s.metrics)}};
    };
    json strata = json::array();
    for (const Stratum& s : r.strata) strata.push_back(stratum(s));
    return {{"scheme", to_string(r.scheme)},
            {"metric", r.recall_only ? "recall" : "f1"},
            {"strata", strata},
            {"all", stratum(r.all)}};
}

namespace {

json mean_std_json(const MeanStd& m) {
    json j = {{"mean", m.mean}};
    j["std"] = m.std ? json(*m.std) : json(nullptr);
    return j;
}

json row_json(const StratumComparison& r) {
    json j = {{"name", r.name}, {"size", r.size}, {"bias_rate", r.bias_rate}, {"system", mean_std_json(r.system)},
              {"marker", r.marker}};
    j["baseline"] = r.baseline ? mean_std_json(*r.baseline) : json(nullptr);
    j["t_test"] = r.test ? to_json(*r.test) : json(nullptr);
    return j;
}

}  // namespace

json to_json(const SchemeComparison& r) {
    json rows = json::array();
    for (const StratumComparison& row : r.rows) rows.push_back(row_json(row));
    return {{"scheme", to_string(r.scheme)}, {"metric", r.metric}, {"rows", rows}, {"all", row_json(r.all)}};
}

std::string render_table(const SchemeComparison& r, std::string_view baseline_name, std::string_view system_name) {
    std::string out = fmt::format("{} ({})\n", to_string(r.scheme), r.metric);
    out += fmt::format("{:<12} {:>7} {:>8} {:>12} {:>12}\n", "stratum", "N", "%bias", baseline_name, system_name);
    auto line = [&](const StratumComparison& row) {
        const std::string base = row.baseline ? fmt::format("{:.2f}", row.baseline->mean) : "-";
        const char* mark = row.marker == "+" ? "†" : row.marker == "-" ? "‡" : "";
        out += fmt::format("{:<12} {:>7} {:>7.2f}% {:>12} {:>11.2f}{}\n", row.name, row.size, row.bias_rate, base,
                           row.system.mean, mark);
    };
    for (const StratumComparison& row : r.rows) line(row);
    line(r.all);
    return out;
}

std::string render_publisher_leaning(const CorpusStats& s) {
    std::string out = fmt::format("{:<6} {:>6} {:>7} {:>6} {:>6}\n", "pub", "right", "center", "left", "all");
    std::array<std::size_t, 3> col{};
    for (Source src : kSources) {
        const auto& row = s.articles[static_cast<std::size_t>(src)];
        out += fmt::format("{:<6} {:>6} {:>7} {:>6} {:>6}\n", to_string(src), row[0], row[1], row[2],
                           row[0] + row[1] + row[2]);
        for (std::size_t k = 0; k < 3; ++k) col[k] += row[k];
    }
    out += fmt::format("{:<6} {:>6} {:>7} {:>6} {:>6}\n", "all", col[0], col[1], col[2], col[0] + col[1] + col[2]);
    return out;
}

}  // namespace ibias
