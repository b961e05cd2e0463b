#include "ibias/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ibias/error.hpp"

namespace ibias {

using nlohmann::json;

MetricReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    MetricReport m{tp, fp, fn, tn};
    m.precision = tp + fp > 0 ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

MetricReport prf1(std::span<const Label> gold, std::span<const Label> pred) {
    if (gold.size() != pred.size()) throw ValidationError("prf1: gold and prediction lengths differ");
    if (gold.empty()) throw ValidationError("prf1: empty prediction set");
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const bool g = gold[i] == Label::kBiased;
        const bool p = pred[i] == Label::kBiased;
        tp += g && p;
        fp += !g && p;
        fn += g && !p;
        tn += !g && !p;
    }
    return metrics_from_counts(tp, fp, fn, tn);
}

MetricReport prf1(const PredictionSet& preds) {
    std::vector<Label> gold;
    std::vector<Label> pred;
    gold.reserve(preds.items.size());
    pred.reserve(preds.items.size());
    for (const Prediction& p : preds.items) {
        gold.push_back(p.gold);
        pred.push_back(p.pred);
    }
    return prf1(gold, pred);
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / (n - 1.0));
    }
    return out;
}

SeedAggregate summarize_seeds(const std::vector<MetricReport>& reports) {
    if (reports.empty()) throw ValidationError("aggregate: no reports");
    SeedAggregate agg;
    agg.per_seed = reports;
    std::vector<double> p, r, f;
    for (const MetricReport& m : reports) {
        p.push_back(m.precision);
        r.push_back(m.recall);
        f.push_back(m.f1);
    }
    agg.precision = mean_std(p);
    agg.recall = mean_std(r);
    agg.f1 = mean_std(f);
    return agg;
}

SeedAggregate aggregate_seeds(const std::vector<MetricReport>& reports) {
    if (reports.size() < 2) {
        throw ValidationError("aggregate_seeds: need at least 2 reports, got " + std::to_string(reports.size()));
    }
    return summarize_seeds(reports);
}

double student_t_two_sided_p(double t, double df) {
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    // P(|T| > |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2)
    const double x = df / (df + t * t);
    return boost::math::ibeta(df / 2.0, 0.5, x);
}

TTestResult independent_t_test(std::span<const double> a, std::span<const double> b, double alpha, TTestKind kind) {
    if (a.size() < 2 || b.size() < 2) {
        throw ValidationError("independent_t_test: each sample needs at least 2 values");
    }
    const MeanStd ma = mean_std(a);
    const MeanStd mb = mean_std(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = *ma.std * *ma.std;
    const double vb = *mb.std * *mb.std;
    const double diff = ma.mean - mb.mean;

    TTestResult r;
    double se2 = 0.0;
    if (kind == TTestKind::kPooled) {
        r.df = na + nb - 2.0;
        const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / r.df;
        se2 = pooled * (1.0 / na + 1.0 / nb);
    } else {
        const double sa = va / na;
        const double sb = vb / nb;
        se2 = sa + sb;
        const double denom = sa * sa / (na - 1.0) + sb * sb / (nb - 1.0);
        r.df = denom > 0.0 ? se2 * se2 / denom : na + nb - 2.0;
    }
    if (se2 <= 0.0) {
        if (diff == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            spdlog::warn("t-test: both samples have zero variance but different means; reporting p = 0");
            r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
            r.p = 0.0;
            r.degenerate = true;
        }
    } else {
        r.t = diff / std::sqrt(se2);
        r.p = student_t_two_sided_p(r.t, r.df);
    }
    r.significant = r.p < alpha;
    return r;
}

json to_json(const MetricReport& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"tp", m.tp},
            {"fp", m.fp},               {"fn", m.fn},         {"tn", m.tn}};
}

namespace {

json to_json(const MeanStd& m) {
    json j = {{"mean", m.mean}};
    j["std"] = m.std ? json(*m.std) : json(nullptr);
    return j;
}

}  // namespace

json to_json(const SeedAggregate& a) {
    json seeds = json::array();
    for (const MetricReport& m : a.per_seed) seeds.push_back(to_json(m));
    return {{"seeds", seeds},
            {"precision", to_json(a.precision)},
            {"recall", to_json(a.recall)},
            {"f1", to_json(a.f1)}};
}

json to_json(const TTestResult& t) {
    json j = {{"df", t.df}, {"p", t.p}, {"significant", t.significant}, {"degenerate", t.degenerate}};
    j["t"] = std::isfinite(t.t) ? json(t.t) : json(t.t > 0 ? "inf" : "-inf");
    return j;
}

}  // namespace ibias
