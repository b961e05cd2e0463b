#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ibias/prediction.hpp"

namespace ibias {

/// Positive-class (biased) scores. Percentages in [0, 100].
struct MetricReport {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    std::size_t total() const { return tp + fp + fn + tn; }
};

/// Fills precision, recall and F1 from the counts. A zero denominator gives 0.
MetricReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

/// Throws ValidationError on an empty set.
MetricReport prf1(const PredictionSet& preds);
MetricReport prf1(std::span<const Label> gold, std::span<const Label> pred);

struct MeanStd {
    double mean = 0.0;
    /// Sample (n - 1) standard deviation; absent for a single value.
    std::optional<double> std;
};

struct SeedAggregate {
    std::vector<MetricReport> per_seed;
    MeanStd precision;
    MeanStd recall;
    MeanStd f1;
};

MeanStd mean_std(std::span<const double> values);

/// Requires at least two reports.
SeedAggregate aggregate_seeds(const std::vector<MetricReport>& reports);

/// Like aggregate_seeds but tolerates a single report (std left empty).
SeedAggregate summarize_seeds(const std::vector<MetricReport>& reports);

enum class TTestKind { kPooled, kWelch };

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    bool significant = false;
    /// Both samples have zero variance but different means; t is +-inf and p is 0.
    bool degenerate = false;
};

/// Two-sided independent two-sample t-test. Student's pooled-variance form by
/// default; Welch's unequal-variance form on request. Requires |a|, |b| >= 2.
TTestResult independent_t_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05,
                               TTestKind kind = TTestKind::kPooled);

/// Two-sided p-value of a Student t statistic with `df` degrees of freedom,
/// through the regularized incomplete beta function.
double student_t_two_sided_p(double t, double df);

nlohmann::json to_json(const MetricReport& m);
nlohmann::json to_json(const SeedAggregate& a);
nlohmann::json to_json(const TTestResult& t);

}  // namespace ibias
