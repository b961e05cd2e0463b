// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ibias/analysis.hpp"
#include "ibias/corpus.hpp"
#include "ibias/dataset.hpp"
#include "ibias/embeddings.hpp"
#include "ibias/experiment.hpp"
#include "ibias/lexicon.hpp"
#include "ibias/metrics.hpp"
#include "ibias/rng.hpp"
#include "ibias/splitter.hpp"
#include "ibias/synth.hpp"
#include "ibias/train.hpp"
#include "ibias/windowing.hpp"

using namespace ibias;
namespace fs = std::filesystem;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Result {
    Outcome outcome;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Result pass_if(bool ok, std::string detail) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)}; }

const char* env(const char* name) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? v : nullptr;
}

// --- gradient oracle ---------------------------------------------------------

Result gradient_oracle() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::string where;
    for (Variant v : {Variant::kArtCim, Variant::kEvCim}) {
        ModelConfig cfg;
        cfg.variant = v;
        cfg.input_dim = 8;
        cfg.hidden = 6;
        cfg.layers = 2;
        const GradCheckReport r = grad_check(cfg, 1e-5);
        if (r.max_relative_error >= worst) {
            worst = r.max_relative_error;
            where = fmt::format("{} at {}", to_string(v), r.worst_name);
        }
    }
    const double secs = seconds_since(t0);
    return pass_if(worst < 1e-4 && secs < 60.0,
                   fmt::format("num_docs 1 and 3: max relative error {:.3e} ({}), {:.1f}s", worst, where, secs));
}

// --- split invariants --------------------------------------------------------

bool partition_ok(const Corpus& c, const FoldPlan& plan) {
    const auto ids = c.story_ids();
    const std::set<std::string> all(ids.begin(), ids.end());
    std::multiset<std::string> tested;
    for (const Fold& f : plan.folds) {
        std::multiset<std::string> seen;
        seen.insert(f.test_story_ids.begin(), f.test_story_ids.end());
        seen.insert(f.dev_story_ids.begin(), f.dev_story_ids.end());
        seen.insert(f.train_story_ids.begin(), f.train_story_ids.end());
        if (seen.size() != all.size() || std::set<std::string>(seen.begin(), seen.end()) != all) return false;
        if (f.test_story_ids.empty() || f.dev_story_ids.empty() || f.train_story_ids.empty()) return false;
        tested.insert(f.test_story_ids.begin(), f.test_story_ids.end());
    }
    return tested.size() == all.size() && std::set<std::string>(tested.begin(), tested.end()) == all;
}

Result split_invariants() {
    Rng meta(2024);
    std::size_t failures = 0;
    std::string first;
    for (int trial = 0; trial < 1000; ++trial) {
        RandomCorpusOptions o;
        o.stories = 5 + meta.below(46);
        o.max_sentences = 6;
        o.seed = meta.next();
        const std::size_t k = 3 + meta.below(std::min<std::size_t>(o.stories, 10) - 2);
        const std::uint64_t seed = meta.next();
        const Corpus c = make_random_corpus(o);
        const FoldPlan plan = make_story_folds(c, k, seed);
        const bool leak_free = verify_no_story_leakage(plan).ok;
        const bool partition = partition_ok(c, plan);
        const bool same = serialize_corpus(make_random_corpus(o)) == serialize_corpus(c) &&
                          serialize_fold_plan(make_story_folds(c, k, seed), &c) == serialize_fold_plan(plan, &c);
        if (!(leak_free && partition && same)) {
            if (failures++ == 0) {
                first = fmt::format("trial {} (stories {}, k {}): leak-free {}, partition {}, deterministic {}", trial,
                                    o.stories, k, leak_free, partition, same);
            }
        }
    }
    return pass_if(failures == 0, failures == 0 ? "1000 random corpora of 5-50 stories"
                                                : fmt::format("{} failing corpora; first: {}", failures, first));
}

// --- windowing ---------------------------------------------------------------

Result windowing_invariants() {
    Rng rng(7);
    std::size_t failures = 0;
    for (std::size_t max_core : {5u, 10u}) {
        for (std::size_t n = 1; n <= 60; ++n) {
            const auto seqs = segment_article(n, max_core);
            std::vector<int> core_hits(n, 0);
            std::vector<int> labels(n);
            for (int& l : labels) l = static_cast<int>(rng.below(1000));
            std::vector<std::vector<int>> per_position;
            for (const WindowSequence& s : seqs) {
                std::vector<int> row;
                for (const WindowPosition& p : s.positions) {
                    if (!p.is_bookend) ++core_hits[p.sentence];
                    row.push_back(p.is_bookend ? -1 : labels[p.sentence]);
                }
                per_position.push_back(std::move(row));
            }
            const bool partition = std::all_of(core_hits.begin(), core_hits.end(), [](int h) { return h == 1; });
            const bool identity = reassemble_predictions(seqs, per_position) == labels;
            if (!partition || !identity) ++failures;
        }
    }
    const auto ex = segment_article(12, 5);
    auto render = [](const WindowSequence& s) {
        std::string out;
        for (const WindowPosition& p : s.positions) {
            out += p.is_bookend ? fmt::format("({})", p.sentence) : fmt::format("{}", p.sentence);
            out += ',';
        }
        return out;
    };
    const bool example = ex.size() == 3 && render(ex[0]) == "0,1,2,3,4,(5)," &&
                         render(ex[1]) == "(4),5,6,7,8,9,(10)," && render(ex[2]) == "(9),10,11,";
    return pass_if(failures == 0 && example,
                   fmt::format("n 1..60, L in {{5,10}}: {} failures; n=12,L=5 example {}", failures,
                               example ? "exact" : "WRONG"));
}

// --- metric oracle -----------------------------------------------------------

Result metric_oracle() {
    Rng rng(99);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        const double pos_rate = rng.uniform();
        std::vector<Label> gold(n), pred(n);
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            gold[i] = rng.uniform() < pos_rate ? Label::kBiased : Label::kNeutral;
            pred[i] = rng.uniform() < pos_rate ? Label::kBiased : Label::kNeutral;
            const bool g = gold[i] == Label::kBiased, p = pred[i] == Label::kBiased;
            if (g && p) ++tp;
            else if (!g && p) ++fp;
            else if (g && !p) ++fn;
            else ++tn;
        }
        const double precision = tp + fp ? 100.0 * tp / (tp + fp) : 0.0;
        const double recall = tp + fn ? 100.0 * tp / (tp + fn) : 0.0;
        const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        const MetricReport m = prf1(gold, pred);
        if (m.tp != tp || m.fp != fp || m.fn != fn || m.tn != tn || std::abs(m.precision - precision) > 1e-12 ||
            std::abs(m.recall - recall) > 1e-12 || std::abs(m.f1 - f1) > 1e-12) {
            ++mismatches;
        }
    }
    const std::vector<Label> gold = {Label::kBiased, Label::kNeutral};
    const std::vector<Label> none = {Label::kNeutral, Label::kNeutral};
    const MetricReport z = prf1(gold, none);
    const bool zero_rule = z.precision == 0.0 && z.recall == 0.0 && z.f1 == 0.0;
    return pass_if(mismatches == 0 && zero_rule,
                   fmt::format("10000 random sets: {} mismatches; zero-division rule {}", mismatches,
                               zero_rule ? "honored" : "VIOLATED"));
}

// --- statistics --------------------------------------------------------------

Result statistics() {
    const std::vector<double> a = {1, 2, 3, 4, 5};
    const std::vector<double> b = {2, 3, 4, 5, 6};
    const TTestResult r = independent_t_test(a, b);
    const bool example = std::abs(r.t + 1.0) <= 1e-9 && std::abs(r.p - 0.3466) <= 5e-4;
    const TTestResult same = independent_t_test(a, a);
    const bool identical = same.p == 1.0;
    Rng rng(5);
    std::size_t broken = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> x(2 + rng.below(6)), y(2 + rng.below(6));
        for (double& v : x) v = 40.0 + 2.0 * rng.normal();
        for (double& v : y) v = 41.0 + 2.0 * rng.normal();
        const TTestResult xy = independent_t_test(x, y);
        const TTestResult yx = independent_t_test(y, x);
        if (xy.t != -yx.t || xy.p != yx.p) ++broken;
    }
    return pass_if(example && identical && broken == 0,
                   fmt::format("t={:.9f} p={:.6f}; identical p={}; antisymmetry failures {}/1000", r.t, r.p, same.p,
                               broken));
}

// --- synthetic context experiment --------------------------------------------

struct SynthOutcome {
    double baseline_f1_ctx = 0.0;
    double evcim_f1 = 0.0;
    double evcim_f1_ctx = 0.0;
    double baseline_secs = 0.0;
    double evcim_secs = 0.0;
    std::size_t test_sentences = 0;
    std::size_t test_ctx = 0;
};

PredictionSet subset(const PredictionSet& p, const std::unordered_set<std::string>& ids) {
    PredictionSet out = p;
    out.items.clear();
    for (const Prediction& x : p.items) {
        if (ids.contains(x.id)) out.items.push_back(x);
    }
    return out;
}

SynthOutcome run_synthetic() {
    ContextSynthOptions o;
    o.stories = 200;
    o.dim = 16;
    o.seed = 1;
    const ContextSynth s = make_context_synthetic(o);
    const FoldPlan plan = make_story_folds(s.corpus, 5, 0);
    const Fold& fold = plan.folds[0];
    const auto train_ids = sentences_of_stories(s.corpus, fold.train_story_ids);
    const auto dev_ids = sentences_of_stories(s.corpus, fold.dev_story_ids);
    const auto test_ids = sentences_of_stories(s.corpus, fold.test_story_ids);

    TrainConfig t;
    t.epochs = 50;
    t.learning_rate = 1e-3;
    t.batch_size = 32;
    t.seed = 1;

    SynthOutcome out;
    out.test_sentences = test_ids.size();
    auto fit = [&](Variant v, double& secs) {
        ModelConfig cfg;
        cfg.variant = v;
        cfg.input_dim = o.dim;
        cfg.hidden = 32;
        cfg.layers = 2;
        const DatasetOptions dopts{v};
        const Dataset tr = build_dataset(s.corpus, s.embeddings, train_ids, dopts);
        const Dataset dev = build_dataset(s.corpus, s.embeddings, dev_ids, dopts);
        const Dataset test = build_dataset(s.corpus, s.embeddings, test_ids, dopts);
        const auto t0 = Clock::now();
        const TrainResult r = train(tr, dev, cfg, t);
        secs = seconds_since(t0);
        return predict(r.params, test);
    };
    const PredictionSet base = fit(Variant::kTargetOnly, out.baseline_secs);
    const PredictionSet ev = fit(Variant::kEvCim, out.evcim_secs);
    const PredictionSet base_ctx = subset(base, s.context_dependent);
    out.test_ctx = base_ctx.items.size();
    out.baseline_f1_ctx = prf1(base_ctx).f1;
    out.evcim_f1 = prf1(ev).f1;
    out.evcim_f1_ctx = prf1(subset(ev, s.context_dependent)).f1;
    return out;
}

// --- BASIL (conditional) -----------------------------------------------------

Result basil_statistics() {
    const char* path = env("IBIAS_BASIL_CORPUS");
    if (path == nullptr) return {Outcome::kSkip, "set IBIAS_BASIL_CORPUS to the canonical BASIL corpus JSON"};
    const Corpus c = parse_corpus(path);
    const CorpusStats s = corpus_stats(c);
    std::vector<std::string> wrong;
    auto expect = [&](const std::string& what, std::size_t got, std::size_t want) {
        if (got != want) wrong.push_back(fmt::format("{} {} (want {})", what, got, want));
    };
    expect("sentences", s.sentences, 7977);
    expect("biased", s.biased, 1221);
    expect("FOX", s.publisher_sentences[0], 2633);
    expect("NYT", s.publisher_sentences[1], 3048);
    expect("HPO", s.publisher_sentences[2], 2296);
    expect("right", s.leaning_sentences[0], 2010);
    expect("center", s.leaning_sentences[1], 3660);
    expect("left", s.leaning_sentences[2], 2307);
    expect("biased outside quotes", s.biased_out_of_quote, 634);
    expect("biased inside quotes", s.biased_in_quote, 587);
    expect("with lexical bias", s.lexical_sentences, 448);
    expect("without lexical bias", s.sentences - s.lexical_sentences, 7529);
    const std::size_t matrix[3][3] = {{50, 38, 12}, {15, 54, 31}, {10, 52, 38}};
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t l = 0; l < 3; ++l) {
            expect(fmt::format("{} {} articles", to_string(kSources[p]), to_string(kLeanings[l])), s.articles[p][l],
                   matrix[p][l]);
        }
    }
    std::string subj = "subjectivity not checked (set IBIAS_MPQA_LEXICON)";
    if (const char* lex_path = env("IBIAS_MPQA_LEXICON")) {
        const SubjectivityLexicon lex = load_mpqa_lexicon(lex_path);
        std::size_t flagged = 0;
        for (const Story& st : c.stories())
            for (const ArticleRecord& a : st.articles)
                for (const SentenceRecord& r : a.sentences) flagged += has_strong_subjective_clue(r, lex);
        const bool ok = std::abs(static_cast<double>(flagged) - 2415.0) <= 0.02 * 2415.0;
        subj = fmt::format("subjectivity flags {} (want 2415 +-2%)", flagged);
        if (!ok) wrong.push_back(subj);
    }
    return pass_if(wrong.empty(), wrong.empty() ? fmt::format("all counts exact; {}", subj)
                                                : fmt::format("mismatches: {}", fmt::join(wrong, "; ")));
}

Result basil_replication() {
    const char* corpus = env("IBIAS_BASIL_CORPUS");
    const char* emb = env("IBIAS_BASIL_EMB_DIR");
    if (corpus == nullptr || emb == nullptr) {
        return {Outcome::kSkip, "set IBIAS_BASIL_CORPUS and IBIAS_BASIL_EMB_DIR (per-fold EMB1 files)"};
    }
    const char* root = env("IBIAS_BASIL_RUN_ROOT");
    const fs::path runs = root ? fs::path(root) : fs::current_path() / "basil_runs";
    auto config = [&](Variant v, const std::string& name) {
        RunConfig c;
        c.corpus = corpus;
        c.embeddings = emb;
        if (const char* split = env("IBIAS_BASIL_SPLIT")) c.split = split;
        c.k = 10;
        c.run_dir = runs / name;
        c.model.variant = v;
        c.seeds = {1, 2, 3, 4, 5};
        return c;
    };
    const RunOutcome base = run_experiment(config(Variant::kTargetOnly, "target_only"));
    const RunOutcome ev = run_experiment(config(Variant::kEvCim, "evcim"));
    std::vector<double> b, e;
    for (const MetricReport& m : base.aggregate.per_seed) b.push_back(m.f1);
    for (const MetricReport& m : ev.aggregate.per_seed) e.push_back(m.f1);
    const TTestResult t = independent_t_test(e, b);
    const bool direction = ev.aggregate.f1.mean > base.aggregate.f1.mean && t.p < 0.05;
    const bool absolute =
        std::abs(ev.aggregate.f1.mean - 44.10) <= 3.0 && std::abs(base.aggregate.f1.mean - 42.16) <= 3.0;
    return pass_if(direction && absolute,
                   fmt::format("EvCIM F1 {:.2f} vs baseline {:.2f} (p={:.4g}); reference 44.10 / 42.16 +-3",
                               ev.aggregate.f1.mean, base.aggregate.f1.mean, t.p));
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    std::size_t failed = 0;
    auto report = [&](const std::string& name, const std::function<Result()>& fn) {
        Result r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = {Outcome::kFail, std::string("exception: ") + e.what()};
        }
        const char* tag = r.outcome == Outcome::kPass ? "PASS" : r.outcome == Outcome::kFail ? "FAIL" : "SKIP";
        if (r.outcome == Outcome::kFail) ++failed;
        std::cout << tag << "  " << name << ": " << r.detail << std::endl;
    };

    report("gradient-oracle", gradient_oracle);
    report("split-invariants", split_invariants);
    report("windowing-invariants", windowing_invariants);
    report("metric-oracle", metric_oracle);
    report("statistics", statistics);

    SynthOutcome synth;
    std::string synth_error;
    try {
        synth = run_synthetic();
    } catch (const std::exception& e) {
        synth_error = e.what();
    }
    report("context-separation", [&]() -> Result {
        if (!synth_error.empty()) return {Outcome::kFail, "exception: " + synth_error};
        const double secs = synth.baseline_secs + synth.evcim_secs;
        return pass_if(synth.baseline_f1_ctx <= 60.0 && synth.evcim_f1 >= 90.0 && secs < 300.0,
                       fmt::format("target-only F1 {:.2f} on {} context-dependent test sentences (<= 60); EvCIM F1 "
                                   "{:.2f} on {} held-out sentences (>= 90), {:.2f} on the context-dependent ones; "
                                   "training {:.1f}s + {:.1f}s",
                                   synth.baseline_f1_ctx, synth.test_ctx, synth.evcim_f1, synth.test_sentences,
                                   synth.evcim_f1_ctx, synth.baseline_secs, synth.evcim_secs));
    });

    report("basil-corpus-statistics", basil_statistics);
    report("basil-directional-replication", basil_replication);
    return failed == 0 ? 0 : 1;
}
