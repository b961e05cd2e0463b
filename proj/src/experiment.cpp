#include "ibias/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ibias/dataset.hpp"
#include "ibias/digest.hpp"
#include "ibias/embeddings.hpp"
#include "ibias/error.hpp"
#include "ibias/lexicon.hpp"
#include "ibias/splitter.hpp"

namespace ibias {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

}  // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ValidationError("run config: expected a JSON object");
    RunConfig c;
    try {
        c.corpus = resolve(j.value("corpus", std::string()), base_dir);
        c.split = resolve(j.value("split", std::string()), base_dir);
        c.k = j.value("k", c.k);
        c.split_seed = j.value("split_seed", c.split_seed);
        c.embeddings = resolve(j.value("embeddings", std::string()), base_dir);
        c.run_dir = j.value("run_dir", std::string());
        if (j.contains("model")) {
            c.model = model_config_from_json(j.at("model"), c.model);
            c.input_dim_from_embeddings = !j.at("model").contains("input_dim");
        }
        if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
        if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("folds")) c.folds = j.at("folds").get<std::vector<std::size_t>>();
        c.window = j.value("window", c.window);
        c.baseline_run = j.value("baseline_run", std::string());
        c.alpha = j.value("alpha", c.alpha);
        c.lexicon = resolve(j.value("lexicon", std::string()), base_dir);
        c.workers = j.value("workers", c.workers);
        c.save_checkpoints = j.value("save_checkpoints", c.save_checkpoints);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("run config: ") + e.what());
    }
    return c;
}

json to_json(const RunConfig& c) {
    json model = to_json(c.model);
    if (c.input_dim_from_embeddings) model.erase("input_dim");
    json t = to_json(c.train);
    t.erase("seed");
    return {{"corpus", c.corpus.string()},
            {"split", c.split.string()},
            {"k", c.k},
            {"split_seed", c.split_seed},
            {"embeddings", c.embeddings.string()},
            {"run_dir", c.run_dir.string()},
            {"model", model},
            {"train", t},
            {"seeds", c.seeds},
            {"folds", c.folds},
            {"window", c.window},
            {"baseline_run", c.baseline_run.string()},
            {"alpha", c.alpha},
            {"lexicon", c.lexicon.string()},
            {"save_checkpoints", c.save_checkpoints}};
}

fs::path resolve_run_dir(const fs::path& p) {
    if (p.empty()) throw ValidationError("run directory not set");
    if (p.is_absolute()) return p;
    if (const char* root = std::getenv(kRunRootEnv); root != nullptr && *root != '\0') return fs::path(root) / p;
    return fs::absolute(p);
}

json to_json(const RunManifest& m) {
    return {{"format", "ibias-run/1"},
            {"corpus_digest", m.corpus_digest},
            {"split_digest", m.split_digest},
            {"variant", m.variant},
            {"seeds", m.seeds},
            {"folds", m.folds},
            {"config", m.config},
            {"created", m.created},
            {"outputs", m.outputs}};
}

RunManifest manifest_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "ibias-run/1") throw ValidationError("unknown run manifest format");
        RunManifest m;
        m.corpus_digest = j.at("corpus_digest").get<std::string>();
        m.split_digest = j.at("split_digest").get<std::string>();
        m.variant = j.at("variant").get<std::string>();
        m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        m.folds = j.at("folds").get<std::vector<std::size_t>>();
        m.config = j.at("config");
        m.created = j.at("created").get<std::string>();
        m.outputs = j.at("outputs");
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("run manifest: ") + e.what());
    }
}

RunManifest load_manifest(const fs::path& run_dir) {
    const fs::path path = run_dir / "manifest.json";
    if (!fs::exists(path)) throw MissingInputError("no run manifest at " + path.string());
    try {
        return manifest_from_json(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        throw FormatError("run manifest " + path.string() + ": " + e.what());
    }
}

void write_once(const fs::path& path, const std::string& content) {
    if (fs::exists(path)) {
        if (read_file(path) != content) {
            throw ValidationError("refusing to overwrite " + path.string() + " with different content");
        }
        return;
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw MissingInputError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

namespace {

std::string marker_for(const TTestResult& t, double system_mean, double baseline_mean) {
    if (!t.significant) return "";
    return system_mean > baseline_mean ? "+" : "-";
}

std::string fmt_mean_std(const MeanStd& m) {
    return m.std ? fmt::format("{:.2f} ± {:.2f}", m.mean, *m.std) : fmt::format("{:.2f}", m.mean);
}

}  // namespace

RunComparison compare_aggregates(const SeedAggregate& baseline, const SeedAggregate& system, double alpha,
                                 std::string_view baseline_name, std::string_view system_name) {
    RunComparison out;
    auto values = [](const SeedAggregate& a, double MetricReport::*field) {
        std::vector<double> v;
        for (const MetricReport& m : a.per_seed) v.push_back(m.*field);
        return v;
    };
    const std::pair<const char*, double MetricReport::*> fields[] = {
        {"precision", &MetricReport::precision}, {"recall", &MetricReport::recall}, {"f1", &MetricReport::f1}};
    out.table = fmt::format("{:<10} {:>18} {:>19}   p\n", "metric", baseline_name, system_name);
    for (const auto& [name, field] : fields) {
        MetricComparison mc;
        mc.metric = name;
        const auto b = values(baseline, field);
        const auto s = values(system, field);
        mc.baseline = mean_std(b);
        mc.system = mean_std(s);
        if (b.size() >= 2 && s.size() >= 2) {
            mc.test = independent_t_test(s, b, alpha);
            mc.marker = marker_for(mc.test, mc.system.mean, mc.baseline.mean);
        } else {
            spdlog::warn("compare: fewer than 2 seeds on one side, no t-test for {}", name);
        }
        const char* mark = mc.marker == "+" ? "†" : mc.marker == "-" ? "‡" : " ";
        out.table += fmt::format("{:<10} {:>18} {:>18}{} {:.4g}\n", name, fmt_mean_std(mc.baseline),
                                 fmt_mean_std(mc.system), mark, mc.test.p);
        out.metrics.push_back(std::move(mc));
    }
    return out;
}

json to_json(const RunComparison& c) {
    json metrics = json::array();
    for (const MetricComparison& m : c.metrics) {
        auto ms = [](const MeanStd& x) {
            json j = {{"mean", x.mean}};
            j["std"] = x.std ? json(*x.std) : json(nullptr);
            return j;
        };
        metrics.push_back({{"metric", m.metric},
                           {"baseline", ms(m.baseline)},
                           {"system", ms(m.system)},
                           {"t_test", to_json(m.test)},
                           {"marker", m.marker}});
    }
    return {{"metrics", metrics}};
}

namespace {

SeedAggregate load_aggregate(const fs::path& run_dir) {
    const fs::path path = run_dir / "aggregate.json";
    if (!fs::exists(path)) throw MissingInputError("run has no aggregate: " + path.string());
    const json j = json::parse(read_file(path));
    std::vector<MetricReport> reports;
    for (const json& s : j.at("aggregate").at("seeds")) {
        reports.push_back(metrics_from_counts(s.at("tp").get<std::size_t>(), s.at("fp").get<std::size_t>(),
                                              s.at("fn").get<std::size_t>(), s.at("tn").get<std::size_t>()));
    }
    return summarize_seeds(reports);
}

}  // namespace

RunComparison compare_runs(const fs::path& baseline_run, const fs::path& system_run, double alpha) {
    const RunManifest a = load_manifest(baseline_run);
    const RunManifest b = load_manifest(system_run);
    if (a.corpus_digest != b.corpus_digest) throw ValidationError("compare: runs use different corpora");
    if (a.split_digest != b.split_digest) throw ValidationError("compare: runs use different fold plans");
    if (a.folds != b.folds) throw ValidationError("compare: runs cover different folds");
    return compare_aggregates(load_aggregate(baseline_run), load_aggregate(system_run), alpha, a.variant, b.variant);
}

std::vector<PredictionSet> load_seed_predictions(const fs::path& run_dir) {
    const RunManifest m = load_manifest(run_dir);
    std::vector<PredictionSet> out;
    for (std::uint64_t seed : m.seeds) {
        const fs::path path = run_dir / fmt::format("seed{}.predictions.jsonl", seed);
        if (!fs::exists(path)) throw MissingInputError("missing pooled predictions " + path.string());
        out.push_back(read_predictions(path));
    }
    return out;
}

namespace {

struct Sections {
    std::vector<std::string> train;
    std::vector<std::string> dev;
    std::vector<std::string> test;
};

struct Job {
    std::size_t fold = 0;
    std::uint64_t seed = 0;
    fs::path dir;
};

std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunOutcome run_experiment(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    if (cfg.seeds.empty()) throw ValidationError("run: no seeds configured");
    if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size()) {
        throw ValidationError("run: duplicate seeds");
    }
    if (cfg.model.tie_event_encoders && cfg.model.num_docs() != 3) {
        throw ValidationError("run: tie_event_encoders only applies to evcim variants");
    }
    if (cfg.workers == 0) cfg.workers = 1;
    cfg.train.validate();

    const Corpus corpus = parse_corpus(cfg.corpus);

    // Sections per fold, and a digest of the split that defines them.
    std::vector<Sections> sections;
    std::string split_digest;
    if (!cfg.split.empty()) {
        const std::string text = read_file(cfg.split);
        split_digest = sha256_hex(text);
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw FormatError("split plan: " + std::string(e.what()));
        }
        if (j.value("kind", "") == "sentence_split") {
            const SentenceSplitPlan sp = sentence_split_from_json(j);
            sections.push_back({sp.train, sp.dev, sp.test});
        } else {
            const FoldPlan plan = fold_plan_from_json(j);
            const LeakageReport leak = verify_no_story_leakage(plan);
            if (!leak.ok) {
                throw ValidationError(fmt::format("split plan leaks stories ({} violation(s), first: story '{}' fold {}: {})",
                                                  leak.violations.size(), leak.violations[0].story_id,
                                                  leak.violations[0].fold, leak.violations[0].reason));
            }
            auto sorted = [](std::vector<std::string> v) {
                std::sort(v.begin(), v.end());
                return v;
            };
            if (sorted(plan.story_ids) != sorted(corpus.story_ids())) {
                throw ValidationError("split plan stories do not match the corpus");
            }
            for (const Fold& f : plan.folds) {
                sections.push_back({sentences_of_stories(corpus, f.train_story_ids),
                                    sentences_of_stories(corpus, f.dev_story_ids),
                                    sentences_of_stories(corpus, f.test_story_ids)});
            }
        }
    } else {
        const FoldPlan plan = make_story_folds(corpus, cfg.k, cfg.split_seed);
        split_digest = sha256_hex(serialize_fold_plan(plan));
        for (const Fold& f : plan.folds) {
            sections.push_back({sentences_of_stories(corpus, f.train_story_ids),
                                sentences_of_stories(corpus, f.dev_story_ids),
                                sentences_of_stories(corpus, f.test_story_ids)});
        }
    }
    std::vector<std::size_t> folds = cfg.folds;
    if (folds.empty()) {
        for (std::size_t f = 0; f < sections.size(); ++f) folds.push_back(f);
    }
    for (std::size_t f : folds) {
        if (f >= sections.size()) {
            throw ValidationError(fmt::format("run: fold {} out of range ({} folds)", f, sections.size()));
        }
    }

    // Load and check every embedding table before any training starts.
    std::map<std::size_t, EmbeddingTable> tables;
    for (std::size_t f : folds) {
        const fs::path path = cfg.embeddings / fold_embedding_filename(f);
        if (!fs::exists(path)) throw MissingInputError("missing embedding file " + path.string());
        EmbeddingTable t = read_embeddings(path);
        const auto missing = coverage_check(t, corpus);
        if (!missing.empty()) {
            std::string list;
            for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 20); ++i) {
                list += (i ? ", " : "") + missing[i];
            }
            throw MissingInputError(fmt::format("{} lacks {} sentence(s): {}{}", path.string(), missing.size(), list,
                                                missing.size() > 20 ? ", ..." : ""));
        }
        if (cfg.input_dim_from_embeddings) {
            cfg.model.input_dim = t.dim();
        } else if (cfg.model.input_dim != t.dim()) {
            throw ValidationError(fmt::format("model input_dim {} does not match embedding dim {} in {}",
                                              cfg.model.input_dim, t.dim(), path.string()));
        }
        tables.emplace(f, std::move(t));
    }
    cfg.input_dim_from_embeddings = false;
    cfg.model.validate();

    const fs::path run_dir = resolve_run_dir(cfg.run_dir);
    fs::create_directories(run_dir);
    RunManifest manifest;
    manifest.corpus_digest = corpus.provenance();
    manifest.split_digest = split_digest;
    manifest.variant = std::string(to_string(cfg.model.variant));
    manifest.seeds = cfg.seeds;
    manifest.folds = folds;
    manifest.config = to_json(cfg);
    manifest.config.erase("run_dir");
    manifest.config.erase("baseline_run");
    manifest.config.erase("lexicon");
    manifest.config.erase("alpha");
    manifest.outputs = {{"aggregate", "aggregate.json"}, {"strata", "strata.json"}, {"strata_table", "strata.txt"}};
    for (std::uint64_t s : cfg.seeds) {
        manifest.outputs["seed_predictions"].push_back(fmt::format("seed{}.predictions.jsonl", s));
    }
    if (!cfg.baseline_run.empty()) manifest.outputs["comparison"] = "comparison.json";
    const fs::path manifest_path = run_dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        const RunManifest prev = load_manifest(run_dir);
        if (prev.corpus_digest != manifest.corpus_digest || prev.split_digest != manifest.split_digest ||
            prev.config != manifest.config) {
            throw ValidationError("run directory " + run_dir.string() + " holds a run with a different configuration");
        }
        manifest.created = prev.created;
        manifest.outputs = prev.outputs;
        if (!cfg.baseline_run.empty()) manifest.outputs["comparison"] = "comparison.json";
    } else {
        manifest.created = now_iso8601();
        write_once(manifest_path, to_json(manifest).dump(2) + "\n");
    }

    // (fold, seed) jobs; a job is complete once its job.json exists.
    std::vector<Job> jobs;
    for (std::size_t f : folds) {
        for (std::uint64_t s : cfg.seeds) jobs.push_back({f, s, run_dir / fmt::format("fold{}", f) / fmt::format("seed{}", s)});
    }
    RunOutcome outcome;
    std::vector<Job> pending;
    for (const Job& job : jobs) {
        const fs::path done = job.dir / "job.json";
        if (fs::exists(done)) {
            const json j = json::parse(read_file(done));
            if (j.value("corpus_digest", "") != manifest.corpus_digest) {
                throw ValidationError("job " + job.dir.string() + " was produced from a different corpus");
            }
            ++outcome.reused_jobs;
        } else {
            pending.push_back(job);
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            {
                std::lock_guard lock(error_mutex);
                if (first_error) return;
            }
            const Job& job = pending[i];
            try {
                const EmbeddingTable& table = tables.at(job.fold);
                const Sections& sec = sections[job.fold];
                const DatasetOptions dopts{cfg.model.variant, cfg.window};
                const Dataset train_ds = build_dataset(corpus, table, sec.train, dopts);
                const Dataset dev_ds = build_dataset(corpus, table, sec.dev, dopts);
                const Dataset test_ds = build_dataset(corpus, table, sec.test, dopts);
                TrainConfig tcfg = cfg.train;
                tcfg.seed = job.seed;
                spdlog::info("training {} fold {} seed {} ({} train / {} dev / {} test sentences)", manifest.variant,
                             job.fold, job.seed, sec.train.size(), sec.dev.size(), sec.test.size());
                const TrainResult result = train(train_ds, dev_ds, cfg.model, tcfg);
                PredictionSet preds = predict(result.params, test_ds);
                preds.fold = static_cast<long>(job.fold);
                preds.seed = job.seed;
                fs::create_directories(job.dir);
                write_once(job.dir / "predictions.jsonl", to_jsonl(preds));
                write_once(job.dir / "history.json",
                           json{{"best_epoch", result.best_epoch}, {"epochs", to_json(result.history)}}.dump(1) + "\n");
                if (cfg.save_checkpoints) write_once(job.dir / "params.cim1", encode_checkpoint(result.params));
                const MetricReport m = preds.items.empty() ? MetricReport{} : prf1(preds);
                write_once(job.dir / "job.json", json{{"corpus_digest", manifest.corpus_digest},
                                                      {"split_digest", manifest.split_digest},
                                                      {"fold", job.fold},
                                                      {"seed", job.seed},
                                                      {"best_epoch", result.best_epoch},
                                                      {"test", to_json(m)}}
                                                         .dump(1) + "\n");
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const std::size_t nthreads = std::min(cfg.workers, std::max<std::size_t>(pending.size(), 1));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> threads;
        for (std::size_t t = 0; t < nthreads; ++t) threads.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
    outcome.trained_jobs = pending.size();

    // Pool each seed's folds into one corpus-wide prediction set.
    std::vector<MetricReport> reports;
    for (std::uint64_t seed : cfg.seeds) {
        std::vector<PredictionSet> parts;
        for (std::size_t f : folds) {
            parts.push_back(read_predictions(run_dir / fmt::format("fold{}", f) / fmt::format("seed{}", seed) /
                                             "predictions.jsonl"));
        }
        PredictionSet pooled = pool_predictions(parts);
        if (pooled.items.empty()) throw ValidationError("run: no test predictions");
        pooled.variant = manifest.variant;
        pooled.seed = seed;
        write_once(run_dir / fmt::format("seed{}.predictions.jsonl", seed), to_jsonl(pooled));
        reports.push_back(prf1(pooled));
        outcome.seed_predictions.push_back(std::move(pooled));
    }
    if (reports.size() < 2) {
        spdlog::warn("run: only {} seed; standard deviations are omitted", reports.size());
        outcome.aggregate = summarize_seeds(reports);
    } else {
        outcome.aggregate = aggregate_seeds(reports);
    }
    write_once(run_dir / "aggregate.json",
               json{{"corpus_digest", manifest.corpus_digest},
                    {"split_digest", manifest.split_digest},
                    {"variant", manifest.variant},
                    {"pooling", "per-seed predictions pooled across folds before scoring"},
                    {"aggregate", to_json(outcome.aggregate)}}
                       .dump(1) + "\n");

    // Stratified error analysis, against the baseline's seeds when available.
    std::vector<PredictionSet> baseline_seeds;
    std::string baseline_name = "baseline";
    if (!cfg.baseline_run.empty()) {
        const fs::path base_dir = resolve_run_dir(cfg.baseline_run);
        outcome.comparison = compare_runs(base_dir, run_dir, cfg.alpha);
        baseline_seeds = load_seed_predictions(base_dir);
        baseline_name = load_manifest(base_dir).variant;
        write_once(run_dir / "comparison.json",
                   json{{"corpus_digest", manifest.corpus_digest},
                        {"baseline", base_dir.string()},
                        {"alpha", cfg.alpha},
                        {"comparison", to_json(*outcome.comparison)}}
                           .dump(1) + "\n");
        write_once(run_dir / "comparison.txt", outcome.comparison->table);
    }
    std::optional<SubjectivityLexicon> lexicon;
    if (!cfg.lexicon.empty()) lexicon = load_mpqa_lexicon(cfg.lexicon);
    StratifyContext sctx{lexicon ? &*lexicon : nullptr, length_quartiles(corpus)};
    json strata = json::array();
    std::string table;
    for (Scheme scheme : kAllSchemes) {
        if (scheme == Scheme::kSubjectivity && !lexicon) continue;
        const SchemeComparison cmp =
            compare_strata(baseline_seeds, outcome.seed_predictions, corpus, scheme, sctx, cfg.alpha);
        strata.push_back(to_json(cmp));
        table += render_table(cmp, baseline_name, manifest.variant) + "\n";
    }
    table += render_publisher_leaning(corpus_stats(corpus));
    write_once(run_dir / "strata.json",
               json{{"corpus_digest", manifest.corpus_digest}, {"schemes", strata}}.dump(1) + "\n");
    write_once(run_dir / "strata.txt", table);

    outcome.manifest = manifest;
    return outcome;
}

}  // namespace ibias
