#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ibias/analysis.hpp"
#include "ibias/corpus.hpp"
#include "ibias/dataset.hpp"
#include "ibias/digest.hpp"
#include "ibias/embeddings.hpp"
#include "ibias/error.hpp"
#include "ibias/experiment.hpp"
#include "ibias/lexicon.hpp"
#include "ibias/metrics.hpp"
#include "ibias/model.hpp"
#include "ibias/prediction.hpp"
#include "ibias/splitter.hpp"
#include "ibias/synth.hpp"
#include "ibias/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ibias;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInputError("cannot write " + path.string());
    out << content;
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// --- parse -----------------------------------------------------------------

struct ParseArgs {
    fs::path corpus;
    fs::path out;
    fs::path stats;
};

void cmd_parse(const ParseArgs& a) {
    const Corpus c = parse_corpus(a.corpus);
    if (!a.out.empty()) write_corpus(c, a.out);
    json stats = stats_to_json(corpus_stats(c));
    stats["digest"] = c.provenance();
    stats["dropped_empty"] = c.dropped_empty();
    stats["stories"] = c.stories().size();
    write_text(a.stats, stats.dump(2) + "\n");
}

// --- split -----------------------------------------------------------------

struct SplitArgs {
    fs::path corpus;
    std::size_t k = 10;
    std::uint64_t seed = 0;
    fs::path out;
    bool with_sentences = false;
    std::vector<std::size_t> sentence_sizes;
};

void cmd_split(const SplitArgs& a) {
    const Corpus c = parse_corpus(a.corpus);
    if (!a.sentence_sizes.empty()) {
        if (a.sentence_sizes.size() != 3) throw ValidationError("--sentence-split takes train dev test sizes");
        const SentenceSplitPlan p =
            make_sentence_split(c, {a.sentence_sizes[0], a.sentence_sizes[1], a.sentence_sizes[2]}, a.seed);
        json j = sentence_split_to_json(p);
        j["corpus_digest"] = c.provenance();
        write_text(a.out, j.dump(1) + "\n");
        return;
    }
    const FoldPlan plan = make_story_folds(c, a.k, a.seed);
    const LeakageReport leak = verify_no_story_leakage(plan);
    if (!leak.ok) throw ValidationError("generated plan leaks stories");
    write_text(a.out, serialize_fold_plan(plan, a.with_sentences ? &c : nullptr));
}

// --- emb-check -------------------------------------------------------------

struct EmbCheckArgs {
    fs::path corpus;
    std::vector<fs::path> files;
    fs::path tsv;
};

int cmd_emb_check(const EmbCheckArgs& a) {
    const Corpus c = parse_corpus(a.corpus);
    json report = json::array();
    bool complete = true;
    for (const fs::path& f : a.files) {
        const EmbeddingTable t = read_embeddings(f);
        const auto missing = coverage_check(t, c);
        json j = {{"file", f.string()}, {"dim", t.dim()}, {"entries", t.size()}, {"missing", missing}};
        j["fold"] = t.fold_tag ? json(*t.fold_tag) : json(nullptr);
        j["encoder_tag"] = t.encoder_tag;
        report.push_back(std::move(j));
        if (!missing.empty()) {
            complete = false;
            spdlog::error("{} lacks {} corpus sentence(s)", f.string(), missing.size());
        }
        if (!a.tsv.empty()) {
            std::ofstream out(a.tsv, std::ios::app);
            export_tsv(t, out);
        }
    }
    std::cout << report.dump(2) << "\n";
    return complete ? 0 : static_cast<int>(ExitCode::kMissingInput);
}

// --- train -----------------------------------------------------------------

// Each override is stored as a JSON pointer plus the value given on the command line.
struct TrainArgs {
    fs::path config;
    json overrides = json::object();
};

void set_override(json& o, const std::string& pointer, json value) { o[json::json_pointer(pointer)] = std::move(value); }

void add_train_overrides(CLI::App* sub, TrainArgs& a) {
    auto str = [&](const std::string& flag, const std::string& pointer, const std::string& help) {
        sub->add_option_function<std::string>(
            flag, [&a, pointer](const std::string& v) { set_override(a.overrides, pointer, v); }, help);
    };
    auto uint = [&](const std::string& flag, const std::string& pointer, const std::string& help) {
        sub->add_option_function<std::uint64_t>(
            flag, [&a, pointer](const std::uint64_t& v) { set_override(a.overrides, pointer, v); }, help);
    };
    auto real = [&](const std::string& flag, const std::string& pointer, const std::string& help) {
        sub->add_option_function<double>(
            flag, [&a, pointer](const double& v) { set_override(a.overrides, pointer, v); }, help);
    };
    auto boolean = [&](const std::string& flag, const std::string& pointer, const std::string& help) {
        sub->add_option_function<bool>(
            flag, [&a, pointer](const bool& v) { set_override(a.overrides, pointer, v); }, help);
    };
    str("--corpus", "/corpus", "corpus JSON");
    str("--split", "/split", "fold plan or sentence split JSON");
    uint("--k", "/k", "folds when no split file is given");
    uint("--split-seed", "/split_seed", "fold seed when no split file is given");
    str("--embeddings", "/embeddings", "directory of emb.fold<k>.emb1 files");
    str("--run-dir", "/run_dir", "run directory");
    str("--variant", "/model/variant", "target_only|artcim|artcim_star|evcim|evcim_star|window_tagger");
    uint("--input-dim", "/model/input_dim", "sentence vector size (default: from embeddings)");
    uint("--hidden", "/model/hidden", "BiLSTM hidden size");
    uint("--layers", "/model/layers", "BiLSTM layers");
    uint("--source-dim", "/model/source_dim", "source embedding size");
    str("--pooling", "/model/pooling", "final_states|mean");
    boolean("--tie-event-encoders", "/model/tie_event_encoders", "share one BiLSTM across event slots");
    uint("--epochs", "/train/epochs", "training epochs");
    real("--lr", "/train/learning_rate", "Adam learning rate");
    uint("--batch-size", "/train/batch_size", "batch size");
    real("--beta1", "/train/beta1", "Adam beta1");
    real("--beta2", "/train/beta2", "Adam beta2");
    real("--adam-epsilon", "/train/adam_epsilon", "Adam epsilon");
    real("--positive-weight", "/train/positive_weight", "loss weight of biased examples");
    real("--dropout", "/train/dropout", "dropout on the classifier input");
    real("--clip-norm", "/train/clip_norm", "gradient norm clip (0 disables)");
    boolean("--select-on-dev", "/train/select_on_dev", "keep the best dev epoch");
    sub->add_option_function<std::vector<std::uint64_t>>(
        "--seeds", [&a](const std::vector<std::uint64_t>& v) { a.overrides["seeds"] = v; }, "training seeds")
        ->delimiter(',');
    sub->add_option_function<std::vector<std::size_t>>(
        "--folds", [&a](const std::vector<std::size_t>& v) { a.overrides["folds"] = v; }, "folds to run")
        ->delimiter(',');
    uint("--window", "/window", "tagger core length");
    str("--baseline", "/baseline_run", "baseline run directory for comparisons");
    real("--alpha", "/alpha", "significance level");
    str("--lexicon", "/lexicon", "MPQA subjectivity lexicon");
    uint("--workers", "/workers", "parallel (fold, seed) jobs");
    boolean("--save-checkpoints", "/save_checkpoints", "write params.cim1 per job");
}

void cmd_train(const TrainArgs& a) {
    json j = a.config.empty() ? json::object() : read_json(a.config);
    j.merge_patch(a.overrides);
    const fs::path base = a.config.empty() ? fs::path() : fs::absolute(a.config).parent_path();
    const RunConfig cfg = run_config_from_json(j, base);
    if (cfg.corpus.empty()) throw ValidationError("train: no corpus given");
    if (cfg.embeddings.empty()) throw ValidationError("train: no embeddings directory given");
    const RunOutcome out = run_experiment(cfg);
    spdlog::info("trained {} job(s), reused {}", out.trained_jobs, out.reused_jobs);
    json summary = {{"run_dir", resolve_run_dir(cfg.run_dir).string()},
                    {"variant", out.manifest.variant},
                    {"aggregate", to_json(out.aggregate)}};
    if (out.comparison) summary["comparison"] = to_json(*out.comparison);
    std::cout << summary.dump(2) << "\n";
}

// --- predict ---------------------------------------------------------------

struct PredictArgs {
    fs::path checkpoint;
    fs::path corpus;
    fs::path embeddings;
    fs::path split;
    long fold = -1;
    std::size_t window = 5;
    fs::path out;
};

void cmd_predict(const PredictArgs& a) {
    const Corpus c = parse_corpus(a.corpus);
    const CimParameters p = load_checkpoint(a.checkpoint);
    const EmbeddingTable t = read_embeddings(a.embeddings);
    std::vector<std::string> ids = c.sentence_ids();
    if (!a.split.empty()) {
        const json j = read_json(a.split);
        if (j.value("kind", "") == "sentence_split") {
            ids = sentence_split_from_json(j).test;
        } else {
            const FoldPlan plan = fold_plan_from_json(j);
            if (a.fold < 0 || static_cast<std::size_t>(a.fold) >= plan.folds.size()) {
                throw ValidationError("predict: --fold is required and must index the plan");
            }
            ids = sentences_of_stories(c, plan.folds[static_cast<std::size_t>(a.fold)].test_story_ids);
        }
    }
    const Dataset ds = build_dataset(c, t, ids, {p.config().variant, a.window});
    PredictionSet preds = predict(p, ds);
    preds.fold = a.fold;
    write_text(a.out, to_jsonl(preds));
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
    std::vector<fs::path> predictions;
};

void cmd_evaluate(const EvaluateArgs& a) {
    std::vector<MetricReport> reports;
    for (const fs::path& f : a.predictions) reports.push_back(prf1(read_predictions(f)));
    if (reports.size() == 1) {
        std::cout << to_json(reports[0]).dump(2) << "\n";
        return;
    }
    std::cout << to_json(aggregate_seeds(reports)).dump(2) << "\n";
}

// --- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    fs::path corpus;
    fs::path run;
    std::vector<fs::path> predictions;
    fs::path baseline;
    std::vector<std::string> schemes;
    fs::path lexicon;
    double alpha = 0.05;
    fs::path out_json;
    fs::path out_table;
};

void cmd_analyze(const AnalyzeArgs& a) {
    const Corpus c = parse_corpus(a.corpus);
    std::vector<PredictionSet> system;
    std::string system_name = "system";
    if (!a.run.empty()) {
        const fs::path dir = resolve_run_dir(a.run);
        system = load_seed_predictions(dir);
        system_name = load_manifest(dir).variant;
    }
    for (const fs::path& f : a.predictions) system.push_back(read_predictions(f));
    if (system.empty()) throw ValidationError("analyze: give --run or --predictions");
    std::vector<PredictionSet> baseline;
    std::string baseline_name = "baseline";
    if (!a.baseline.empty()) {
        const fs::path dir = resolve_run_dir(a.baseline);
        baseline = load_seed_predictions(dir);
        baseline_name = load_manifest(dir).variant;
    }
    std::optional<SubjectivityLexicon> lex;
    if (!a.lexicon.empty()) lex = load_mpqa_lexicon(a.lexicon);
    std::vector<Scheme> schemes;
    for (const std::string& s : a.schemes) schemes.push_back(parse_scheme(s));
    if (schemes.empty()) {
        for (Scheme s : kAllSchemes) {
            if (s != Scheme::kSubjectivity || lex) schemes.push_back(s);
        }
    }
    const StratifyContext ctx{lex ? &*lex : nullptr, length_quartiles(c)};
    json reports = json::array();
    std::string table;
    for (Scheme s : schemes) {
        const SchemeComparison cmp = compare_strata(baseline, system, c, s, ctx, a.alpha);
        reports.push_back(to_json(cmp));
        table += render_table(cmp, baseline_name, system_name) + "\n";
    }
    table += render_publisher_leaning(corpus_stats(c));
    const json doc = {{"corpus_digest", c.provenance()}, {"schemes", reports}};
    if (!a.out_json.empty()) write_text(a.out_json, doc.dump(1) + "\n");
    write_text(a.out_table, table);
}

// --- compare ---------------------------------------------------------------

struct CompareArgs {
    fs::path baseline;
    fs::path system;
    double alpha = 0.05;
    fs::path out;
};

void cmd_compare(const CompareArgs& a) {
    const RunComparison cmp = compare_runs(resolve_run_dir(a.baseline), resolve_run_dir(a.system), a.alpha);
    if (!a.out.empty()) write_text(a.out, to_json(cmp).dump(2) + "\n");
    std::cout << cmp.table;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
    fs::path out;
    std::string kind = "context";
    std::size_t stories = 200;
    std::size_t dim = 16;
    std::uint64_t seed = 1;
    std::size_t k = 10;
    std::uint64_t split_seed = 0;
};

void cmd_synth(const SynthArgs& a) {
    fs::create_directories(a.out);
    Corpus corpus;
    EmbeddingTable table;
    if (a.kind == "context") {
        ContextSynthOptions o;
        o.stories = a.stories;
        o.dim = a.dim;
        o.seed = a.seed;
        ContextSynth s = make_context_synthetic(o);
        std::vector<std::string> ids(s.context_dependent.begin(), s.context_dependent.end());
        std::sort(ids.begin(), ids.end());
        write_text(a.out / "context_dependent.json", json(ids).dump(1) + "\n");
        corpus = std::move(s.corpus);
        table = std::move(s.embeddings);
    } else if (a.kind == "random") {
        RandomCorpusOptions o;
        o.stories = a.stories;
        o.seed = a.seed;
        corpus = make_random_corpus(o);
        table = make_random_embeddings(corpus, a.dim, a.seed);
    } else {
        throw ValidationError("synth: unknown kind '" + a.kind + "'");
    }
    write_corpus(corpus, a.out / "corpus.json");
    const Corpus reread = parse_corpus(a.out / "corpus.json");
    const FoldPlan plan = make_story_folds(reread, a.k, a.split_seed);
    write_text(a.out / "folds.json", serialize_fold_plan(plan));
    for (std::size_t f = 0; f < a.k; ++f) {
        table.fold_tag = f;
        write_embeddings(table, a.out / fold_embedding_filename(f));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Context-inclusive informational bias classification"};
    app.require_subcommand(1);
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "debug logging");
    app.add_flag("-q,--quiet", quiet, "warnings and errors only");

    ParseArgs parse_args;
    auto* parse = app.add_subcommand("parse", "validate a corpus and print its statistics");
    parse->add_option("--corpus", parse_args.corpus, "corpus JSON")->required();
    parse->add_option("--out", parse_args.out, "write the canonical corpus here");
    parse->add_option("--stats", parse_args.stats, "statistics output (default stdout)");

    SplitArgs split_args;
    auto* split = app.add_subcommand("split", "build a story fold plan or a sentence split");
    split->add_option("--corpus", split_args.corpus, "corpus JSON")->required();
    split->add_option("--k", split_args.k, "number of folds");
    split->add_option("--seed", split_args.seed, "shuffle seed");
    split->add_option("--out", split_args.out, "plan output (default stdout)");
    split->add_flag("--with-sentences", split_args.with_sentences, "list sentence ids per section");
    split->add_option("--sentence-split", split_args.sentence_sizes, "random sentence split: TRAIN DEV TEST")
        ->expected(3)
        ->delimiter(',');

    EmbCheckArgs emb_args;
    auto* emb = app.add_subcommand("emb-check", "validate EMB1 files against a corpus");
    emb->add_option("--corpus", emb_args.corpus, "corpus JSON")->required();
    emb->add_option("files", emb_args.files, "EMB1 files")->required();
    emb->add_option("--tsv", emb_args.tsv, "append a TSV dump here");

    TrainArgs train_args;
    auto* trn = app.add_subcommand("train", "train a variant over folds and seeds into a run directory");
    trn->add_option("--config", train_args.config, "run config JSON");
    add_train_overrides(trn, train_args);

    PredictArgs predict_args;
    auto* pred = app.add_subcommand("predict", "predict with a saved checkpoint");
    pred->add_option("--checkpoint", predict_args.checkpoint, "CIM1 checkpoint")->required();
    pred->add_option("--corpus", predict_args.corpus, "corpus JSON")->required();
    pred->add_option("--embeddings", predict_args.embeddings, "EMB1 file")->required();
    pred->add_option("--split", predict_args.split, "restrict to a plan's test section");
    pred->add_option("--fold", predict_args.fold, "fold of --split");
    pred->add_option("--window", predict_args.window, "tagger core length");
    pred->add_option("--out", predict_args.out, "predictions JSONL (default stdout)");

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "score prediction files (several: one per seed)");
    eval->add_option("predictions", eval_args.predictions, "predictions JSONL")->required();

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "stratified error analysis");
    analyze->add_option("--corpus", analyze_args.corpus, "corpus JSON")->required();
    analyze->add_option("--run", analyze_args.run, "run directory of the system");
    analyze->add_option("--predictions", analyze_args.predictions, "system predictions, one file per seed");
    analyze->add_option("--baseline", analyze_args.baseline, "baseline run directory");
    analyze->add_option("--scheme", analyze_args.schemes, "length|quote|publisher|leaning|lexical|subjectivity");
    analyze->add_option("--lexicon", analyze_args.lexicon, "MPQA lexicon");
    analyze->add_option("--alpha", analyze_args.alpha, "significance level");
    analyze->add_option("--json", analyze_args.out_json, "JSON report");
    analyze->add_option("--out", analyze_args.out_table, "text tables (default stdout)");

    CompareArgs compare_args;
    auto* cmp = app.add_subcommand("compare", "t-test a run against a baseline run");
    cmp->add_option("--baseline", compare_args.baseline, "baseline run directory")->required();
    cmp->add_option("--system", compare_args.system, "system run directory")->required();
    cmp->add_option("--alpha", compare_args.alpha, "significance level");
    cmp->add_option("--out", compare_args.out, "JSON report");

    SynthArgs synth_args;
    auto* syn = app.add_subcommand("synth", "write a synthetic corpus, fold plan and embeddings");
    syn->add_option("--out", synth_args.out, "output directory")->required();
    syn->add_option("--kind", synth_args.kind, "context|random");
    syn->add_option("--stories", synth_args.stories, "number of stories");
    syn->add_option("--dim", synth_args.dim, "embedding size");
    syn->add_option("--seed", synth_args.seed, "generator seed");
    syn->add_option("--k", synth_args.k, "folds");
    syn->add_option("--split-seed", synth_args.split_seed, "fold seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::kValidation);
    }
    spdlog::set_default_logger(spdlog::stderr_color_mt("ibias"));
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (*parse) cmd_parse(parse_args);
        else if (*split) cmd_split(split_args);
        else if (*emb) return cmd_emb_check(emb_args);
        else if (*trn) cmd_train(train_args);
        else if (*pred) cmd_predict(predict_args);
        else if (*eval) cmd_evaluate(eval_args);
        else if (*analyze) cmd_analyze(analyze_args);
        else if (*cmp) cmd_compare(compare_args);
        else if (*syn) cmd_synth(synth_args);
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return static_cast<int>(ExitCode::kValidation);
    } catch (const MissingInputError& e) {
        spdlog::error("{}", e.what());
        return static_cast<int>(ExitCode::kMissingInput);
    } catch (const NumericalError& e) {
        spdlog::error("{}", e.what());
        return static_cast<int>(ExitCode::kNumerical);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return static_cast<int>(ExitCode::kFailure);
    }
    return 0;
}
