#include "ibias/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ibias/error.hpp"
#include "ibias/metrics.hpp"
#include "ibias/rng.hpp"
#include "ibias/windowing.hpp"
#include "lstm.hpp"
#include "model_internal.hpp"

namespace ibias {

using nlohmann::json;

void TrainConfig::validate() const {
    if (epochs == 0) throw ValidationError("train: epochs must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("train: learning rate must be finite and non-negative");
    }
    if (batch_size == 0) throw ValidationError("train: batch size must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("train: dropout must be in [0, 1)");
    if (!(positive_weight > 0.0)) throw ValidationError("train: positive_weight must be positive");
    if (clip_norm < 0.0) throw ValidationError("train: clip_norm must be non-negative");
}

namespace {

double log_softmax_at(const Eigen::Vector2d& z, Eigen::Index k) {
    const double m = z.maxCoeff();
    return z(k) - (m + std::log((z.array() - m).exp().sum()));
}

Eigen::VectorXd dropout_mask(Eigen::Index n, const LossOptions& opts) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
    if (opts.dropout > 0.0 && opts.dropout_rng != nullptr) {
        const double keep = 1.0 - opts.dropout;
        for (Eigen::Index i = 0; i < n; ++i) mask(i) = opts.dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
    }
    return mask;
}

struct EncodedDoc {
    std::vector<lstm::LayerCache> caches;
    Eigen::VectorXd ctx;
    Eigen::VectorXd d_ctx;
};

using DocKey = std::pair<std::size_t, std::size_t>;  // (encoder, doc)

double cim_loss(const CimParameters& p, const Dataset& ds, std::span<const std::size_t> units,
                Eigen::VectorXd* grad, const LossOptions& opts) {
    const ModelConfig& cfg = p.config();
    const ParamLayout& layout = p.layout();
    const bool want_grad = grad != nullptr;
    const auto width = static_cast<Eigen::Index>(cfg.classifier_width());
    const auto batch = static_cast<Eigen::Index>(units.size());
    const auto d = static_cast<Eigen::Index>(cfg.input_dim);
    const auto two_h = static_cast<Eigen::Index>(2 * cfg.hidden);

    std::map<DocKey, EncodedDoc> encoded;
    std::vector<std::vector<lstm::LayerWeights>> weights;
    for (std::size_t e = 0; e < cfg.num_encoders(); ++e) weights.push_back(detail::encoder_weights(p, e));

    Eigen::MatrixXd v(width, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const CimItem& item = ds.items.at(units[static_cast<std::size_t>(b)]);
        v.col(b).head(d) = ds.docs[item.target_doc].col(static_cast<Eigen::Index>(item.target_pos));
        Eigen::Index pos = d;
        for (std::size_t slot = 0; slot < cfg.num_docs(); ++slot) {
            const DocKey key{detail::encoder_for_slot(cfg, slot), item.context_docs[slot]};
            auto it = encoded.find(key);
            if (it == encoded.end()) {
                EncodedDoc enc;
                const Eigen::MatrixXd& doc = ds.docs[key.second];
                if (want_grad) {
                    enc.caches = lstm::forward(weights[key.first], doc);
                    enc.ctx = detail::pool(cfg.pooling, enc.caches.back().output);
                } else {
                    enc.ctx = detail::pool(cfg.pooling, lstm::infer(weights[key.first], doc));
                }
                enc.d_ctx = Eigen::VectorXd::Zero(two_h);
                it = encoded.emplace(key, std::move(enc)).first;
            }
            v.col(b).segment(pos, two_h) = it->second.ctx;
            pos += two_h;
        }
        if (cfg.uses_source()) {
            v.col(b).segment(pos, static_cast<Eigen::Index>(cfg.source_dim)) =
                p.tensor(*layout.source_table()).col(static_cast<Eigen::Index>(item.source));
        }
    }

    Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(width, batch);
    if (opts.dropout > 0.0 && opts.dropout_rng != nullptr) {
        for (Eigen::Index b = 0; b < batch; ++b) mask.col(b) = dropout_mask(width, opts);
    }
    const Eigen::MatrixXd vm = v.cwiseProduct(mask);
    const auto w = p.tensor(layout.classifier_weight());
    const Eigen::Vector2d bias = p.tensor(layout.classifier_bias());
    Eigen::MatrixXd logits = w * vm;
    logits.colwise() += bias;

    double loss = 0.0;
    Eigen::MatrixXd d_logits(2, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const CimItem& item = ds.items[units[static_cast<std::size_t>(b)]];
        const Eigen::Index y = item.gold == Label::kBiased ? 1 : 0;
        const double weight = y == 1 ? opts.positive_weight : 1.0;
        const Eigen::Vector2d z = logits.col(b);
        loss -= weight * log_softmax_at(z, y);
        Eigen::Vector2d dz = softmax(z);
        dz(y) -= 1.0;
        d_logits.col(b) = weight * dz / static_cast<double>(batch);
    }
    loss /= static_cast<double>(batch);
    if (!want_grad) return loss;

    grad->setZero(static_cast<Eigen::Index>(p.size()));
    detail::tensor_view(layout, *grad, layout.classifier_weight()).noalias() += d_logits * vm.transpose();
    detail::tensor_view(layout, *grad, layout.classifier_bias()) += d_logits.rowwise().sum();
    const Eigen::MatrixXd dv = (w.transpose() * d_logits).cwiseProduct(mask);

    for (Eigen::Index b = 0; b < batch; ++b) {
        const CimItem& item = ds.items[units[static_cast<std::size_t>(b)]];
        Eigen::Index pos = d;
        for (std::size_t slot = 0; slot < cfg.num_docs(); ++slot) {
            const DocKey key{detail::encoder_for_slot(cfg, slot), item.context_docs[slot]};
            encoded.at(key).d_ctx += dv.col(b).segment(pos, two_h);
            pos += two_h;
        }
        if (cfg.uses_source()) {
            detail::tensor_view(layout, *grad, *layout.source_table()).col(static_cast<Eigen::Index>(item.source)) +=
                dv.col(b).segment(pos, static_cast<Eigen::Index>(cfg.source_dim));
        }
    }
    std::vector<std::vector<lstm::LayerGrads>> grads;
    for (std::size_t e = 0; e < cfg.num_encoders(); ++e) grads.push_back(detail::encoder_grads(layout, *grad, e));
    for (auto& [key, enc] : encoded) {
        const Eigen::MatrixXd d_top = detail::unpool(cfg.pooling, enc.d_ctx, enc.caches.back().output.cols());
        lstm::backward(weights[key.first], enc.caches, d_top, grads[key.first]);
    }
    return loss;
}

double tagger_loss(const CimParameters& p, const Dataset& ds, std::span<const std::size_t> units,
                   Eigen::VectorXd* grad, const LossOptions& opts) {
    const ModelConfig& cfg = p.config();
    const ParamLayout& layout = p.layout();
    const auto weights = detail::encoder_weights(p, 0);
    const auto w = p.tensor(layout.classifier_weight());
    const Eigen::Vector2d bias = p.tensor(layout.classifier_bias());
    const auto two_h = static_cast<Eigen::Index>(2 * cfg.hidden);

    std::size_t scored = 0;
    for (std::size_t u : units) {
        const WindowItem& win = ds.windows.at(u);
        scored += static_cast<std::size_t>(std::count(win.scored.begin(), win.scored.end(), 1));
    }
    if (grad != nullptr) grad->setZero(static_cast<Eigen::Index>(p.size()));
    if (scored == 0) return 0.0;
    const double scale = 1.0 / static_cast<double>(scored);

    std::vector<lstm::LayerGrads> grads;
    if (grad != nullptr) grads = detail::encoder_grads(layout, *grad, 0);
    double loss = 0.0;
    for (std::size_t u : units) {
        const WindowItem& win = ds.windows[u];
        const Eigen::MatrixXd x = ds.window_matrix(win);
        std::vector<lstm::LayerCache> caches;
        Eigen::MatrixXd top;
        if (grad != nullptr) {
            caches = lstm::forward(weights, x);
            top = caches.back().output;
        } else {
            top = lstm::infer(weights, x);
        }
        Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(two_h, top.cols());
        if (opts.dropout > 0.0 && opts.dropout_rng != nullptr) {
            for (Eigen::Index t = 0; t < top.cols(); ++t) mask.col(t) = dropout_mask(two_h, opts);
        }
        const Eigen::MatrixXd tm = top.cwiseProduct(mask);
        Eigen::MatrixXd logits = w * tm;
        logits.colwise() += bias;
        Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(2, top.cols());
        for (Eigen::Index t = 0; t < top.cols(); ++t) {
            if (!win.scored[static_cast<std::size_t>(t)]) continue;
            const Eigen::Index y = win.gold[static_cast<std::size_t>(t)] == Label::kBiased ? 1 : 0;
            const double weight = y == 1 ? opts.positive_weight : 1.0;
            const Eigen::Vector2d z = logits.col(t);
            loss -= weight * log_softmax_at(z, y);
            Eigen::Vector2d dz = softmax(z);
            dz(y) -= 1.0;
            d_logits.col(t) = weight * scale * dz;
        }
        if (grad == nullptr) continue;
        detail::tensor_view(layout, *grad, layout.classifier_weight()).noalias() += d_logits * tm.transpose();
        detail::tensor_view(layout, *grad, layout.classifier_bias()) += d_logits.rowwise().sum();
        const Eigen::MatrixXd d_top = (w.transpose() * d_logits).cwiseProduct(mask);
        lstm::backward(weights, caches, d_top, grads);
    }
    return loss * scale;
}

}  // namespace

double batch_loss(const CimParameters& p, const Dataset& ds, std::span<const std::size_t> units,
                  Eigen::VectorXd* grad, const LossOptions& opts) {
    if (static_cast<std::size_t>(ds.dim) != p.config().input_dim) {
        throw ValidationError(
            fmt::format("dataset dimension {} does not match model input_dim {}", ds.dim, p.config().input_dim));
    }
    if (units.empty()) {
        if (grad != nullptr) grad->setZero(static_cast<Eigen::Index>(p.size()));
        return 0.0;
    }
    if (p.config().variant == Variant::kWindowTagger) return tagger_loss(p, ds, units, grad, opts);
    return cim_loss(p, ds, units, grad, opts);
}

PredictionSet predict(const CimParameters& p, const Dataset& ds) {
    const ModelConfig& cfg = p.config();
    PredictionSet out;
    out.variant = std::string(to_string(cfg.variant));
    if (static_cast<std::size_t>(ds.dim) != cfg.input_dim && !(ds.items.empty() && ds.windows.empty())) {
        throw ValidationError(
            fmt::format("dataset dimension {} does not match model input_dim {}", ds.dim, cfg.input_dim));
    }
    if (cfg.variant == Variant::kWindowTagger) {
        for (const auto& group : ds.article_windows) {
            std::vector<WindowSequence> seqs;
            std::vector<std::vector<double>> probs;
            std::vector<std::string> ids;
            std::vector<Label> gold;
            std::unordered_set<std::string> requested;
            for (std::size_t wi : group) {
                const WindowItem& win = ds.windows[wi];
                seqs.push_back(win.sequence);
                const Eigen::MatrixXd pr = tag_window(p, ds.window_matrix(win));
                std::vector<double> row(static_cast<std::size_t>(pr.cols()));
                for (Eigen::Index t = 0; t < pr.cols(); ++t) row[static_cast<std::size_t>(t)] = pr(1, t);
                probs.push_back(std::move(row));
                for (std::size_t k = 0; k < win.ids.size(); ++k) {
                    if (win.sequence.positions[k].is_bookend) continue;
                    ids.push_back(win.ids[k]);
                    gold.push_back(win.gold[k]);
                    if (win.scored[k]) requested.insert(win.ids[k]);
                }
            }
            const std::vector<double> per_sentence = reassemble_predictions(seqs, probs);
            for (std::size_t s = 0; s < per_sentence.size(); ++s) {
                if (!requested.contains(ids[s])) continue;
                const double pb = per_sentence[s];
                out.items.push_back({ids[s], pb, argmax_label(Eigen::Vector2d(1.0 - pb, pb)), gold[s]});
            }
        }
        return out;
    }

    std::map<DocKey, Eigen::VectorXd> ctx_cache;
    std::vector<std::vector<lstm::LayerWeights>> weights;
    for (std::size_t e = 0; e < cfg.num_encoders(); ++e) weights.push_back(detail::encoder_weights(p, e));
    const ParamLayout& layout = p.layout();
    const auto w = p.tensor(layout.classifier_weight());
    const Eigen::Vector2d bias = p.tensor(layout.classifier_bias());
    const auto d = static_cast<Eigen::Index>(cfg.input_dim);
    Eigen::VectorXd v(static_cast<Eigen::Index>(cfg.classifier_width()));
    for (const CimItem& item : ds.items) {
        v.head(d) = ds.docs[item.target_doc].col(static_cast<Eigen::Index>(item.target_pos));
        Eigen::Index pos = d;
        for (std::size_t slot = 0; slot < cfg.num_docs(); ++slot) {
            const DocKey key{detail::encoder_for_slot(cfg, slot), item.context_docs[slot]};
            auto it = ctx_cache.find(key);
            if (it == ctx_cache.end()) {
                it = ctx_cache.emplace(key, detail::pool(cfg.pooling, lstm::infer(weights[key.first],
                                                                                   ds.docs[key.second])))
                         .first;
            }
            v.segment(pos, it->second.size()) = it->second;
            pos += it->second.size();
        }
        if (cfg.uses_source()) {
            v.segment(pos, static_cast<Eigen::Index>(cfg.source_dim)) =
                p.tensor(*layout.source_table()).col(static_cast<Eigen::Index>(item.source));
        }
        const Eigen::Vector2d probs = softmax(w * v + bias);
        out.items.push_back({item.id, probs(1), argmax_label(probs), item.gold});
    }
    return out;
}

TrainResult train(const Dataset& train_set, const Dataset& dev_set, const ModelConfig& cfg, const TrainConfig& tcfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    tcfg.validate();
    const std::size_t units = train_set.units(cfg.variant);
    if (units == 0) throw ValidationError("train: empty training set");

    TrainResult result{init_params(cfg, tcfg.seed), {}, 0};
    CimParameters params = result.params;
    const auto n = static_cast<Eigen::Index>(params.size());
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad(n);
    Rng rng(tcfg.seed ^ 0x9E3779B97F4A7C15ULL);
    LossOptions opts{tcfg.positive_weight, tcfg.dropout, &rng};

    std::vector<std::size_t> order(units);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::uint64_t step = 0;
    double best_f1 = -std::numeric_limits<double>::infinity();
    const bool use_dev = tcfg.select_on_dev && dev_set.units(cfg.variant) > 0;

    for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < units; start += tcfg.batch_size) {
            const std::size_t len = std::min(tcfg.batch_size, units - start);
            const std::span<const std::size_t> batch(order.data() + start, len);
            const double loss = batch_loss(params, train_set, batch, &grad, opts);
            if (!std::isfinite(loss) || !grad.allFinite()) {
                throw NumericalError(fmt::format("train: non-finite loss or gradient at epoch {}, batch starting at "
                                                 "{} (loss = {}, |grad| = {})",
                                                 epoch, start, loss, grad.norm()));
            }
            loss_sum += loss * static_cast<double>(len);
            if (tcfg.clip_norm > 0.0) {
                const double norm = grad.norm();
                if (norm > tcfg.clip_norm) grad *= tcfg.clip_norm / norm;
            }
            ++step;
            m = tcfg.beta1 * m + (1.0 - tcfg.beta1) * grad;
            v = tcfg.beta2 * v + (1.0 - tcfg.beta2) * grad.cwiseAbs2();
            const double c1 = 1.0 - std::pow(tcfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(tcfg.beta2, static_cast<double>(step));
            params.values().array() -=
                tcfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + tcfg.adam_epsilon);
        }
        EpochRecord rec{epoch, loss_sum / static_cast<double>(units), std::nullopt};
        if (use_dev) {
            const PredictionSet dev_preds = predict(params, dev_set);
            if (!dev_preds.items.empty()) rec.dev_f1 = prf1(dev_preds).f1;
        }
        if (!use_dev || !rec.dev_f1) {
            result.params = params;
            result.best_epoch = epoch;
        } else if (*rec.dev_f1 > best_f1) {
            best_f1 = *rec.dev_f1;
            result.params = params;
            result.best_epoch = epoch;
        }
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return result;
}

namespace {

Dataset random_problem(const ModelConfig& cfg, std::size_t batch, Rng& rng) {
    Dataset ds;
    ds.dim = cfg.input_dim;
    const std::size_t num_docs = 4;
    for (std::size_t k = 0; k < num_docs; ++k) {
        const auto len = static_cast<Eigen::Index>(1 + rng.below(4));
        Eigen::MatrixXd doc(static_cast<Eigen::Index>(cfg.input_dim), len);
        for (Eigen::Index c = 0; c < len; ++c)
            for (Eigen::Index r = 0; r < doc.rows(); ++r) doc(r, c) = rng.normal();
        ds.docs.push_back(std::move(doc));
        ds.doc_refs.push_back(fmt::format("doc{}", k));
    }
    if (cfg.variant == Variant::kWindowTagger) {
        for (std::size_t k = 0; k < batch; ++k) {
            WindowItem w;
            w.doc = k % num_docs;
            const auto len = static_cast<std::size_t>(ds.docs[w.doc].cols());
            for (std::size_t s = 0; s < len; ++s) {
                w.sequence.positions.push_back({s, false});
                w.ids.push_back(fmt::format("w{}s{}", k, s));
                w.gold.push_back(rng.below(2) ? Label::kBiased : Label::kNeutral);
                w.scored.push_back(s == 0 || rng.below(4) != 0 ? 1 : 0);
            }
            ds.windows.push_back(std::move(w));
        }
        return ds;
    }
    for (std::size_t k = 0; k < batch; ++k) {
        CimItem item;
        item.id = fmt::format("item{}", k);
        item.target_doc = rng.below(num_docs);
        item.target_pos = rng.below(static_cast<std::uint64_t>(ds.docs[item.target_doc].cols()));
        item.num_contexts = cfg.num_docs();
        for (std::size_t slot = 0; slot < item.num_contexts; ++slot) {
            item.context_docs[slot] = slot == 0 ? item.target_doc : rng.below(num_docs);
        }
        item.source = kSources[rng.below(3)];
        item.gold = k % 2 == 0 ? Label::kBiased : Label::kNeutral;
        ds.items.push_back(std::move(item));
    }
    return ds;
}

}  // namespace

GradCheckReport grad_check(const ModelConfig& cfg, double eps, const GradCheckOptions& opts) {
    cfg.validate();
    Rng rng(opts.seed);
    const Dataset ds = random_problem(cfg, opts.batch, rng);
    CimParameters p = init_params(cfg, opts.seed + 1);
    // Move away from the zero-bias starting point so every gate is exercised.
    for (Eigen::Index i = 0; i < p.values().size(); ++i) p.values()(i) += 0.1 * rng.normal();

    std::vector<std::size_t> units(ds.units(cfg.variant));
    std::iota(units.begin(), units.end(), std::size_t{0});
    Eigen::VectorXd analytic;
    batch_loss(p, ds, units, &analytic);

    std::size_t begin = 0;
    std::size_t end = p.size();
    if (opts.classifier_only) std::tie(begin, end) = p.layout().classifier_range();

    GradCheckReport report;
    for (std::size_t i = begin; i < end; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const double saved = p.values()(idx);
        p.values()(idx) = saved + eps;
        const double plus = batch_loss(p, ds, units, nullptr);
        p.values()(idx) = saved - eps;
        const double minus = batch_loss(p, ds, units, nullptr);
        p.values()(idx) = saved;
        const double numeric = (plus - minus) / (2.0 * eps);
        const double a = analytic(idx);
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), opts.floor});
        ++report.checked;
        if (rel > report.max_relative_error || report.checked == 1) {
            report.max_relative_error = rel;
            report.worst_index = i;
            report.analytic = a;
            report.numeric = numeric;
        }
    }
    report.worst_name = p.layout().describe(report.worst_index);
    return report;
}

json to_json(const TrainConfig& t) {
    return {{"epochs", t.epochs},
            {"learning_rate", t.learning_rate},
            {"batch_size", t.batch_size},
            {"seed", t.seed},
            {"beta1", t.beta1},
            {"beta2", t.beta2},
            {"adam_epsilon", t.adam_epsilon},
            {"positive_weight", t.positive_weight},
            {"dropout", t.dropout},
            {"clip_norm", t.clip_norm},
            {"select_on_dev", t.select_on_dev}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig t) {
    try {
        t.epochs = j.value("epochs", t.epochs);
        t.learning_rate = j.value("learning_rate", t.learning_rate);
        t.batch_size = j.value("batch_size", t.batch_size);
        t.seed = j.value("seed", t.seed);
        t.beta1 = j.value("beta1", t.beta1);
        t.beta2 = j.value("beta2", t.beta2);
        t.adam_epsilon = j.value("adam_epsilon", t.adam_epsilon);
        t.positive_weight = j.value("positive_weight", t.positive_weight);
        t.dropout = j.value("dropout", t.dropout);
        t.clip_norm = j.value("clip_norm", t.clip_norm);
        t.select_on_dev = j.value("select_on_dev", t.select_on_dev);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("train config: ") + e.what());
    }
    return t;
}

json to_json(const ModelConfig& m) {
    return {{"variant", to_string(m.variant)},
            {"input_dim", m.input_dim},
            {"hidden", m.hidden},
            {"layers", m.layers},
            {"source_dim", m.source_dim},
            {"pooling", to_string(m.pooling)},
            {"tie_event_encoders", m.tie_event_encoders}};
}

ModelConfig model_config_from_json(const json& j, ModelConfig m) {
    try {
        if (j.contains("variant")) {
            const auto v = parse_variant(j.at("variant").get<std::string>());
            if (!v) throw ValidationError("model config: unknown variant " + j.at("variant").dump());
            m.variant = *v;
        }
        if (j.contains("pooling")) {
            const auto p = parse_pooling(j.at("pooling").get<std::string>());
            if (!p) throw ValidationError("model config: unknown pooling " + j.at("pooling").dump());
            m.pooling = *p;
        }
        m.input_dim = j.value("input_dim", m.input_dim);
        m.hidden = j.value("hidden", m.hidden);
        m.layers = j.value("layers", m.layers);
        m.source_dim = j.value("source_dim", m.source_dim);
        m.tie_event_encoders = j.value("tie_event_encoders", m.tie_event_encoders);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model config: ") + e.what());
    }
    return m;
}

json to_json(const std::vector<EpochRecord>& history) {
    json out = json::array();
    for (const EpochRecord& r : history) {
        json j = {{"epoch", r.epoch}, {"train_loss", r.train_loss}};
        j["dev_f1"] = r.dev_f1 ? json(*r.dev_f1) : json(nullptr);
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace ibias
