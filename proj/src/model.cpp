#include "ibias/model.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "ibias/digest.hpp"
#include "ibias/error.hpp"
#include "ibias/rng.hpp"
#include "model_internal.hpp"

namespace ibias {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::kTargetOnly: return "target_only";
        case Variant::kArtCim: return "artcim";
        case Variant::kArtCimStar: return "artcim_star";
        case Variant::kEvCim: return "evcim";
        case Variant::kEvCimStar: return "evcim_star";
        case Variant::kWindowTagger: return "window_tagger";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view s) {
    for (Variant v : {Variant::kTargetOnly, Variant::kArtCim, Variant::kArtCimStar, Variant::kEvCim,
                      Variant::kEvCimStar, Variant::kWindowTagger}) {
        if (s == to_string(v)) return v;
    }
    return std::nullopt;
}

std::string_view to_string(Pooling p) { return p == Pooling::kFinalStates ? "final_states" : "mean"; }

std::optional<Pooling> parse_pooling(std::string_view s) {
    if (s == "final_states") return Pooling::kFinalStates;
    if (s == "mean") return Pooling::kMean;
    return std::nullopt;
}

std::size_t ModelConfig::num_docs() const {
    switch (variant) {
        case Variant::kArtCim:
        case Variant::kArtCimStar: return 1;
        case Variant::kEvCim:
        case Variant::kEvCimStar: return 3;
        default: return 0;
    }
}

std::size_t ModelConfig::num_encoders() const {
    switch (variant) {
        case Variant::kTargetOnly: return 0;
        case Variant::kEvCim:
        case Variant::kEvCimStar: return tie_event_encoders ? 1 : 3;
        default: return 1;
    }
}

bool ModelConfig::uses_source() const {
    return variant == Variant::kArtCimStar || variant == Variant::kEvCimStar;
}

std::size_t ModelConfig::classifier_width() const {
    if (variant == Variant::kWindowTagger) return 2 * hidden;
    return input_dim + num_docs() * 2 * hidden + (uses_source() ? source_dim : 0);
}

void ModelConfig::validate() const {
    if (input_dim == 0) throw ValidationError("model: input_dim must be positive");
    if (num_encoders() > 0 && (hidden == 0 || layers == 0)) {
        throw ValidationError("model: hidden size and layer count must be positive");
    }
    if (uses_source() && source_dim == 0) throw ValidationError("model: source_dim must be positive");
}

ParamLayout::ParamLayout(const ModelConfig& cfg) : layers_(cfg.layers) {
    cfg.validate();
    auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
        tensors_.push_back({std::move(name), rows, cols, total_});
        total_ += rows * cols;
    };
    const std::size_t h = cfg.hidden;
    for (std::size_t e = 0; e < cfg.num_encoders(); ++e) {
        for (std::size_t l = 0; l < cfg.layers; ++l) {
            const std::size_t in = l == 0 ? cfg.input_dim : 2 * h;
            for (const char* dir : {"fwd", "bwd"}) {
                cells_.push_back(tensors_.size());
                const std::string base = fmt::format("enc{}.layer{}.{}", e, l, dir);
                add(base + ".w_ih", 4 * h, in);
                add(base + ".w_hh", 4 * h, h);
                add(base + ".bias", 4 * h, 1);
            }
        }
    }
    if (cfg.uses_source()) {
        source_ = tensors_.size();
        add("source_table", cfg.source_dim, 3);
    }
    clf_w_ = tensors_.size();
    add("classifier.weight", kNumClasses, cfg.classifier_width());
    add("classifier.bias", kNumClasses, 1);
}

std::size_t ParamLayout::cell(std::size_t encoder, std::size_t layer, std::size_t direction) const {
    return cells_.at((encoder * layers_ + layer) * 2 + direction);
}

std::pair<std::size_t, std::size_t> ParamLayout::classifier_range() const {
    return {tensors_[clf_w_].offset, total_};
}

std::string ParamLayout::describe(std::size_t flat_index) const {
    for (const TensorInfo& t : tensors_) {
        if (flat_index >= t.offset && flat_index < t.offset + t.size()) {
            const std::size_t local = flat_index - t.offset;
            return fmt::format("{}[{},{}]", t.name, local % t.rows, local / t.rows);
        }
    }
    return "?";
}

CimParameters::CimParameters(const ModelConfig& cfg)
    : cfg_(cfg), layout_(cfg), values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.total()))) {}

Eigen::Map<const Eigen::MatrixXd> CimParameters::tensor(std::size_t index) const {
    return detail::tensor_view(layout_, values_, index);
}

Eigen::Map<Eigen::MatrixXd> CimParameters::tensor(std::size_t index) {
    return detail::tensor_view(layout_, values_, index);
}

namespace detail {

Eigen::Map<const Eigen::MatrixXd> tensor_view(const ParamLayout& layout, const Eigen::VectorXd& flat,
                                              std::size_t index) {
    const TensorInfo& t = layout.tensors()[index];
    return {flat.data() + t.offset, static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols)};
}

Eigen::Map<Eigen::MatrixXd> tensor_view(const ParamLayout& layout, Eigen::VectorXd& flat, std::size_t index) {
    const TensorInfo& t = layout.tensors()[index];
    return {flat.data() + t.offset, static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols)};
}

std::vector<lstm::LayerWeights> encoder_weights(const CimParameters& p, std::size_t encoder) {
    const ParamLayout& layout = p.layout();
    const auto& tensors = layout.tensors();
    auto cell = [&](std::size_t first) {
        const TensorInfo& b = tensors[first + 2];
        return lstm::CellWeights{p.tensor(first), p.tensor(first + 1),
                                 lstm::ConstVecMap(p.values().data() + b.offset, static_cast<Eigen::Index>(b.rows))};
    };
    std::vector<lstm::LayerWeights> out;
    out.reserve(p.config().layers);
    for (std::size_t l = 0; l < p.config().layers; ++l) {
        out.push_back({cell(layout.cell(encoder, l, 0)), cell(layout.cell(encoder, l, 1))});
    }
    return out;
}

std::vector<lstm::LayerGrads> encoder_grads(const ParamLayout& layout, Eigen::VectorXd& grad, std::size_t encoder) {
    const auto& tensors = layout.tensors();
    auto cell = [&](std::size_t first) {
        const TensorInfo& b = tensors[first + 2];
        return lstm::CellGrads{tensor_view(layout, grad, first), tensor_view(layout, grad, first + 1),
                               lstm::VecMap(grad.data() + b.offset, static_cast<Eigen::Index>(b.rows))};
    };
    std::vector<lstm::LayerGrads> out;
    const std::size_t layers = layout.layers();
    for (std::size_t l = 0; l < layers; ++l) {
        out.push_back({cell(layout.cell(encoder, l, 0)), cell(layout.cell(encoder, l, 1))});
    }
    return out;
}

std::size_t encoder_for_slot(const ModelConfig& cfg, std::size_t slot) {
    return cfg.num_encoders() == 1 ? 0 : slot;
}

Eigen::VectorXd pool(Pooling pooling, const Eigen::MatrixXd& top) {
    const Eigen::Index hdim = top.rows() / 2;
    Eigen::VectorXd ctx(top.rows());
    if (pooling == Pooling::kFinalStates) {
        ctx.head(hdim) = top.col(top.cols() - 1).head(hdim);
        ctx.tail(hdim) = top.col(0).tail(hdim);
    } else {
        ctx = top.rowwise().mean();
    }
    return ctx;
}

Eigen::MatrixXd unpool(Pooling pooling, const Eigen::VectorXd& d_ctx, Eigen::Index steps) {
    const Eigen::Index hdim = d_ctx.size() / 2;
    Eigen::MatrixXd d_top = Eigen::MatrixXd::Zero(d_ctx.size(), steps);
    if (pooling == Pooling::kFinalStates) {
        d_top.col(steps - 1).head(hdim) = d_ctx.head(hdim);
        d_top.col(0).tail(hdim) += d_ctx.tail(hdim);
    } else {
        d_top.colwise() = d_ctx / static_cast<double>(steps);
    }
    return d_top;
}

}  // namespace detail

namespace {

void fill_uniform(Eigen::Map<Eigen::MatrixXd> m, Rng& rng, double bound) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
}

Eigen::MatrixXd random_orthogonal(Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) g(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd& r = qr.matrixQR();
    for (Eigen::Index k = 0; k < n; ++k) {
        if (r(k, k) < 0) q.col(k) *= -1.0;
    }
    return q;
}

void check_doc(const ModelConfig& cfg, const Eigen::MatrixXd& doc, const char* what) {
    if (doc.cols() == 0) throw ValidationError(fmt::format("{}: empty sequence", what));
    if (static_cast<std::size_t>(doc.rows()) != cfg.input_dim) {
        throw ValidationError(
            fmt::format("{}: sentence vectors have dimension {}, model expects {}", what, doc.rows(), cfg.input_dim));
    }
}

}  // namespace

CimParameters init_params(const ModelConfig& cfg, std::uint64_t seed) {
    CimParameters p(cfg);
    Rng rng(seed);
    const ParamLayout& layout = p.layout();
    const double in_bound = std::sqrt(1.0 / static_cast<double>(std::max<std::size_t>(cfg.hidden, 1)));
    const auto h = static_cast<Eigen::Index>(cfg.hidden);
    for (std::size_t e = 0; e < cfg.num_encoders(); ++e) {
        for (std::size_t l = 0; l < cfg.layers; ++l) {
            for (std::size_t dir = 0; dir < 2; ++dir) {
                const std::size_t first = layout.cell(e, l, dir);
                fill_uniform(p.tensor(first), rng, in_bound);
                auto w_hh = p.tensor(first + 1);
                for (Eigen::Index g = 0; g < 4; ++g) w_hh.block(g * h, 0, h, h) = random_orthogonal(h, rng);
            }
        }
    }
    if (const auto src = layout.source_table()) {
        fill_uniform(p.tensor(*src), rng, std::sqrt(1.0 / static_cast<double>(cfg.source_dim)));
    }
    fill_uniform(p.tensor(layout.classifier_weight()), rng,
                 std::sqrt(1.0 / static_cast<double>(cfg.classifier_width())));
    return p;
}

Eigen::VectorXd encode_document(const CimParameters& p, std::size_t encoder, const Eigen::MatrixXd& doc) {
    const ModelConfig& cfg = p.config();
    if (encoder >= cfg.num_encoders()) {
        throw ValidationError(fmt::format("encode_document: encoder {} out of range ({} available)", encoder,
                                          cfg.num_encoders()));
    }
    check_doc(cfg, doc, "encode_document");
    return detail::pool(cfg.pooling, lstm::infer(detail::encoder_weights(p, encoder), doc));
}

Eigen::Vector2d softmax(const Eigen::Vector2d& logits) {
    const double m = logits.maxCoeff();
    Eigen::Vector2d e = (logits.array() - m).exp().matrix();
    return e / e.sum();
}

Eigen::Vector2d forward(const CimParameters& p, const Eigen::VectorXd& target,
                        std::span<const Eigen::MatrixXd> contexts, std::optional<Source> source) {
    const ModelConfig& cfg = p.config();
    if (cfg.variant == Variant::kWindowTagger) throw ValidationError("forward: use tag_window for the window tagger");
    if (static_cast<std::size_t>(target.size()) != cfg.input_dim) {
        throw ValidationError(
            fmt::format("forward: target has dimension {}, model expects {}", target.size(), cfg.input_dim));
    }
    if (contexts.size() != cfg.num_docs()) {
        throw ValidationError(fmt::format("forward: {} expects {} context document(s), got {}", to_string(cfg.variant),
                                          cfg.num_docs(), contexts.size()));
    }
    if (cfg.uses_source() != source.has_value()) {
        throw ValidationError(cfg.uses_source() ? "forward: variant requires a source" : "forward: unexpected source");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(cfg.classifier_width()));
    Eigen::Index pos = 0;
    v.segment(pos, target.size()) = target;
    pos += target.size();
    for (std::size_t slot = 0; slot < contexts.size(); ++slot) {
        check_doc(cfg, contexts[slot], "forward");
        const Eigen::VectorXd ctx = encode_document(p, detail::encoder_for_slot(cfg, slot), contexts[slot]);
        v.segment(pos, ctx.size()) = ctx;
        pos += ctx.size();
    }
    if (source) {
        v.segment(pos, static_cast<Eigen::Index>(cfg.source_dim)) =
            p.tensor(*p.layout().source_table()).col(static_cast<Eigen::Index>(*source));
    }
    const ParamLayout& layout = p.layout();
    const Eigen::Vector2d logits = p.tensor(layout.classifier_weight()) * v + p.tensor(layout.classifier_bias());
    return softmax(logits);
}

Eigen::MatrixXd tag_window(const CimParameters& p, const Eigen::MatrixXd& seq) {
    const ModelConfig& cfg = p.config();
    if (cfg.variant != Variant::kWindowTagger) throw ValidationError("tag_window: model is not a window tagger");
    check_doc(cfg, seq, "tag_window");
    const Eigen::MatrixXd top = lstm::infer(detail::encoder_weights(p, 0), seq);
    const ParamLayout& layout = p.layout();
    Eigen::MatrixXd logits = p.tensor(layout.classifier_weight()) * top;
    logits.colwise() += Eigen::Vector2d(p.tensor(layout.classifier_bias()));
    Eigen::MatrixXd probs(2, logits.cols());
    for (Eigen::Index t = 0; t < logits.cols(); ++t) probs.col(t) = softmax(logits.col(t));
    return probs;
}

Label argmax_label(const Eigen::Vector2d& probs) {
    return probs(1) >= probs(0) ? Label::kBiased : Label::kNeutral;
}

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

std::string encode_checkpoint(const CimParameters& p) {
    const ModelConfig& cfg = p.config();
    std::string out = "CIM1";
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(cfg.variant));
    put_u32(out, static_cast<std::uint32_t>(cfg.input_dim));
    put_u32(out, static_cast<std::uint32_t>(cfg.hidden));
    put_u32(out, static_cast<std::uint32_t>(cfg.layers));
    put_u32(out, static_cast<std::uint32_t>(cfg.source_dim));
    put_u32(out, static_cast<std::uint32_t>(cfg.pooling));
    put_u32(out, cfg.tie_event_encoders ? 1U : 0U);
    put_u64(out, p.size());
    for (Eigen::Index i = 0; i < p.values().size(); ++i) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(p.values()(i))));
    }
    return out;
}

CimParameters decode_checkpoint(std::string_view bytes) {
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (bytes.size() - pos < n) throw FormatError(fmt::format("CIM1: truncated at byte {}", pos));
    };
    auto u32 = [&] {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 4;
        return v;
    };
    need(4);
    if (bytes.substr(0, 4) != "CIM1") throw FormatError("CIM1: magic mismatch");
    pos = 4;
    if (const auto version = u32(); version != kCheckpointVersion) {
        throw FormatError(fmt::format("CIM1: unsupported version {}", version));
    }
    ModelConfig cfg;
    const auto variant = u32();
    if (variant > static_cast<std::uint32_t>(Variant::kWindowTagger)) throw FormatError("CIM1: bad variant");
    cfg.variant = static_cast<Variant>(variant);
    cfg.input_dim = u32();
    cfg.hidden = u32();
    cfg.layers = u32();
    cfg.source_dim = u32();
    const auto pooling = u32();
    if (pooling > 1) throw FormatError("CIM1: bad pooling");
    cfg.pooling = static_cast<Pooling>(pooling);
    cfg.tie_event_encoders = u32() != 0;
    const std::uint64_t count = static_cast<std::uint64_t>(u32()) | (static_cast<std::uint64_t>(u32()) << 32);
    CimParameters p(cfg);
    if (count != p.size()) {
        throw FormatError(fmt::format("CIM1: {} values stored, configuration needs {}", count, p.size()));
    }
    need(4 * count);
    for (std::uint64_t i = 0; i < count; ++i) {
        p.values()(static_cast<Eigen::Index>(i)) = std::bit_cast<float>(u32());
    }
    if (pos != bytes.size()) throw FormatError("CIM1: trailing bytes");
    return p;
}

void save_checkpoint(const CimParameters& p, const std::filesystem::path& path) {
    const std::string bytes = encode_checkpoint(p);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInputError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

CimParameters load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace ibias
