#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "ibias/error.hpp"
#include "ibias/model.hpp"
#include "ibias/rng.hpp"
#include "lstm.hpp"
#include "model_internal.hpp"

using namespace ibias;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar reference LSTM direction; returns H x T hidden states in time order.
MatrixXd ref_direction(const MatrixXd& w_ih, const MatrixXd& w_hh, const MatrixXd& b, const MatrixXd& x,
                       bool reverse) {
    const long h = w_hh.cols();
    const long steps = x.cols();
    MatrixXd out(h, steps);
    std::vector<double> hp(h, 0.0), cp(h, 0.0);
    for (long k = 0; k < steps; ++k) {
        const long t = reverse ? steps - 1 - k : k;
        std::vector<double> a(4 * h);
        for (long r = 0; r < 4 * h; ++r) {
            double s = b(r, 0);
            for (long c = 0; c < x.rows(); ++c) s += w_ih(r, c) * x(c, t);
            for (long c = 0; c < h; ++c) s += w_hh(r, c) * hp[c];
            a[r] = s;
        }
        for (long j = 0; j < h; ++j) {
            const double i = sigmoid(a[j]);
            const double f = sigmoid(a[h + j]);
            const double g = std::tanh(a[2 * h + j]);
            const double o = sigmoid(a[3 * h + j]);
            cp[j] = f * cp[j] + i * g;
            hp[j] = o * std::tanh(cp[j]);
            out(j, t) = hp[j];
        }
    }
    return out;
}

MatrixXd ref_bilstm(const CimParameters& p, std::size_t encoder, const MatrixXd& x) {
    const ParamLayout& l = p.layout();
    MatrixXd in = x;
    for (std::size_t layer = 0; layer < p.config().layers; ++layer) {
        MatrixXd out(2 * p.config().hidden, x.cols());
        for (std::size_t dir = 0; dir < 2; ++dir) {
            const std::size_t c = l.cell(encoder, layer, dir);
            const MatrixXd hs = ref_direction(p.tensor(c), p.tensor(c + 1), p.tensor(c + 2), in, dir == 1);
            out.block(dir * p.config().hidden, 0, p.config().hidden, x.cols()) = hs;
        }
        in = out;
    }
    return in;
}

VectorXd ref_pool(const CimParameters& p, const MatrixXd& top) {
    const long h = static_cast<long>(p.config().hidden);
    VectorXd v(2 * h);
    if (p.config().pooling == Pooling::kMean) return top.rowwise().mean();
    v.head(h) = top.col(top.cols() - 1).head(h);
    v.tail(h) = top.col(0).tail(h);
    return v;
}

MatrixXd random_matrix(long r, long c, Rng& rng) {
    MatrixXd m(r, c);
    for (long j = 0; j < c; ++j)
        for (long i = 0; i < r; ++i) m(i, j) = rng.normal();
    return m;
}

void randomize(CimParameters& p, Rng& rng, double scale = 0.5) {
    for (long i = 0; i < p.values().size(); ++i) p.values()[i] = scale * rng.normal();
}

ModelConfig small(Variant v, std::size_t d = 5, std::size_t h = 3, std::size_t layers = 2) {
    ModelConfig c;
    c.variant = v;
    c.input_dim = d;
    c.hidden = h;
    c.layers = layers;
    c.source_dim = 4;
    return c;
}

}  // namespace

TEST_CASE("classifier widths") {
    ModelConfig c = small(Variant::kEvCim, 8, 6, 2);
    CHECK(c.classifier_width() == 44);
    c.input_dim = 768;
    c.hidden = 1200;
    CHECK(c.classifier_width() == 7968);
    CHECK(small(Variant::kTargetOnly, 8, 6).classifier_width() == 8);
    CHECK(small(Variant::kArtCim, 8, 6).classifier_width() == 20);
    CHECK(small(Variant::kArtCimStar, 8, 6).classifier_width() == 24);
    CHECK(small(Variant::kEvCimStar, 8, 6).classifier_width() == 48);
    CHECK(small(Variant::kWindowTagger, 8, 6).classifier_width() == 12);
}

TEST_CASE("parameter counts") {
    const std::size_t d = 5, h = 3;
    const std::size_t layer0 = 4 * h * d + 4 * h * h + 4 * h;
    const std::size_t layer1 = 4 * h * 2 * h + 4 * h * h + 4 * h;
    const std::size_t encoder = 2 * (layer0 + layer1);
    CHECK(ParamLayout(small(Variant::kTargetOnly)).total() == 2 * d + 2);
    CHECK(ParamLayout(small(Variant::kArtCim)).total() == encoder + 2 * (d + 2 * h) + 2);
    CHECK(ParamLayout(small(Variant::kEvCim)).total() == 3 * encoder + 2 * (d + 6 * h) + 2);
    ModelConfig tied = small(Variant::kEvCim);
    tied.tie_event_encoders = true;
    CHECK(ParamLayout(tied).total() == encoder + 2 * (d + 6 * h) + 2);
    CHECK(ParamLayout(small(Variant::kEvCimStar)).total() == 3 * encoder + 4 * 3 + 2 * (d + 6 * h + 4) + 2);
    CHECK(ParamLayout(small(Variant::kWindowTagger)).total() == encoder + 2 * 2 * h + 2);

    const ParamLayout l(small(Variant::kArtCim));
    std::size_t offset = 0;
    for (const TensorInfo& t : l.tensors()) {
        CHECK(t.offset == offset);
        offset += t.size();
    }
    CHECK(offset == l.total());
    const auto [b, e] = l.classifier_range();
    CHECK(e == l.total());
    CHECK(e - b == 2 * (d + 2 * h) + 2);
}

TEST_CASE("config validation") {
    ModelConfig c = small(Variant::kEvCim);
    c.hidden = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK(parse_variant("evcim_star") == Variant::kEvCimStar);
    CHECK_FALSE(parse_variant("bogus"));
    for (Variant v : {Variant::kTargetOnly, Variant::kArtCim, Variant::kArtCimStar, Variant::kEvCim,
                      Variant::kEvCimStar, Variant::kWindowTagger}) {
        CHECK(parse_variant(to_string(v)) == v);
    }
}

TEST_CASE("initialization is deterministic and follows the declared ranges") {
    const ModelConfig cfg = small(Variant::kEvCimStar, 6, 4, 2);
    const CimParameters a = init_params(cfg, 11);
    CHECK(a == init_params(cfg, 11));
    CHECK_FALSE(a == init_params(cfg, 12));
    const ParamLayout& l = a.layout();
    const double h = 4;
    for (std::size_t e = 0; e < 3; ++e) {
        for (std::size_t layer = 0; layer < 2; ++layer) {
            for (std::size_t dir = 0; dir < 2; ++dir) {
                const std::size_t c = l.cell(e, layer, dir);
                CHECK(a.tensor(c).cwiseAbs().maxCoeff() <= std::sqrt(1.0 / h));
                CHECK(a.tensor(c + 2).isZero(0.0));
                const MatrixXd w_hh = a.tensor(c + 1);
                for (int g = 0; g < 4; ++g) {
                    const MatrixXd block = w_hh.block(g * 4, 0, 4, 4);
                    CHECK((block.transpose() * block - MatrixXd::Identity(4, 4)).norm() < 1e-12);
                }
            }
        }
    }
    const std::size_t clf = l.classifier_weight();
    CHECK(a.tensor(clf).cwiseAbs().maxCoeff() <= std::sqrt(1.0 / cfg.classifier_width()));
    CHECK(a.tensor(l.classifier_bias()).isZero(0.0));
    CHECK(a.tensor(*l.source_table()).cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 4));
}

TEST_CASE("hand-executed cell at H=1") {
    ModelConfig cfg = small(Variant::kArtCim, 2, 1, 1);
    CimParameters p(cfg);
    p.values().setZero();
    const ParamLayout& l = p.layout();
    Eigen::VectorXd x(2);
    x << 1.0, -1.0;
    MatrixXd doc = x;

    // All-zero weights: every gate is 0.5, the candidate is tanh(0) = 0, so h = 0.
    CHECK(encode_document(p, 0, doc).isZero(0.0));

    for (std::size_t dir = 0; dir < 2; ++dir) {
        const std::size_t c = l.cell(0, 0, dir);
        p.tensor(c) << 0.5, 0.2, 0.1, -0.3, 0.4, 0.4, -0.2, 0.6;
        p.tensor(c + 1) << 0.7, 0.7, 0.7, 0.7;
        p.tensor(c + 2) << 0.1, 0.0, -0.1, 0.2;
    }
    // a = W x + b = (0.4, 0.4, -0.1, -0.6); h_prev = c_prev = 0.
    const double c1 = sigmoid(0.4) * std::tanh(-0.1);
    const double h1 = sigmoid(-0.6) * std::tanh(c1);
    const VectorXd ctx = encode_document(p, 0, doc);
    REQUIRE(ctx.size() == 2);
    CHECK(ctx[0] == doctest::Approx(h1).epsilon(1e-15));
    CHECK(ctx[1] == doctest::Approx(h1).epsilon(1e-15));

    // Second step of the forward direction, with x2 = 0.
    MatrixXd doc2(2, 2);
    doc2.col(0) = x;
    doc2.col(1).setZero();
    const double a2i = 0.7 * h1 + 0.1, a2f = 0.7 * h1, a2g = 0.7 * h1 - 0.1, a2o = 0.7 * h1 + 0.2;
    const double c2 = sigmoid(a2f) * c1 + sigmoid(a2i) * std::tanh(a2g);
    const double h2 = sigmoid(a2o) * std::tanh(c2);
    CHECK(encode_document(p, 0, doc2)[0] == doctest::Approx(h2).epsilon(1e-15));
}

TEST_CASE("encoder matches the scalar reference") {
    Rng rng(3);
    for (Pooling pooling : {Pooling::kFinalStates, Pooling::kMean}) {
        for (std::size_t layers : {1u, 2u, 3u}) {
            ModelConfig cfg = small(Variant::kEvCim, 4, 3, layers);
            cfg.pooling = pooling;
            CimParameters p = init_params(cfg, 5);
            randomize(p, rng);
            for (long steps : {1, 2, 5}) {
                const MatrixXd doc = random_matrix(4, steps, rng);
                for (std::size_t e = 0; e < 3; ++e) {
                    const VectorXd got = encode_document(p, e, doc);
                    const VectorXd want = ref_pool(p, ref_bilstm(p, e, doc));
                    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-13);
                }
            }
        }
    }
}

TEST_CASE("tied directions make reversal swap the halves") {
    Rng rng(8);
    ModelConfig cfg = small(Variant::kArtCim, 4, 3, 1);
    CimParameters p = init_params(cfg, 1);
    randomize(p, rng);
    const ParamLayout& l = p.layout();
    const std::size_t f = l.cell(0, 0, 0);
    const std::size_t b = l.cell(0, 0, 1);
    for (std::size_t k = 0; k < 3; ++k) p.tensor(b + k) = p.tensor(f + k);

    const MatrixXd doc = random_matrix(4, 6, rng);
    const MatrixXd rev = doc.rowwise().reverse();
    const auto weights = detail::encoder_weights(p, 0);
    const MatrixXd out = lstm::infer(weights, doc);
    const MatrixXd out_rev = lstm::infer(weights, rev);
    for (long t = 0; t < 6; ++t) {
        CHECK((out_rev.col(t).head(3) - out.col(5 - t).tail(3)).cwiseAbs().maxCoeff() < 1e-14);
    }
    const VectorXd a = encode_document(p, 0, doc);
    const VectorXd r = encode_document(p, 0, rev);
    CHECK((r.head(3) - a.tail(3)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((r.tail(3) - a.head(3)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("forward recurrence is causal") {
    Rng rng(9);
    CimParameters p = init_params(small(Variant::kArtCim, 4, 3, 2), 2);
    randomize(p, rng);
    const MatrixXd two = random_matrix(4, 2, rng);
    const MatrixXd one = two.leftCols(1);
    const auto weights = detail::encoder_weights(p, 0);
    const auto a = lstm::forward(weights, one);
    const auto b = lstm::forward(weights, two);
    CHECK(a[0].fwd.hidden.col(0) == b[0].fwd.hidden.col(0));
    // Upper layers read the backward states of the layer below, so only layer 0 is causal.
    CHECK(a.back().fwd.hidden.col(0) != b.back().fwd.hidden.col(0));
    CHECK(lstm::infer(weights, one) == a.back().output);
}

TEST_CASE("forward probabilities") {
    Rng rng(4);
    ModelConfig cfg = small(Variant::kEvCim, 5, 3, 2);
    CimParameters zero(cfg);
    zero.values().setZero();
    const VectorXd target = random_matrix(5, 1, rng);
    const std::vector<MatrixXd> docs = {random_matrix(5, 3, rng), random_matrix(5, 1, rng), random_matrix(5, 4, rng)};
    const Eigen::Vector2d u = forward(zero, target, docs);
    CHECK(u[0] == 0.5);
    CHECK(u[1] == 0.5);

    CimParameters p = init_params(cfg, 3);
    randomize(p, rng);
    for (int trial = 0; trial < 50; ++trial) {
        const VectorXd t = random_matrix(5, 1, rng) * 3.0;
        const Eigen::Vector2d pr = forward(p, t, docs);
        CHECK(std::abs(pr.sum() - 1.0) < 1e-12);
        CHECK(pr.minCoeff() >= 0.0);
    }

    // Logits are a linear map of [target, ctx_fox, ctx_nyt, ctx_hpo].
    VectorXd in(5 + 18);
    in.head(5) = target;
    for (std::size_t s = 0; s < 3; ++s) in.segment(5 + 6 * s, 6) = encode_document(p, s, docs[s]);
    const Eigen::Vector2d logits =
        p.tensor(p.layout().classifier_weight()) * in + VectorXd(p.tensor(p.layout().classifier_bias()));
    const double z = std::exp(logits[0]) + std::exp(logits[1]);
    CHECK(forward(p, target, docs)[1] == doctest::Approx(std::exp(logits[1]) / z).epsilon(1e-12));

    const std::vector<MatrixXd> two(docs.begin(), docs.begin() + 2);
    CHECK_THROWS_AS(forward(p, target, two), ValidationError);
    CHECK_THROWS_AS(forward(p, random_matrix(4, 1, rng), docs), ValidationError);
    CHECK_THROWS_AS(encode_document(p, 0, MatrixXd(5, 0)), ValidationError);
    CHECK_THROWS_AS(encode_document(p, 0, random_matrix(3, 2, rng)), ValidationError);
}

TEST_CASE("source feature required iff star variant") {
    Rng rng(4);
    const VectorXd target = random_matrix(5, 1, rng);
    const std::vector<MatrixXd> art = {random_matrix(5, 3, rng)};
    const CimParameters star = init_params(small(Variant::kArtCimStar), 1);
    CHECK_THROWS_AS(forward(star, target, art), ValidationError);
    CHECK_NOTHROW(forward(star, target, art, Source::kNyt));
    CHECK(forward(star, target, art, Source::kNyt) != forward(star, target, art, Source::kFox));
    const CimParameters plain = init_params(small(Variant::kArtCim), 1);
    CHECK_THROWS_AS(forward(plain, target, art, Source::kNyt), ValidationError);
    const CimParameters base = init_params(small(Variant::kTargetOnly), 1);
    CHECK_NOTHROW(forward(base, target, {}));
}

TEST_CASE("argmax and softmax") {
    CHECK(argmax_label(Eigen::Vector2d(0.7, 0.3)) == Label::kNeutral);
    CHECK(argmax_label(Eigen::Vector2d(0.5, 0.5)) == Label::kBiased);
    CHECK(argmax_label(Eigen::Vector2d(0.2, 0.8)) == Label::kBiased);
    const Eigen::Vector2d s = softmax(Eigen::Vector2d(1000.0, 0.0));
    CHECK(s[0] == 1.0);
    CHECK(s[1] >= 0.0);
    CHECK(std::isfinite(s[1]));
    const Eigen::Vector2d t = softmax(Eigen::Vector2d(std::log(3.0), 0.0));
    CHECK(t[0] == doctest::Approx(0.75));
}

TEST_CASE("window tagger") {
    Rng rng(12);
    CimParameters p = init_params(small(Variant::kWindowTagger, 4, 3, 2), 6);
    randomize(p, rng);
    const MatrixXd one = random_matrix(4, 1, rng);
    CHECK(tag_window(p, one).cols() == 1);
    const MatrixXd seq = random_matrix(4, 5, rng);
    const MatrixXd out = tag_window(p, seq);
    REQUIRE(out.rows() == 2);
    REQUIRE(out.cols() == 5);
    for (long t = 0; t < 5; ++t) CHECK(std::abs(out.col(t).sum() - 1.0) < 1e-12);

    MatrixXd perm = seq;
    perm.col(0).swap(perm.col(4));
    const MatrixXd out_perm = tag_window(p, perm);
    // Same sentence, different position: the output must change with order.
    CHECK(std::abs(out_perm(1, 4) - out(1, 0)) > 1e-9);
    CHECK(std::abs(out_perm(1, 2) - out(1, 2)) > 1e-9);
}

TEST_CASE("checkpoint round trip") {
    const auto dir = test::temp_dir("checkpoint");
    ModelConfig cfg = small(Variant::kEvCimStar, 5, 3, 2);
    cfg.pooling = Pooling::kMean;
    cfg.tie_event_encoders = true;
    const CimParameters p = init_params(cfg, 2);
    save_checkpoint(p, dir / "p.cim1");
    const CimParameters q = load_checkpoint(dir / "p.cim1");
    CHECK(q.config() == cfg);
    CHECK(q.values() == p.values().cast<float>().cast<double>());
    CHECK(encode_checkpoint(q) == encode_checkpoint(p));

    std::string bytes = encode_checkpoint(p);
    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 1)), FormatError);
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bytes), FormatError);
    CHECK_THROWS_AS(load_checkpoint(dir / "none.cim1"), MissingInputError);
}
