#include "lstm.hpp"

#include <cmath>

namespace ibias::lstm {

namespace {

inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void run_direction(const CellWeights& w, const Eigen::MatrixXd& x, bool reverse, DirectionCache& out) {
    const Eigen::Index hdim = w.w_hh.cols();
    const Eigen::Index steps = x.cols();
    // Input projections for all steps at once.
    Eigen::MatrixXd pre = w.w_ih * x;
    pre.colwise() += w.bias;
    out.gates.resize(4 * hdim, steps);
    out.cell.resize(hdim, steps);
    out.tanh_c.resize(hdim, steps);
    out.hidden.resize(hdim, steps);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(hdim);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(hdim);
    Eigen::VectorXd a(4 * hdim);
    for (Eigen::Index s = 0; s < steps; ++s) {
        const Eigen::Index t = reverse ? steps - 1 - s : s;
        a.noalias() = pre.col(t) + w.w_hh * h;
        auto gates = out.gates.col(t);
        for (Eigen::Index k = 0; k < hdim; ++k) {
            gates(k) = sigmoid(a(k));
            gates(hdim + k) = sigmoid(a(hdim + k));
            gates(2 * hdim + k) = std::tanh(a(2 * hdim + k));
            gates(3 * hdim + k) = sigmoid(a(3 * hdim + k));
        }
        c = gates.segment(hdim, hdim).cwiseProduct(c) +
            gates.segment(0, hdim).cwiseProduct(gates.segment(2 * hdim, hdim));
        out.cell.col(t) = c;
        out.tanh_c.col(t) = c.array().tanh().matrix();
        h = gates.segment(3 * hdim, hdim).cwiseProduct(out.tanh_c.col(t));
        out.hidden.col(t) = h;
    }
}

// Returns dLoss/dx for this direction and accumulates weight gradients.
Eigen::MatrixXd backprop_direction(const CellWeights& w, const Eigen::MatrixXd& x, const DirectionCache& cache,
                                   bool reverse, const Eigen::MatrixXd& d_hidden, CellGrads& g) {
    const Eigen::Index hdim = w.w_hh.cols();
    const Eigen::Index steps = x.cols();
    Eigen::MatrixXd d_pre(4 * hdim, steps);
    Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(hdim, steps);
    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(hdim);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(hdim);
    for (Eigen::Index s = steps - 1; s >= 0; --s) {
        const Eigen::Index t = reverse ? steps - 1 - s : s;
        const bool first = s == 0;
        const Eigen::Index tp = reverse ? t + 1 : t - 1;
        const auto gates = cache.gates.col(t);
        const auto i = gates.segment(0, hdim).array();
        const auto f = gates.segment(hdim, hdim).array();
        const auto gg = gates.segment(2 * hdim, hdim).array();
        const auto o = gates.segment(3 * hdim, hdim).array();
        const auto tc = cache.tanh_c.col(t).array();
        const Eigen::ArrayXd c_prev = first ? Eigen::ArrayXd::Zero(hdim) : cache.cell.col(tp).array().eval();
        if (!first) h_prev.col(t) = cache.hidden.col(tp);

        const Eigen::ArrayXd dh = d_hidden.col(t).array() + dh_next.array();
        const Eigen::ArrayXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
        auto da = d_pre.col(t);
        da.segment(0, hdim) = (dc * gg * i * (1.0 - i)).matrix();
        da.segment(hdim, hdim) = (dc * c_prev * f * (1.0 - f)).matrix();
        da.segment(2 * hdim, hdim) = (dc * i * (1.0 - gg.square())).matrix();
        da.segment(3 * hdim, hdim) = (dh * tc * o * (1.0 - o)).matrix();
        dc_next = (dc * f).matrix();
        dh_next.noalias() = w.w_hh.transpose() * da;
    }
    g.w_ih.noalias() += d_pre * x.transpose();
    g.w_hh.noalias() += d_pre * h_prev.transpose();
    g.bias += d_pre.rowwise().sum();
    return w.w_ih.transpose() * d_pre;
}

}  // namespace

std::vector<LayerCache> forward(const std::vector<LayerWeights>& weights, const Eigen::MatrixXd& x) {
    std::vector<LayerCache> caches(weights.size());
    const Eigen::MatrixXd* input = &x;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        LayerCache& lc = caches[l];
        lc.input = *input;
        run_direction(weights[l].fwd, lc.input, false, lc.fwd);
        run_direction(weights[l].bwd, lc.input, true, lc.bwd);
        const Eigen::Index hdim = lc.fwd.hidden.rows();
        lc.output.resize(2 * hdim, lc.input.cols());
        lc.output.topRows(hdim) = lc.fwd.hidden;
        lc.output.bottomRows(hdim) = lc.bwd.hidden;
        input = &lc.output;
    }
    return caches;
}

Eigen::MatrixXd infer(const std::vector<LayerWeights>& weights, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd current = x;
    DirectionCache fwd;
    DirectionCache bwd;
    for (const LayerWeights& lw : weights) {
        run_direction(lw.fwd, current, false, fwd);
        run_direction(lw.bwd, current, true, bwd);
        const Eigen::Index hdim = fwd.hidden.rows();
        Eigen::MatrixXd out(2 * hdim, current.cols());
        out.topRows(hdim) = fwd.hidden;
        out.bottomRows(hdim) = bwd.hidden;
        current = std::move(out);
    }
    return current;
}

Eigen::MatrixXd backward(const std::vector<LayerWeights>& weights, const std::vector<LayerCache>& caches,
                         const Eigen::MatrixXd& d_top, std::vector<LayerGrads>& grads) {
    Eigen::MatrixXd d_out = d_top;
    for (std::size_t l = weights.size(); l-- > 0;) {
        const LayerCache& lc = caches[l];
        const Eigen::Index hdim = lc.fwd.hidden.rows();
        Eigen::MatrixXd dx = backprop_direction(weights[l].fwd, lc.input, lc.fwd, false, d_out.topRows(hdim),
                                                grads[l].fwd);
        dx += backprop_direction(weights[l].bwd, lc.input, lc.bwd, true, d_out.bottomRows(hdim), grads[l].bwd);
        d_out = std::move(dx);
    }
    return d_out;
}

}  // namespace ibias::lstm
