#pragma once

// Stacked bidirectional LSTM with explicit backpropagation through time.
// Sequences are column-major: one column per time step.
//
// Cell (gate order i, f, g, o):
//   a   = W_ih x_t + W_hh h_{t-1} + b
//   c_t = sigmoid(a_f) * c_{t-1} + sigmoid(a_i) * tanh(a_g)
//   h_t = sigmoid(a_o) * tanh(c_t)

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace ibias::lstm {

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using MatMap = Eigen::Map<Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

struct CellWeights {
    ConstMatMap w_ih;  // 4H x in
    ConstMatMap w_hh;  // 4H x H
    ConstVecMap bias;  // 4H
};

struct CellGrads {
    MatMap w_ih;
    MatMap w_hh;
    VecMap bias;
};

struct DirectionCache {
    Eigen::MatrixXd gates;   // 4H x T, post-activation
    Eigen::MatrixXd cell;    // H x T
    Eigen::MatrixXd tanh_c;  // H x T
    Eigen::MatrixXd hidden;  // H x T
};

struct LayerCache {
    Eigen::MatrixXd input;   // in x T
    DirectionCache fwd;
    DirectionCache bwd;
    Eigen::MatrixXd output;  // 2H x T: [forward; backward]
};

/// Weights of one layer: [forward, backward].
struct LayerWeights {
    CellWeights fwd;
    CellWeights bwd;
};

struct LayerGrads {
    CellGrads fwd;
    CellGrads bwd;
};

/// Runs all layers; the last cache's `output` is the top-layer sequence.
std::vector<LayerCache> forward(const std::vector<LayerWeights>& weights, const Eigen::MatrixXd& x);

/// Top-layer output only, without keeping intermediate state for backprop.
Eigen::MatrixXd infer(const std::vector<LayerWeights>& weights, const Eigen::MatrixXd& x);

/// Accumulates parameter gradients given dLoss/d(top output) (2H x T).
/// Returns dLoss/dx for the bottom-layer input.
Eigen::MatrixXd backward(const std::vector<LayerWeights>& weights, const std::vector<LayerCache>& caches,
                         const Eigen::MatrixXd& d_top, std::vector<LayerGrads>& grads);

}  // namespace ibias::lstm
