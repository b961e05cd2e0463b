#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ibias/model.hpp"
#include "lstm.hpp"

namespace ibias::detail {

std::vector<lstm::LayerWeights> encoder_weights(const CimParameters& p, std::size_t encoder);

/// Gradient views into `grad`, which must follow the parameter layout.
std::vector<lstm::LayerGrads> encoder_grads(const ParamLayout& layout, Eigen::VectorXd& grad, std::size_t encoder);

/// Which BiLSTM parameter set encodes context slot `slot`.
std::size_t encoder_for_slot(const ModelConfig& cfg, std::size_t slot);

Eigen::VectorXd pool(Pooling pooling, const Eigen::MatrixXd& top);
/// dLoss/d(top output) given dLoss/d(pooled vector).
Eigen::MatrixXd unpool(Pooling pooling, const Eigen::VectorXd& d_ctx, Eigen::Index steps);

Eigen::Map<const Eigen::MatrixXd> tensor_view(const ParamLayout& layout, const Eigen::VectorXd& flat,
                                              std::size_t index);
Eigen::Map<Eigen::MatrixXd> tensor_view(const ParamLayout& layout, Eigen::VectorXd& flat, std::size_t index);

}  // namespace ibias::detail
