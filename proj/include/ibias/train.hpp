#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ibias/dataset.hpp"
#include "ibias/model.hpp"
#include "ibias/prediction.hpp"

namespace ibias {

class Rng;

struct TrainConfig {
    std::size_t epochs = 150;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    // Adam moments.
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    /// Loss weight of biased examples (neutral weight is 1).
    double positive_weight = 1.0;
    /// Inverted dropout on the classifier input during training.
    double dropout = 0.0;
    /// Global gradient-norm clip; 0 disables.
    double clip_norm = 0.0;
    /// Keep the epoch with the best dev F1 (biased class); otherwise the last epoch.
    bool select_on_dev = true;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> dev_f1;
};

struct TrainResult {
    CimParameters params;
    std::vector<EpochRecord> history;
    /// 1-based epoch whose parameters were kept; 0 when no epoch ran.
    std::size_t best_epoch = 0;
};

struct LossOptions {
    double positive_weight = 1.0;
    double dropout = 0.0;
    Rng* dropout_rng = nullptr;
};

/// Mean weighted cross-entropy over the given units (items, or scored window
/// positions for the tagger). When `grad` is non-null it is resized to the
/// parameter count and receives the exact gradient.
double batch_loss(const CimParameters& p, const Dataset& ds, std::span<const std::size_t> units,
                  Eigen::VectorXd* grad, const LossOptions& opts = {});

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on mean cross-entropy with seeded shuffling. Throws ValidationError on
/// an empty training set and NumericalError when the loss becomes non-finite.
TrainResult train(const Dataset& train_set, const Dataset& dev_set, const ModelConfig& cfg, const TrainConfig& tcfg,
                  const EpochCallback& on_epoch = {});

/// Predictions for every item (or every scored window position). Labels are
/// the argmax with ties going to biased.
PredictionSet predict(const CimParameters& p, const Dataset& ds);

struct GradCheckOptions {
    std::uint64_t seed = 7;
    /// Only compare classifier parameters (the BiLSTMs are still evaluated).
    bool classifier_only = false;
    std::size_t batch = 4;
    /// Lower bound of the relative-error denominator.
    double floor = 1e-6;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    std::string worst_name;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

/// Compares the analytic gradient with central differences
/// (L(theta + eps) - L(theta - eps)) / (2 eps) on a random problem.
GradCheckReport grad_check(const ModelConfig& cfg, double eps, const GradCheckOptions& opts = {});

nlohmann::json to_json(const TrainConfig& t);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
nlohmann::json to_json(const ModelConfig& m);
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});
nlohmann::json to_json(const std::vector<EpochRecord>& history);

}  // namespace ibias
