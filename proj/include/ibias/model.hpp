#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ibias/corpus.hpp"

namespace ibias {

/// Which context the classifier sees besides the target sentence.
enum class Variant {
    kTargetOnly,   // target sentence alone (linear baseline)
    kArtCim,       // + BiLSTM encoding of the target's article
    kArtCimStar,   // + learned news-source embedding
    kEvCim,        // + BiLSTM encodings of all three articles of the event (FOX, NYT, HPO slots)
    kEvCimStar,    // + learned news-source embedding
    kWindowTagger  // BiLSTM tagger over a window of sentences, one label per position
};

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

/// How a document's BiLSTM outputs become one context vector.
enum class Pooling {
    kFinalStates,  // last forward state || last backward state (the backward pass ends at position 0)
    kMean          // time-average of the top-layer outputs
};

std::string_view to_string(Pooling p);
std::optional<Pooling> parse_pooling(std::string_view s);

inline constexpr std::size_t kNumClasses = 2;

struct ModelConfig {
    Variant variant = Variant::kEvCim;
    std::size_t input_dim = 768;
    std::size_t hidden = 1200;
    std::size_t layers = 2;
    std::size_t source_dim = 8;
    Pooling pooling = Pooling::kFinalStates;
    /// EvCIM only: share one BiLSTM across the three document slots.
    bool tie_event_encoders = false;

    /// Context documents fed to the classifier: 0, 1 (article) or 3 (event).
    std::size_t num_docs() const;
    /// Distinct BiLSTM parameter sets.
    std::size_t num_encoders() const;
    bool uses_source() const;
    /// d + num_docs * 2H (+ source_dim); 2H for the window tagger.
    std::size_t classifier_width() const;
    /// Throws ValidationError when a dimension is zero.
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Named slice of the flat parameter vector. Matrices are column-major.
struct TensorInfo {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;

    std::size_t size() const { return rows * cols; }
};

/// Offsets of every tensor in declaration order: for each encoder, layer and
/// direction (forward, backward) the input matrix (4H x in), the recurrent
/// matrix (4H x H) and the bias (4H); then the source table (source_dim x 3)
/// for star variants; then the classifier weight (2 x width) and bias (2).
class ParamLayout {
public:
    explicit ParamLayout(const ModelConfig& cfg);

    std::size_t total() const { return total_; }
    std::size_t layers() const { return layers_; }
    const std::vector<TensorInfo>& tensors() const { return tensors_; }

    /// Index into tensors() of the first of three tensors (w_ih, w_hh, bias).
    std::size_t cell(std::size_t encoder, std::size_t layer, std::size_t direction) const;
    std::optional<std::size_t> source_table() const { return source_; }
    std::size_t classifier_weight() const { return clf_w_; }
    std::size_t classifier_bias() const { return clf_w_ + 1; }
    /// Flat index range [begin, end) of the classifier parameters.
    std::pair<std::size_t, std::size_t> classifier_range() const;

    /// Name of the tensor containing flat index i, with the in-tensor position.
    std::string describe(std::size_t flat_index) const;

private:
    std::vector<TensorInfo> tensors_;
    std::vector<std::size_t> cells_;
    std::size_t layers_ = 0;
    std::optional<std::size_t> source_;
    std::size_t clf_w_ = 0;
    std::size_t total_ = 0;
};

/// All trainable weights in one flat 64-bit vector, laid out by ParamLayout.
class CimParameters {
public:
    explicit CimParameters(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    const ParamLayout& layout() const { return layout_; }
    Eigen::VectorXd& values() { return values_; }
    const Eigen::VectorXd& values() const { return values_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

    Eigen::Map<const Eigen::MatrixXd> tensor(std::size_t index) const;
    Eigen::Map<Eigen::MatrixXd> tensor(std::size_t index);

    friend bool operator==(const CimParameters& a, const CimParameters& b) {
        return a.cfg_ == b.cfg_ && a.values_ == b.values_;
    }

private:
    ModelConfig cfg_;
    ParamLayout layout_;
    Eigen::VectorXd values_;
};

/// Recurrent matrices get orthogonal gate blocks, input matrices are uniform in
/// +-sqrt(1/H), the classifier weight is uniform in +-sqrt(1/width), the source
/// table is uniform in +-sqrt(1/source_dim), and all biases are zero.
CimParameters init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Pooled context vector (length 2H) of a document (d x T, T >= 1) under the
/// BiLSTM at `encoder`. Throws ValidationError on empty or mis-sized input.
Eigen::VectorXd encode_document(const CimParameters& p, std::size_t encoder, const Eigen::MatrixXd& doc);

/// Class probabilities (neutral, biased) for one target sentence.
/// `contexts` must hold num_docs() documents; `source` must be given iff the
/// variant uses the source feature.
Eigen::Vector2d forward(const CimParameters& p, const Eigen::VectorXd& target,
                        std::span<const Eigen::MatrixXd> contexts, std::optional<Source> source = std::nullopt);

/// Per-position class probabilities (2 x T) for a window of sentence vectors (d x T).
Eigen::MatrixXd tag_window(const CimParameters& p, const Eigen::MatrixXd& seq);

/// Biased wins ties.
Label argmax_label(const Eigen::Vector2d& probs);

/// Numerically stable two-way softmax.
Eigen::Vector2d softmax(const Eigen::Vector2d& logits);

/// Checkpoint file (CIM1): magic, u32 version, u32 config fields, u64 count,
/// then little-endian f32 values in layout order.
void save_checkpoint(const CimParameters& p, const std::filesystem::path& path);
CimParameters load_checkpoint(const std::filesystem::path& path);
std::string encode_checkpoint(const CimParameters& p);
CimParameters decode_checkpoint(std::string_view bytes);

}  // namespace ibias
