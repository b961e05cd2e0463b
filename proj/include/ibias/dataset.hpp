#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ibias/corpus.hpp"
#include "ibias/embeddings.hpp"
#include "ibias/model.hpp"
#include "ibias/windowing.hpp"

namespace ibias {

/// One target sentence for the CIM variants. Document indices refer to
/// Dataset::docs; context slots are in FOX, NYT, HPO order for EvCIM.
struct CimItem {
    std::string id;
    std::size_t target_doc = 0;
    std::size_t target_pos = 0;
    std::array<std::size_t, 3> context_docs{};
    std::size_t num_contexts = 0;
    Source source = Source::kFox;
    Label gold = Label::kNeutral;
};

/// One window of an article for the tagger. Book-end positions and sentences
/// outside the requested id set are carried for context but not scored.
struct WindowItem {
    std::size_t doc = 0;
    WindowSequence sequence;
    std::vector<std::string> ids;
    std::vector<Label> gold;
    std::vector<char> scored;
};

/// Model-ready view of part of a corpus: article matrices (d x sentences)
/// converted to 64-bit, plus the items to classify.
struct Dataset {
    std::size_t dim = 0;
    std::vector<Eigen::MatrixXd> docs;
    std::vector<std::string> doc_refs;
    std::vector<CimItem> items;
    std::vector<WindowItem> windows;
    /// Windows of each article, in article order (indices into `windows`).
    std::vector<std::vector<std::size_t>> article_windows;

    /// Number of training units (items, or windows for the tagger).
    std::size_t units(Variant v) const { return v == Variant::kWindowTagger ? windows.size() : items.size(); }
    Eigen::MatrixXd window_matrix(const WindowItem& w) const;
};

struct DatasetOptions {
    Variant variant = Variant::kEvCim;
    /// Core length for the window tagger.
    std::size_t window = 5;
};

/// Builds inputs for the sentences in `sentence_ids`. Context documents are
/// always whole articles. Throws MissingInputError listing every sentence
/// (items and context) without an embedding, and ValidationError for ids not
/// in the corpus.
Dataset build_dataset(const Corpus& c, const EmbeddingTable& table, const std::vector<std::string>& sentence_ids,
                      const DatasetOptions& opts);

}  // namespace ibias
