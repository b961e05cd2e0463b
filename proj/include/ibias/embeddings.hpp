#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ibias/corpus.hpp"

namespace ibias {

/// Sentence id -> fixed-dimension f32 vector, in insertion order.
///
/// On disk (EMB1, little-endian): magic "EMB1", u32 dim, u32 count, then
/// `count` records of [u16 id byte length, UTF-8 id, dim x f32]. The fold tag
/// is taken from the `emb.fold<k>.emb1` file-name convention; a non-empty
/// encoder tag lives in a `<file>.tag` sidecar so the binary layout stays fixed.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    /// Throws ValidationError on wrong length, non-finite value or duplicate id.
    void add(std::string id, std::span<const float> vec);

    bool contains(std::string_view id) const { return index_.contains(std::string(id)); }
    /// Empty span when absent.
    std::span<const float> find(std::string_view id) const;
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    const std::vector<std::string>& ids() const { return ids_; }

    std::optional<std::size_t> fold_tag;
    std::string encoder_tag;

    friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b);

private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Encodes a table in the EMB1 layout.
std::string encode_emb1(const EmbeddingTable& t);
/// Decodes EMB1 bytes. Throws FormatError on magic mismatch, truncation,
/// trailing bytes, duplicate ids or non-finite values.
EmbeddingTable decode_emb1(std::string_view bytes);

EmbeddingTable read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingTable& t, const std::filesystem::path& path);

/// Conventional per-fold file name: emb.fold<k>.emb1.
std::string fold_embedding_filename(std::size_t fold);
std::optional<std::size_t> fold_from_filename(const std::filesystem::path& path);

/// Corpus sentence ids with no vector in the table, sorted.
std::vector<std::string> coverage_check(const EmbeddingTable& t, const Corpus& c);

/// Debug export: one line per entry, `id<TAB>v1 v2 ...`.
void export_tsv(const EmbeddingTable& t, std::ostream& out);

}  // namespace ibias
