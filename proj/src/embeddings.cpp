#include "ibias/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <regex>

#include <fmt/format.h>

#include "ibias/digest.hpp"
#include "ibias/error.hpp"

namespace ibias {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw ValidationError("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string id, std::span<const float> vec) {
    if (vec.size() != dim_) {
        throw ValidationError(fmt::format("embedding '{}' has length {}, table dim is {}", id, vec.size(), dim_));
    }
    for (float v : vec) {
        if (!std::isfinite(v)) throw ValidationError(fmt::format("embedding '{}' has a non-finite value", id));
    }
    if (index_.contains(id)) throw ValidationError(fmt::format("duplicate embedding id '{}'", id));
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), vec.begin(), vec.end());
}

std::span<const float> EmbeddingTable::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return {};
    return row(it->second);
}

bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    if (a.dim_ != b.dim_ || a.ids_ != b.ids_ || a.fold_tag != b.fold_tag || a.encoder_tag != b.encoder_tag) {
        return false;
    }
    // Bitwise, so -0.0f and 0.0f are distinguished.
    return a.data_.size() == b.data_.size() &&
           std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0;
}

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>(u & 0xFF));
        u = static_cast<U>(u >> 8);
    }
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get_le(const char* what) {
        need(sizeof(T), what);
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }

    std::string_view take(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            throw FormatError(fmt::format("EMB1: truncated {} at byte {} (need {}, have {})", what, pos_, n,
                                          remaining()));
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string encode_emb1(const EmbeddingTable& t) {
    std::string out = "EMB1";
    out.reserve(12 + t.size() * (2 + 16 + 4 * t.dim()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dim()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string& id = t.ids()[i];
        if (id.size() > UINT16_MAX) throw ValidationError("EMB1: id longer than 65535 bytes: " + id.substr(0, 32));
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
        out += id;
        for (float v : t.row(i)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

EmbeddingTable decode_emb1(std::string_view bytes) {
    Reader r(bytes);
    if (r.take(4, "magic") != "EMB1") throw FormatError("EMB1: magic mismatch");
    const auto dim = r.get_le<std::uint32_t>("dim");
    const auto count = r.get_le<std::uint32_t>("count");
    if (dim == 0) throw FormatError("EMB1: dim is zero");
    EmbeddingTable t(dim);
    std::vector<float> vec(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = r.get_le<std::uint16_t>("id length");
        std::string id(r.take(len, "id"));
        if (r.remaining() < std::size_t{4} * dim) {
            throw FormatError(fmt::format("EMB1: truncated record {} ('{}'): declared dim {} needs {} bytes, {} left",
                                          i, id, dim, std::size_t{4} * dim, r.remaining()));
        }
        for (std::uint32_t k = 0; k < dim; ++k) {
            vec[k] = std::bit_cast<float>(r.get_le<std::uint32_t>("vector"));
            if (!std::isfinite(vec[k])) {
                throw FormatError(fmt::format("EMB1: non-finite value in record {} ('{}') component {}", i, id, k));
            }
        }
        try {
            t.add(std::move(id), vec);
        } catch (const ValidationError& e) {
            throw FormatError(std::string("EMB1: ") + e.what());
        }
    }
    if (r.remaining() != 0) {
        throw FormatError(fmt::format("EMB1: {} trailing byte(s) after {} declared records", r.remaining(), count));
    }
    return t;
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
    EmbeddingTable t = decode_emb1(read_file(path));
    t.fold_tag = fold_from_filename(path);
    std::filesystem::path tag = path;
    tag += ".tag";
    if (std::filesystem::exists(tag)) t.encoder_tag = read_file(tag);
    return t;
}

void write_embeddings(const EmbeddingTable& t, const std::filesystem::path& path) {
    const std::string bytes = encode_emb1(t);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInputError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    std::filesystem::path tag = path;
    tag += ".tag";
    if (!t.encoder_tag.empty()) {
        std::ofstream tout(tag, std::ios::binary);
        tout << t.encoder_tag;
    }
}

std::string fold_embedding_filename(std::size_t fold) { return fmt::format("emb.fold{}.emb1", fold); }

std::optional<std::size_t> fold_from_filename(const std::filesystem::path& path) {
    static const std::regex kPattern(R"(emb\.fold(\d+)\.emb1)");
    std::smatch m;
    const std::string name = path.filename().string();
    if (!std::regex_match(name, m, kPattern)) return std::nullopt;
    return std::stoul(m[1].str());
}

std::vector<std::string> coverage_check(const EmbeddingTable& t, const Corpus& c) {
    std::vector<std::string> missing;
    for (const std::string& id : c.sentence_ids()) {
        if (!t.contains(id)) missing.push_back(id);
    }
    std::sort(missing.begin(), missing.end());
    return missing;
}

void export_tsv(const EmbeddingTable& t, std::ostream& out) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << t.ids()[i] << '\t';
        const auto row = t.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << ' ';
            out << fmt::format("{:.9g}", row[k]);
        }
        out << '\n';
    }
}

}  // namespace ibias
