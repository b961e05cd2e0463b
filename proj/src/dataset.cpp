#include "ibias/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "ibias/error.hpp"

namespace ibias {

Eigen::MatrixXd Dataset::window_matrix(const WindowItem& w) const {
    const Eigen::MatrixXd& doc = docs[w.doc];
    Eigen::MatrixXd m(doc.rows(), static_cast<Eigen::Index>(w.sequence.positions.size()));
    for (std::size_t p = 0; p < w.sequence.positions.size(); ++p) {
        m.col(static_cast<Eigen::Index>(p)) = doc.col(static_cast<Eigen::Index>(w.sequence.positions[p].sentence));
    }
    return m;
}

Dataset build_dataset(const Corpus& c, const EmbeddingTable& table, const std::vector<std::string>& sentence_ids,
                      const DatasetOptions& opts) {
    Dataset ds;
    ds.dim = table.dim();
    std::set<std::string> missing;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> doc_of;

    auto doc_index = [&](std::size_t story, std::size_t article) {
        const auto key = std::make_pair(story, article);
        if (const auto it = doc_of.find(key); it != doc_of.end()) return it->second;
        const ArticleRecord& a = c.stories()[story].articles[article];
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(table.dim()),
                                                  static_cast<Eigen::Index>(a.sentences.size()));
        for (std::size_t k = 0; k < a.sentences.size(); ++k) {
            const auto vec = table.find(a.sentences[k].id);
            if (vec.empty()) {
                missing.insert(a.sentences[k].id);
                continue;
            }
            for (std::size_t r = 0; r < vec.size(); ++r) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = static_cast<double>(vec[r]);
            }
        }
        const std::size_t idx = ds.docs.size();
        ds.docs.push_back(std::move(m));
        ds.doc_refs.push_back(fmt::format("{}/{}", a.story_id, to_string(a.source)));
        doc_of.emplace(key, idx);
        return idx;
    };

    std::vector<SentenceLocation> locs;
    locs.reserve(sentence_ids.size());
    std::unordered_set<std::string> requested;
    for (const std::string& id : sentence_ids) {
        const auto loc = c.locate(id);
        if (!loc) throw ValidationError("dataset: sentence id '" + id + "' is not in the corpus");
        if (!requested.insert(id).second) throw ValidationError("dataset: duplicate sentence id '" + id + "'");
        locs.push_back(*loc);
    }

    if (opts.variant == Variant::kWindowTagger) {
        std::vector<std::pair<std::size_t, std::size_t>> articles;
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const SentenceLocation& loc : locs) {
            if (seen.insert({loc.story, loc.article}).second) articles.emplace_back(loc.story, loc.article);
        }
        for (const auto& [story, article] : articles) {
            const ArticleRecord& a = c.stories()[story].articles[article];
            const std::size_t doc = doc_index(story, article);
            std::vector<std::size_t> group;
            for (WindowSequence& seq : segment_article(a.sentences.size(), opts.window, ds.doc_refs[doc])) {
                WindowItem w;
                w.doc = doc;
                for (const WindowPosition& pos : seq.positions) {
                    const SentenceRecord& s = a.sentences[pos.sentence];
                    w.ids.push_back(s.id);
                    w.gold.push_back(sentence_label(s));
                    w.scored.push_back(!pos.is_bookend && requested.contains(s.id) ? 1 : 0);
                }
                w.sequence = std::move(seq);
                group.push_back(ds.windows.size());
                ds.windows.push_back(std::move(w));
            }
            ds.article_windows.push_back(std::move(group));
        }
    } else {
        const ModelConfig probe{.variant = opts.variant};
        for (std::size_t i = 0; i < locs.size(); ++i) {
            const SentenceLocation& loc = locs[i];
            const ArticleRecord& a = c.article_of(loc);
            CimItem item;
            item.id = sentence_ids[i];
            item.target_doc = doc_index(loc.story, loc.article);
            item.target_pos = loc.sentence;
            item.source = a.source;
            item.gold = sentence_label(c.at(loc));
            if (probe.num_docs() == 1) {
                item.context_docs[0] = item.target_doc;
                item.num_contexts = 1;
            } else if (probe.num_docs() == 3) {
                for (std::size_t slot = 0; slot < 3; ++slot) item.context_docs[slot] = doc_index(loc.story, slot);
                item.num_contexts = 3;
            }
            ds.items.push_back(std::move(item));
        }
    }

    if (!missing.empty()) {
        std::string list;
        std::size_t shown = 0;
        for (const std::string& id : missing) {
            if (shown++ == 20) {
                list += fmt::format(", ... ({} more)", missing.size() - 20);
                break;
            }
            list += (list.empty() ? "" : ", ") + id;
        }
        throw MissingInputError(fmt::format("{} sentence(s) have no embedding: {}", missing.size(), list));
    }
    return ds;
}

}  // namespace ibias
