#include "ibias/prediction.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ibias/digest.hpp"
#include "ibias/error.hpp"

namespace ibias {

using nlohmann::json;

std::string to_jsonl(const PredictionSet& p) {
    std::string out;
    for (const Prediction& it : p.items) {
        json j = {{"id", it.id},
                  {"p_biased", it.p_biased},
                  {"pred", static_cast<int>(it.pred)},
                  {"gold", static_cast<int>(it.gold)},
                  {"variant", p.variant},
                  {"fold", p.fold},
                  {"seed", p.seed}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

namespace {

Label label_from(const json& j, const char* key, std::size_t line) {
    const int v = j.at(key).get<int>();
    if (v != 0 && v != 1) {
        throw ValidationError("predictions line " + std::to_string(line) + ": " + key + " must be 0 or 1");
    }
    return v == 1 ? Label::kBiased : Label::kNeutral;
}

}  // namespace

PredictionSet from_jsonl(std::string_view text) {
    PredictionSet p;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            Prediction it;
            it.id = j.at("id").get<std::string>();
            it.p_biased = j.at("p_biased").get<double>();
            it.pred = label_from(j, "pred", lineno);
            it.gold = label_from(j, "gold", lineno);
            const auto variant = j.at("variant").get<std::string>();
            const auto fold = j.at("fold").get<long>();
            const auto seed = j.at("seed").get<std::uint64_t>();
            if (first) {
                p.variant = variant;
                p.fold = fold;
                p.seed = seed;
                first = false;
            } else if (variant != p.variant || fold != p.fold || seed != p.seed) {
                throw ValidationError("predictions line " + std::to_string(lineno) + ": run metadata differs");
            }
            if (!(it.p_biased >= 0.0 && it.p_biased <= 1.0)) {
                throw ValidationError("predictions line " + std::to_string(lineno) + ": p_biased outside [0,1]");
            }
            p.items.push_back(std::move(it));
        } catch (const json::exception& e) {
            throw FormatError("predictions line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return p;
}

void write_predictions(const PredictionSet& p, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInputError("cannot write " + path.string());
    out << to_jsonl(p);
}

PredictionSet read_predictions(const std::filesystem::path& path) { return from_jsonl(read_file(path)); }

PredictionSet pool_predictions(const std::vector<PredictionSet>& parts) {
    PredictionSet out;
    out.fold = -1;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const PredictionSet& part = parts[i];
        if (i == 0) {
            out.variant = part.variant;
            out.seed = part.seed;
        } else if (part.variant != out.variant || part.seed != out.seed) {
            throw ValidationError("pool_predictions: parts come from different runs");
        }
        for (const Prediction& it : part.items) {
            if (!seen.insert(it.id).second) throw ValidationError("pool_predictions: duplicate id " + it.id);
            out.items.push_back(it);
        }
    }
    std::sort(out.items.begin(), out.items.end(), [](const Prediction& a, const Prediction& b) { return a.id < b.id; });
    return out;
}

}  // namespace ibias
