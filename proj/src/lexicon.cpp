#include "ibias/lexicon.hpp"

#include <sstream>

#include <spdlog/spdlog.h>

#include "ibias/digest.hpp"
#include "ibias/text.hpp"

namespace ibias {

const LexiconEntry* SubjectivityLexicon::find(std::string_view word) const {
    const auto it = entries.find(std::string(word));
    return it == entries.end() ? nullptr : &it->second;
}

SubjectivityLexicon parse_mpqa_lexicon(std::string_view text) {
    SubjectivityLexicon lex;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::word_tokens(line).empty()) continue;
        std::istringstream fields(line);
        std::string field;
        std::string type;
        std::string word;
        std::string stemmed;
        bool malformed = false;
        while (fields >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos || eq == 0) {
                malformed = true;
                break;
            }
            const std::string key = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (key == "type") {
                type = value;
            } else if (key == "word1") {
                word = value;
            } else if (key == "stemmed1") {
                stemmed = value;
            }
        }
        if (malformed || word.empty() || (type != "strongsubj" && type != "weaksubj")) {
            ++lex.skipped;
            spdlog::warn("lexicon line {}: malformed clue, skipped", lineno);
            continue;
        }
        const LexiconEntry entry{type == "strongsubj" ? Strength::kStrong : Strength::kWeak, stemmed == "y"};
        auto [it, inserted] = lex.entries.emplace(text::ascii_lower(word), entry);
        if (!inserted && entry.strength == Strength::kStrong && it->second.strength == Strength::kWeak) {
            it->second = entry;
        }
    }
    if (lex.entries.empty()) spdlog::warn("lexicon: no clues loaded");
    if (lex.skipped > 0) spdlog::warn("lexicon: skipped {} malformed line(s)", lex.skipped);
    return lex;
}

SubjectivityLexicon load_mpqa_lexicon(const std::filesystem::path& path) {
    return parse_mpqa_lexicon(read_file(path));
}

bool has_strong_subjective_clue(const SentenceRecord& s, const SubjectivityLexicon& lex) {
    for (const std::string& tok : text::word_tokens(s.text)) {
        const LexiconEntry* e = lex.find(text::ascii_lower(tok));
        if (e != nullptr && e->strength == Strength::kStrong) return true;
    }
    return false;
}

}  // namespace ibias
