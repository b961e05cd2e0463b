#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>

#include "ibias/corpus.hpp"

namespace ibias {

enum class Strength { kStrong, kWeak };

struct LexiconEntry {
    Strength strength = Strength::kWeak;
    bool stemmed = false;
};

/// Subjectivity clues keyed by lowercase surface form.
struct SubjectivityLexicon {
    std::unordered_map<std::string, LexiconEntry> entries;
    /// Lines skipped as malformed while loading.
    std::size_t skipped = 0;

    std::size_t size() const { return entries.size(); }
    const LexiconEntry* find(std::string_view word) const;
};

/// Parses the MPQA clue format, one clue per line:
///   type=strongsubj len=1 word1=abuse pos1=verb stemmed1=y priorpolarity=negative
/// Lines without a valid type or word1 are skipped with a warning. A word listed
/// with both strengths is kept as strong.
SubjectivityLexicon parse_mpqa_lexicon(std::string_view text);
SubjectivityLexicon load_mpqa_lexicon(const std::filesystem::path& path);

/// True iff some lowercased word token of the sentence is a strong clue.
/// Stemmed clues match their surface form only.
bool has_strong_subjective_clue(const SentenceRecord& s, const SubjectivityLexicon& lex);

}  // namespace ibias
