#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "storylens/corpus.hpp"
#include "storylens/pov.hpp"
#include "storylens/report.hpp"

namespace storylens {

enum class AttributeSource { dependency, inference };

std::string_view to_string(AttributeSource s);
std::optional<AttributeSource> attribute_source_from_string(std::string_view s);

// Multiset of lowercase single-word attribute tokens for one story and one
// extraction source. Duplicates are kept as weights.
struct AttributeSet {
    std::string story_id;
    AttributeSource source = AttributeSource::dependency;
    std::map<std::string, std::size_t> tokens;  // surface -> multiplicity

    void add(std::string_view surface, std::size_t weight = 1);
    std::size_t total_weight() const;
    bool empty() const { return tokens.empty(); }
};

// The fixed English stop-word list (127 words), also shipped as a data file;
// load_stopwords reads that file format (one word per line, '#' comments).
const std::set<std::string>& builtin_stopwords();
std::set<std::string> load_stopwords(const std::string& path);

// One sentence of a dependency annotation. Token fields follow CoNLL-U
// (lemma, UPOS, 1-based head with 0 for root, deprel).
struct ParsedToken {
    std::string form;
    std::string lemma;
    std::string upos;
    std::size_t head = 0;
    std::string deprel;
};

struct ParsedSentence {
    std::string story_id;
    std::vector<ParsedToken> tokens;
};

// CoNLL-U keyed by story via a "# story_id = ..." comment per sentence.
// Sentences appear in story order; token offsets accumulate per story.
std::vector<ParsedSentence> load_conllu(const std::string& path, Report& report);

// Verbs whose subject or object lies in a protagonist mention, adjectives
// modifying or predicated of one. Copular verbs (be, seem, become) are
// excluded; their predicate adjectives are kept. Lemmas are lowercased and
// weighted by occurrence. Sentences whose token count drifts from the story
// tokenization are skipped with a counted warning.
AttributeSet extract_dependency_attributes(const Story& story, const Protagonist& protagonist,
                                           const std::vector<ParsedSentence>& sentences,
                                           Report& report);

// Inference phrases JSONL: {"story_id":..., "phrases":[...]}. Phrases are
// lowercased and split into content words; stop words drop out.
std::unordered_map<std::string, AttributeSet> load_inference_attributes(
    const std::string& path, const Corpus& corpus, const std::set<std::string>& stopwords,
    Report& report);

// Normalization used for a single phrase; exposed for tests.
std::vector<std::string> decompose_phrase(std::string_view phrase,
                                          const std::set<std::string>& stopwords);

}  // namespace storylens
