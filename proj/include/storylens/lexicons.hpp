#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "storylens/report.hpp"

namespace storylens {

enum class Dimension { valence, arousal, dominance, power, appearance, intellect };

std::string_view to_string(Dimension d);
std::optional<Dimension> dimension_from_string(std::string_view s);
bool is_bipolar(Dimension d);  // valence, arousal, dominance, power

// Real-valued lexicon for one of valence/arousal/dominance; scores in [0,1].
struct ScoredLexicon {
    Dimension dimension = Dimension::valence;
    std::map<std::string, double> entries;

    std::optional<double> score(std::string_view term) const;
    std::size_t size() const { return entries.size(); }
};

struct VadLexicons {
    ScoredLexicon valence;
    ScoredLexicon arousal;
    ScoredLexicon dominance;

    const ScoredLexicon& get(Dimension d) const;
};

// Boolean unipolar lexicon (appearance, intellect). `provenance` keeps the
// source concept per term (appearance is the union of two concept lists).
struct CategoryLexicon {
    Dimension dimension = Dimension::appearance;
    std::set<std::string> terms;
    std::map<std::string, std::string> provenance;

    bool contains(std::string_view term) const { return terms.count(std::string(term)) > 0; }
};

// Boolean bipolar lexicon (power): weak terms score 0, powerful terms 1.
struct BipolarCategoryLexicon {
    Dimension dimension = Dimension::power;
    std::set<std::string> low_terms;   // weak
    std::set<std::string> high_terms;  // powerful

    std::optional<double> score(std::string_view term) const;
};

struct PoleSplit {
    std::set<std::string> low_set;
    std::set<std::string> high_set;
    double low_pct = 25.0;
    double high_pct = 75.0;
};

// TSV with header term/valence/arousal/dominance. Lines with non-numeric or
// out-of-range scores are rejected with a diagnostic; multi-word terms are
// dropped with a counted warning.
VadLexicons load_scored_lexicon(const std::string& path, Report& report);

// One-term-per-line text file whose first non-comment line is
// "#concept <name>". Multi-word terms are dropped with a warning.
struct ConceptList {
    std::string concept_name;
    std::set<std::string> terms;
};
ConceptList load_concept_list(const std::string& path, Report& report);

// Nearest-rank percentiles on the score multiset; both poles use strict
// inequalities, so single-term and all-equal lexicons produce empty sets.
PoleSplit percentile_split(const ScoredLexicon& lex, double low_pct = 25.0,
                           double high_pct = 75.0);

// Terms scoring strictly above the nearest-rank percentile value.
std::set<std::string> terms_above_percentile(const ScoredLexicon& lex, double pct);

// Nearest-rank percentile value of a sorted ascending multiset.
double nearest_rank_percentile(const std::vector<double>& sorted_scores, double pct);

// Disjoint, exhaustive, reproducible for a fixed seed.
struct TrainTestSplit {
    ScoredLexicon train;
    ScoredLexicon test;
};
TrainTestSplit split_train_test(const ScoredLexicon& lex, double ratio, std::uint64_t seed);

}  // namespace storylens
