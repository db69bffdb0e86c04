#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "storylens/attributes.hpp"
#include "storylens/embeddings.hpp"
#include "storylens/lexicons.hpp"
#include "storylens/report.hpp"

namespace storylens {

enum class ScoreMethod { lex_avg, emb_sim, axis_emb };

std::string_view to_string(ScoreMethod m);
std::optional<ScoreMethod> score_method_from_string(std::string_view s);

// --- token-level primitives -------------------------------------------------

// Weighted mean of lexicon scores over tokens found in the lexicon; nullopt
// when nothing hits.
std::optional<double> lex_avg(const AttributeSet& attrs, const ScoredLexicon& lex);
// Boolean bipolar: low terms contribute 0, high terms 1; mean over hits.
std::optional<double> lex_avg(const AttributeSet& attrs, const BipolarCategoryLexicon& lex);
// Boolean unipolar: in-lexicon hit average, i.e. the weighted fraction of
// attribute tokens that are lexicon members; nullopt when nothing hits.
std::optional<double> lex_avg(const AttributeSet& attrs, const CategoryLexicon& lex);

// Mean cosine between the token vector and each in-vocabulary prototype.
// Throws std::invalid_argument when no prototype survives vocabulary
// filtering; OOV token yields nullopt.
std::optional<double> emb_sim(std::string_view token, const std::set<std::string>& prototypes,
                              const EmbeddingStore& store);

// Mean high-pole vector minus mean low-pole vector. Throws
// std::invalid_argument when either pole is empty after vocabulary filtering.
std::vector<double> build_axis(const std::set<std::string>& low_terms,
                               const std::set<std::string>& high_terms,
                               const EmbeddingStore& store);
std::vector<double> build_axis(const PoleSplit& split, const EmbeddingStore& store);
std::vector<double> build_axis(const BipolarCategoryLexicon& lex, const EmbeddingStore& store);

// cosine(e(token), axis); OOV yields nullopt, an all-zero axis throws.
std::optional<double> axis_project(std::string_view token, std::span<const double> axis,
                                   const EmbeddingStore& store);

// --- story-level scoring ----------------------------------------------------

// A configured (dimension, method) scoring unit. Prototype sets and axes are
// resolved against the embedding store at construction, where configuration
// errors (empty pole, zero axis) surface as std::invalid_argument.
class DimensionScorer {
public:
    static DimensionScorer make_lex_avg(const ScoredLexicon& lex);
    static DimensionScorer make_lex_avg(const CategoryLexicon& lex);
    static DimensionScorer make_lex_avg(const BipolarCategoryLexicon& lex);
    // VAD: prototypes are the above-high_pct percentile terms of `lex`.
    static DimensionScorer make_emb_sim(const ScoredLexicon& lex, const EmbeddingStore& store,
                                        double high_pct = 75.0);
    // Unipolar: the whole concept list is the prototype set.
    static DimensionScorer make_emb_sim(const CategoryLexicon& lex, const EmbeddingStore& store);
    // Power: the high (powerful) term list.
    static DimensionScorer make_emb_sim(const BipolarCategoryLexicon& lex,
                                        const EmbeddingStore& store);
    static DimensionScorer make_axis_emb(const ScoredLexicon& lex, const EmbeddingStore& store,
                                         double low_pct = 25.0, double high_pct = 75.0);
    static DimensionScorer make_axis_emb(const BipolarCategoryLexicon& lex,
                                         const EmbeddingStore& store);

    Dimension dimension() const { return dimension_; }
    ScoreMethod method() const { return method_; }

    std::optional<double> score_token(const std::string& token) const;

private:
    DimensionScorer() = default;

    Dimension dimension_ = Dimension::valence;
    ScoreMethod method_ = ScoreMethod::lex_avg;
    const EmbeddingStore* store_ = nullptr;

    // lex_avg state
    std::map<std::string, double> score_map_;      // scored + bipolar lexicons
    std::set<std::string> category_terms_;         // unipolar lexicons
    bool hit_fraction_ = false;

    // emb_sim / axis_emb state
    std::vector<std::span<const float>> prototype_vectors_;
    std::vector<double> axis_;
};

struct StoryScore {
    std::string story_id;
    Dimension dimension = Dimension::valence;
    ScoreMethod method = ScoreMethod::lex_avg;
    AttributeSource source = AttributeSource::dependency;
    std::optional<double> raw;
    std::optional<double> z;
    std::size_t n_scored_tokens = 0;  // 0 iff raw is absent
};

// Weighted mean of per-token scores over scoreable tokens. With
// `type_level`, duplicates collapse to weight one.
StoryScore score_story(const AttributeSet& attrs, const DimensionScorer& scorer,
                       bool type_level = false);

// Fills z = (raw - mean)/population-std per (dimension, method, source)
// group, pooled over all stories regardless of writer group. Groups with
// fewer than two present raws or zero variance keep z absent, with a warning.
void zscore(std::vector<StoryScore>& scores, Report& report);

}  // namespace storylens
