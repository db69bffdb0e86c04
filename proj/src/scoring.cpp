#include "storylens/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <tuple>

namespace storylens {

std::string_view to_string(ScoreMethod m) {
    switch (m) {
        case ScoreMethod::lex_avg: return "lex_avg";
        case ScoreMethod::emb_sim: return "emb_sim";
        case ScoreMethod::axis_emb: return "axis_emb";
    }
    return "lex_avg";
}

std::optional<ScoreMethod> score_method_from_string(std::string_view s) {
    if (s == "lex_avg") return ScoreMethod::lex_avg;
    if (s == "emb_sim") return ScoreMethod::emb_sim;
    if (s == "axis_emb") return ScoreMethod::axis_emb;
    return std::nullopt;
}

namespace {

std::optional<double> weighted_mean_over_hits(
    const AttributeSet& attrs, const std::function<std::optional<double>(const std::string&)>& f) {
    double sum = 0.0;
    std::size_t weight = 0;
    for (const auto& [token, w] : attrs.tokens) {
        const auto s = f(token);
        if (!s) continue;
        sum += *s * static_cast<double>(w);
        weight += w;
    }
    if (weight == 0) return std::nullopt;
    return sum / static_cast<double>(weight);
}

}  // namespace

std::optional<double> lex_avg(const AttributeSet& attrs, const ScoredLexicon& lex) {
    return weighted_mean_over_hits(attrs,
                                   [&](const std::string& t) { return lex.score(t); });
}

std::optional<double> lex_avg(const AttributeSet& attrs, const BipolarCategoryLexicon& lex) {
    return weighted_mean_over_hits(attrs,
                                   [&](const std::string& t) { return lex.score(t); });
}

std::optional<double> lex_avg(const AttributeSet& attrs, const CategoryLexicon& lex) {
    std::size_t hits = 0, total = 0;
    for (const auto& [token, w] : attrs.tokens) {
        total += w;
        if (lex.contains(token)) hits += w;
    }
    if (hits == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::optional<double> emb_sim(std::string_view token, const std::set<std::string>& prototypes,
                              const EmbeddingStore& store) {
    std::vector<std::span<const float>> vectors;
    for (const auto& p : prototypes) {
        auto v = store.find(p);
        if (v) vectors.push_back(*v);
    }
    if (vectors.empty())
        throw std::invalid_argument("emb_sim: no prototype in embedding vocabulary");
    const auto tv = store.find(token);
    if (!tv) return std::nullopt;
    double sum = 0.0;
    for (const auto& pv : vectors) {
        const auto c = cosine(*tv, pv);
        if (!c) throw std::invalid_argument("emb_sim: zero vector in similarity");
        sum += *c;
    }
    return sum / static_cast<double>(vectors.size());
}

std::vector<double> build_axis(const std::set<std::string>& low_terms,
                               const std::set<std::string>& high_terms,
                               const EmbeddingStore& store) {
    auto pole_mean = [&](const std::set<std::string>& terms,
                         const char* which) -> std::vector<double> {
        std::vector<double> mean(store.dim(), 0.0);
        std::size_t n = 0;
        for (const auto& t : terms) {
            const auto v = store.find(t);
            if (!v) continue;
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (*v)[i];
            ++n;
        }
        if (n == 0)
            throw std::invalid_argument(std::string("build_axis: ") + which +
                                        " pole empty after vocabulary filtering");
        for (auto& x : mean) x /= static_cast<double>(n);
        return mean;
    };
    const auto high = pole_mean(high_terms, "high");
    const auto low = pole_mean(low_terms, "low");
    std::vector<double> axis(store.dim());
    for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = high[i] - low[i];
    return axis;
}

std::vector<double> build_axis(const PoleSplit& split, const EmbeddingStore& store) {
    return build_axis(split.low_set, split.high_set, store);
}

std::vector<double> build_axis(const BipolarCategoryLexicon& lex, const EmbeddingStore& store) {
    return build_axis(lex.low_terms, lex.high_terms, store);
}

std::optional<double> axis_project(std::string_view token, std::span<const double> axis,
                                   const EmbeddingStore& store) {
    const auto tv = store.find(token);
    if (!tv) return std::nullopt;
    const auto c = cosine(*tv, axis);
    if (!c) throw std::invalid_argument("axis_project: zero axis or zero token vector");
    return c;
}

// --- DimensionScorer ---------------------------------------------------------

DimensionScorer DimensionScorer::make_lex_avg(const ScoredLexicon& lex) {
    DimensionScorer s;
    s.dimension_ = lex.dimension;
    s.method_ = ScoreMethod::lex_avg;
    s.score_map_ = lex.entries;
    return s;
}

DimensionScorer DimensionScorer::make_lex_avg(const CategoryLexicon& lex) {
    DimensionScorer s;
    s.dimension_ = lex.dimension;
    s.method_ = ScoreMethod::lex_avg;
    s.category_terms_ = lex.terms;
    s.hit_fraction_ = true;
    return s;
}

DimensionScorer DimensionScorer::make_lex_avg(const BipolarCategoryLexicon& lex) {
    DimensionScorer s;
    s.dimension_ = lex.dimension;
    s.method_ = ScoreMethod::lex_avg;
    for (const auto& t : lex.low_terms) s.score_map_[t] = 0.0;
    for (const auto& t : lex.high_terms) s.score_map_[t] = 1.0;
    return s;
}

namespace {

std::vector<std::span<const float>> resolve_prototypes(const std::set<std::string>& terms,
                                                       const EmbeddingStore& store) {
    std::vector<std::span<const float>> vectors;
    for (const auto& t : terms) {
        const auto v = store.find(t);
        if (v) vectors.push_back(*v);
    }
    if (vectors.empty())
        throw std::invalid_argument("emb_sim scorer: prototype set empty after filtering");
    return vectors;
}

}  // namespace

DimensionScorer DimensionScorer::make_emb_sim(const ScoredLexicon& lex,
                                              const EmbeddingStore& store, double high_pct) {
    DimensionScorer s;
    s.dimension_ = lex.dimension;
    s.method_ = ScoreMethod::emb_sim;
    s.store_ = &store;
    s.prototype_vectors_ = resolve_prototypes(terms_above_percentile(lex, high_pct), store);
    return s;
}

DimensionScorer DimensionScorer::make_emb_sim(const CategoryLexicon& lex,
                                              const EmbeddingStore& store) {
    DimensionScorer s;
    s.dimension_ = lex.dimension;
    s.method_ = ScoreMethod::emb_sim;
    s.store_ = &store;
    s.prototype_vectors_ = resolve_prototypes(lex.terms, store);
    return s;
}

DimensionScorer DimensionScorer::make_emb_sim(const BipolarCategoryLexicon& lex,
                                              const EmbeddingStore& store) {
    DimensionScorer s;
    s.dimension_ = lex.dimension;
    s.method_ = ScoreMethod::emb_sim;
    s.store_ = &store;
    s.prototype_vectors_ = resolve_prototypes(lex.high_terms, store);
    return s;
}

DimensionScorer DimensionScorer::make_axis_emb(const ScoredLexicon& lex,
                                               const EmbeddingStore& store, double low_pct,
                                               double high_pct) {
    DimensionScorer s;
    s.dimension_ = lex.dimension;
    s.method_ = ScoreMethod::axis_emb;
    s.store_ = &store;
    s.axis_ = build_axis(percentile_split(lex, low_pct, high_pct), store);
    return s;
}

DimensionScorer DimensionScorer::make_axis_emb(const BipolarCategoryLexicon& lex,
                                               const EmbeddingStore& store) {
    DimensionScorer s;
    s.dimension_ = lex.dimension;
    s.method_ = ScoreMethod::axis_emb;
    s.store_ = &store;
    s.axis_ = build_axis(lex, store);
    return s;
}

std::optional<double> DimensionScorer::score_token(const std::string& token) const {
    switch (method_) {
        case ScoreMethod::lex_avg: {
            if (hit_fraction_)
                return category_terms_.count(token) > 0 ? std::optional<double>(1.0)
                                                        : std::nullopt;
            auto it = score_map_.find(token);
            if (it == score_map_.end()) return std::nullopt;
            return it->second;
        }
        case ScoreMethod::emb_sim: {
            const auto tv = store_->find(token);
            if (!tv) return std::nullopt;
            double sum = 0.0;
            for (const auto& pv : prototype_vectors_) {
                const auto c = cosine(*tv, pv);
                if (!c) return std::nullopt;  // zero token vector
                sum += *c;
            }
            return sum / static_cast<double>(prototype_vectors_.size());
        }
        case ScoreMethod::axis_emb: {
            const auto tv = store_->find(token);
            if (!tv) return std::nullopt;
            return cosine(*tv, std::span<const double>(axis_));
        }
    }
    return std::nullopt;
}

StoryScore score_story(const AttributeSet& attrs, const DimensionScorer& scorer,
                       bool type_level) {
    StoryScore score;
    score.story_id = attrs.story_id;
    score.dimension = scorer.dimension();
    score.method = scorer.method();
    score.source = attrs.source;

    // Unipolar lex_avg is a fraction over all tokens, not a mean over hits;
    // handled through the per-token path by averaging 1.0 hits against 0.0
    // for *scoreable* misses. The scorer signals hits only, so fall back to
    // the free function for that case.
    double sum = 0.0;
    std::size_t weight = 0, hit_weight = 0;
    bool unipolar_lex = scorer.method() == ScoreMethod::lex_avg &&
                        (scorer.dimension() == Dimension::appearance ||
                         scorer.dimension() == Dimension::intellect);
    for (const auto& [token, w0] : attrs.tokens) {
        const std::size_t w = type_level ? 1 : w0;
        const auto s = scorer.score_token(token);
        if (unipolar_lex) {
            weight += w;
            if (s) {
                sum += *s * static_cast<double>(w);
                hit_weight += w;
            }
            continue;
        }
        if (!s) continue;
        sum += *s * static_cast<double>(w);
        weight += w;
    }
    if (unipolar_lex) {
        if (hit_weight == 0) return score;  // absent: nothing in the lexicon
        score.raw = sum / static_cast<double>(weight);
        score.n_scored_tokens = hit_weight;
        return score;
    }
    if (weight == 0) return score;
    score.raw = sum / static_cast<double>(weight);
    score.n_scored_tokens = weight;
    return score;
}

void zscore(std::vector<StoryScore>& scores, Report& report) {
    using Key = std::tuple<Dimension, ScoreMethod, AttributeSource>;
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i].z.reset();
        if (scores[i].raw)
            groups[{scores[i].dimension, scores[i].method, scores[i].source}].push_back(i);
    }
    for (const auto& [key, idx] : groups) {
        auto group_name = [&] {
            return std::string(to_string(std::get<0>(key))) + "/" +
                   std::string(to_string(std::get<1>(key))) + "/" +
                   std::string(to_string(std::get<2>(key)));
        };
        if (idx.size() < 2) {
            report.warn(0, "z-score group " + group_name() +
                               " has fewer than 2 present scores; z left absent");
            continue;
        }
        double sum = 0.0;
        for (std::size_t i : idx) sum += *scores[i].raw;
        const double mean = sum / static_cast<double>(idx.size());
        double ss = 0.0;
        for (std::size_t i : idx) {
            const double d = *scores[i].raw - mean;
            ss += d * d;
        }
        const double std_dev = std::sqrt(ss / static_cast<double>(idx.size()));
        if (std_dev == 0.0) {
            report.warn(0, "z-score group " + group_name() + " has zero variance; z left absent");
            continue;
        }
        for (std::size_t i : idx) scores[i].z = (*scores[i].raw - mean) / std_dev;
    }
}

}  // namespace storylens
