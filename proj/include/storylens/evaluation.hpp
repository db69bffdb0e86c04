#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "storylens/embeddings.hpp"
#include "storylens/lexicons.hpp"
#include "storylens/scoring.hpp"

namespace storylens {

// Average ranks (ties get the mean of the ranks they occupy), 1-based.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average-ranked values. Constant input yields
// nullopt. Strictly monotone pairs return exactly +/-1.0.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct EvalResult {
    Dimension dimension = Dimension::valence;
    ScoreMethod method = ScoreMethod::emb_sim;
    double spearman = 0.0;
    std::size_t n_test = 0;   // test terms actually scored (in vocabulary)
    double coverage = 0.0;    // n_test / |test split|
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

// Splits the lexicon, builds the method's prototype or axis inputs from the
// train split only, predicts scores for in-vocabulary test terms, and
// correlates them with ground truth. Throws when the covered test split is
// too small to correlate.
EvalResult evaluate_scorer(const ScoredLexicon& lex, ScoreMethod method,
                           const EmbeddingStore& store, double ratio, std::uint64_t seed,
                           double low_pct = 25.0, double high_pct = 75.0);

}  // namespace storylens
